/*
 * Copyright 2026 The Semivalue Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef SEMIVALUE_PIPELINE_H_
#define SEMIVALUE_PIPELINE_H_

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

// Command implementations behind the semivalue CLI. Every command takes an
// effective configuration (defaults < manifest < flags), writes its outputs
// under one directory and returns a process exit code.
namespace semivalue {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 2,
  kExitNonConverged = 3,
  kExitIoError = 4,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kOutputRootEnv = "SEMIVALUE_OUTPUT_ROOT";

const std::vector<std::string>& CommandNames();
const std::vector<std::string>& RecipeNames();

// Default configuration of a command; keys are the long flag names with '-'
// replaced by '_'. Throws std::invalid_argument for unknown commands.
nlohmann::json DefaultConfig(const std::string& command);

// Layers a manifest object and then flag values over the defaults. Keys
// absent from the defaults are rejected. Flag values arrive as strings and
// are converted to the type of the default they replace.
nlohmann::json MergeConfig(const nlohmann::json& defaults, const nlohmann::json& manifest,
                           const nlohmann::json& flags);

// Reads a manifest JSON object. A "config" member, if present, is used in
// place of the top level, so run.json files replay directly.
nlohmann::json ReadManifest(const std::string& path);

std::string Sha256Hex(const std::string& bytes);
// Hash of the canonical serialization of {command, config}.
std::string ManifestHash(const std::string& command, const nlohmann::json& config);

// `flag` if absolute; otherwise joined under $SEMIVALUE_OUTPUT_ROOT when set.
// An empty flag becomes "out/<command>".
std::string ResolveOutputDir(const std::string& flag, const std::string& command);

struct RunOptions {
  std::string output_dir;
  int workers = 1;
  bool record_timing = false;
  bool svg = false;
  std::ostream* log = nullptr;
};

// Runs one command and maps failures to exit codes, reporting them on
// options.log.
int RunCommand(const std::string& command, const nlohmann::json& config,
               const RunOptions& options);

}  // namespace semivalue

#endif  // SEMIVALUE_PIPELINE_H_
