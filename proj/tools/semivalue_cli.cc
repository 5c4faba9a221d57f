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


// semivalue: generate | ingest | train-surrogate | attribute | evaluate |
// reproduce-figure. Every config key of a command is also a --flag.

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "semivalue/parallel.h"
#include "semivalue/pipeline.h"

namespace {

struct SubcommandFlags {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;  // config key -> flag text
  std::string manifest;
  std::string output;
  std::string recipe;  // reproduce-figure positional
};

std::string FlagName(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string Describe(const nlohmann::json& def) {
  return def.is_null() ? "default: depends on context" : "default: " + def.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semivalue feature attribution with data-driven weights"};
  app.require_subcommand(1);
  int workers = semivalue::DefaultWorkerCount();
  bool record_timing = false;
  app.add_option("--workers", workers, "Worker threads (default: logical cores)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--record-timing", record_timing, "Write wall-clock timings into outputs");

  const std::map<std::string, std::string> kDescriptions = {
      {"generate", "Synthetic exchangeable-Gaussian dataset with splits"},
      {"ingest", "Tabular CSV to a standardized, split dataset"},
      {"train-surrogate", "Fit the predictor and the masked conditional-expectation network"},
      {"attribute", "Marginal contributions and per-explicand weight selection"},
      {"evaluate", "Recovery, inclusion, exclusion and masked-inclusion curves"},
      {"reproduce-figure", "Named experiment recipes"},
  };
  std::map<std::string, SubcommandFlags> commands;
  for (const std::string& name : semivalue::CommandNames()) {
    SubcommandFlags& sub = commands[name];
    sub.app = app.add_subcommand(name, kDescriptions.at(name));
    sub.app->fallthrough();
    sub.app->add_option("--manifest", sub.manifest, "JSON manifest (a run.json replays)");
    sub.app->add_option("--output,-o", sub.output,
                        std::string("Output directory, relative to $") +
                            semivalue::kOutputRootEnv + " when set");
    if (name == "reproduce-figure") {
      sub.app->add_option("recipe_name", sub.recipe, "Recipe")
          ->check(CLI::IsMember(semivalue::RecipeNames()));
    }
    const nlohmann::json defaults = semivalue::DefaultConfig(name);
    for (const auto& [key, def] : defaults.items()) {
      sub.app->add_option(FlagName(key), sub.values[key], Describe(def));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : semivalue::kExitInvalidInput;
  }

  for (auto& [name, sub] : commands) {
    if (!sub.app->parsed()) continue;
    nlohmann::json flags = nlohmann::json::object();
    for (const auto& [key, text] : sub.values) {
      if (sub.app->count(FlagName(key)) > 0) flags[key] = text;
    }
    if (!sub.recipe.empty()) flags["recipe"] = sub.recipe;
    semivalue::RunOptions options;
    options.workers = workers;
    options.record_timing = record_timing;
    options.log = &std::cerr;
    nlohmann::json config;
    try {
      const nlohmann::json manifest =
          sub.manifest.empty() ? nlohmann::json::object() : semivalue::ReadManifest(sub.manifest);
      config = semivalue::MergeConfig(semivalue::DefaultConfig(name), manifest, flags);
    } catch (const semivalue::IoError& e) {
      std::cerr << "[semivalue] I/O error: " << e.what() << "\n";
      return semivalue::kExitIoError;
    } catch (const std::exception& e) {
      std::cerr << "[semivalue] invalid input: " << e.what() << "\n";
      return semivalue::kExitInvalidInput;
    }
    options.output_dir = semivalue::ResolveOutputDir(sub.output, name);
    return semivalue::RunCommand(name, config, options);
  }
  return semivalue::kExitInvalidInput;
}
