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


#include "semivalue/pipeline.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace semivalue {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("semivalue_pipeline_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string Dir(const std::string& name) const { return (root_ / name).string(); }

  int Run(const std::string& command, const json& flags, const std::string& out) {
    RunOptions options;
    options.output_dir = Dir(out);
    options.workers = 2;
    options.log = &log_;
    return RunCommand(command, MergeConfig(DefaultConfig(command), json::object(), flags),
                      options);
  }

  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path root_;
  std::ostringstream log_;
};

TEST(ConfigTest, PrecedenceFlagsOverManifestOverDefaults) {
  const json defaults = DefaultConfig("generate");
  const json merged =
      MergeConfig(defaults, {{"n", 500}, {"rho", 0.3}, {"noise_sd", 1}}, {{"n", "700"}});
  EXPECT_EQ(merged.at("n"), 700);
  EXPECT_EQ(merged.at("rho"), 0.3);
  EXPECT_TRUE(merged.at("noise_sd").is_number_float());
  EXPECT_EQ(merged.at("kind"), "exchangeable-regression");
  EXPECT_EQ(merged.at("seed"), 0);
}

TEST(ConfigTest, RejectsUnknownKeysAndBadTypes) {
  const json defaults = DefaultConfig("attribute");
  EXPECT_THROW(MergeConfig(defaults, {{"colour", "red"}}, json::object()),
               std::invalid_argument);
  EXPECT_THROW(MergeConfig(defaults, json::object(), {{"n_chains", "ten"}}),
               std::invalid_argument);
  EXPECT_THROW(MergeConfig(defaults, {{"threshold", "1.1"}}, json::object()),
               std::invalid_argument);
  EXPECT_THROW(MergeConfig(defaults, json::object(), {{"svg", "maybe"}}),
               std::invalid_argument);
  EXPECT_THROW(DefaultConfig("deploy"), std::invalid_argument);
  for (const std::string& c : CommandNames()) EXPECT_TRUE(DefaultConfig(c).contains("seed"));
}

TEST(ConfigTest, HashIsStableAndSensitive) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  json c = DefaultConfig("generate");
  const std::string h = ManifestHash("generate", c);
  EXPECT_EQ(h, ManifestHash("generate", DefaultConfig("generate")));
  c["seed"] = 1;
  EXPECT_NE(h, ManifestHash("generate", c));
  EXPECT_NE(h, ManifestHash("ingest", DefaultConfig("generate")));
}

TEST(ConfigTest, OutputRootEnvironment) {
  ::setenv(kOutputRootEnv, "/tmp/semivalue_root", 1);
  EXPECT_EQ(ResolveOutputDir("runs/a", "generate"), "/tmp/semivalue_root/runs/a");
  EXPECT_EQ(ResolveOutputDir("", "attribute"), "/tmp/semivalue_root/out/attribute");
  EXPECT_EQ(ResolveOutputDir("/abs/dir", "attribute"), "/abs/dir");
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(ResolveOutputDir("", "evaluate"), "out/evaluate");
}

TEST_F(PipelineTest, GenerateRejectsDegenerateCorrelation) {
  EXPECT_EQ(Run("generate", {{"rho", "1.0"}}, "bad"), kExitInvalidInput);
  EXPECT_EQ(Run("generate", {{"n", "50"}}, "small"), kExitInvalidInput);
  EXPECT_EQ(Run("generate", {{"kind", "spiral"}}, "kind"), kExitInvalidInput);
}

TEST_F(PipelineTest, GenerateIsByteReproducible) {
  const json flags = {{"d", "5"}, {"n", "1000"}, {"seed", "7"}};
  ASSERT_EQ(Run("generate", flags, "a"), kExitOk);
  ASSERT_EQ(Run("generate", flags, "b"), kExitOk);
  for (const char* f : {"data.csv", "dataset.json", "run.json"}) {
    EXPECT_EQ(Slurp(root_ / "a" / f), Slurp(root_ / "b" / f)) << f;
  }
  const json run = json::parse(Slurp(root_ / "a" / "run.json"));
  EXPECT_EQ(run.at("config").at("seed"), 7);
  EXPECT_EQ(run.at("manifest_hash"), ManifestHash("generate", run.at("config")));
}

TEST_F(PipelineTest, ExactAttributionSmokeAndDominance) {
  ASSERT_EQ(Run("generate", {{"d", "6"}, {"n", "1000"}, {"seed", "1"}}, "data"), kExitOk);
  const auto start = std::chrono::steady_clock::now();
  ASSERT_EQ(Run("attribute", {{"data", Dir("data")}, {"n_explicands", "20"}}, "att"), kExitOk);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
            10.0);
  ASSERT_EQ(Run("attribute",
                {{"data", Dir("data")}, {"n_explicands", "20"}, {"weights", "shapley-only"}},
                "shap"),
            kExitOk);
  const json full = json::parse(Slurp(root_ / "att" / "reports.json"));
  const json only = json::parse(Slurp(root_ / "shap" / "reports.json"));
  ASSERT_EQ(full.at("explicands").size(), 20u);
  for (std::size_t k = 0; k < 20; ++k) {
    const auto best = [](const json& e) {
      double b = -1e300;
      for (const json& u : e.at("report").at("utilities")) b = std::max(b, u.at("utility").get<double>());
      return b;
    };
    // Utilities are negated AUPs.
    EXPECT_GE(-best(only.at("explicands")[k]), -best(full.at("explicands")[k]));
  }
  for (const char* f : {"recovery_curves.csv", "summary.json", "run.json"}) {
    EXPECT_TRUE(fs::exists(root_ / "att" / f)) << f;
  }
}

TEST_F(PipelineTest, EvaluateCurvesAndReplay) {
  ASSERT_EQ(Run("generate", {{"d", "5"}, {"n", "1000"}, {"seed", "2"}}, "data"), kExitOk);
  ASSERT_EQ(Run("attribute", {{"data", Dir("data")}, {"n_explicands", "30"}}, "att"), kExitOk);
  ASSERT_EQ(Run("evaluate", {{"reports", Dir("att")}}, "ev"), kExitOk);
  const json curves = json::parse(Slurp(root_ / "ev" / "curves.json"));
  for (const json& band : curves.at("recovery")) {
    EXPECT_NEAR(band.at("mean").back().get<double>(), 0.0, 1e-12);
  }
  EXPECT_EQ(curves.at("metric"), "mse");
  EXPECT_EQ(Run("evaluate", {{"reports", Dir("att")}, {"metric", "auc"}}, "auc"),
            kExitInvalidInput);

  RunOptions options;
  options.output_dir = Dir("ev_replay");
  options.workers = 1;
  const json replay = MergeConfig(DefaultConfig("evaluate"),
                                  ReadManifest((root_ / "ev" / "run.json").string()),
                                  json::object());
  ASSERT_EQ(RunCommand("evaluate", replay, options), kExitOk);
  for (const char* f : {"recovery_curves.csv", "inclusion_curves.csv", "exclusion_curves.csv",
                        "masked_inclusion_curves.csv", "curves.json", "run.json"}) {
    EXPECT_EQ(Slurp(root_ / "ev" / f), Slurp(root_ / "ev_replay" / f)) << f;
  }
}

TEST_F(PipelineTest, MissingInputsAndNonConvergence) {
  EXPECT_EQ(Run("attribute", {{"data", Dir("absent")}}, "x"), kExitIoError);
  EXPECT_EQ(Run("evaluate", {{"reports", Dir("absent")}}, "y"), kExitIoError);
  ASSERT_EQ(Run("generate", {{"d", "6"}, {"n", "1000"}}, "data"), kExitOk);
  EXPECT_EQ(Run("attribute",
                {{"data", Dir("data")}, {"provider", "surrogate"}, {"n_explicands", "5"}},
                "nosur"),
            kExitInvalidInput);
  EXPECT_EQ(Run("attribute",
                {{"data", Dir("data")},
                 {"contributions", "sampled"},
                 {"n_explicands", "3"},
                 {"min_iterations", "2"},
                 {"max_iterations", "2"},
                 {"threshold", "1.0000001"}},
                "nc"),
            kExitNonConverged);
  const json summary = json::parse(Slurp(root_ / "nc" / "summary.json"));
  EXPECT_EQ(summary.at("non_converged"), 3);
}

TEST_F(PipelineTest, ClassificationSurrogateFlow) {
  ASSERT_EQ(Run("generate",
                {{"kind", "exchangeable-classification"}, {"d", "6"}, {"n", "3000"}},
                "data"),
            kExitOk);
  ASSERT_EQ(Run("train-surrogate",
                {{"data", Dir("data")}, {"epochs", "30"}, {"hidden_units", "32"}}, "sur"),
            kExitOk);
  EXPECT_EQ(Run("attribute", {{"data", Dir("data")}, {"model", Dir("sur")}, {"n_explicands", "5"}},
                "exact_on_cls"),
            kExitInvalidInput);
  ASSERT_EQ(Run("attribute",
                {{"data", Dir("data")},
                 {"model", Dir("sur")},
                 {"provider", "surrogate"},
                 {"n_explicands", "60"}},
                "att"),
            kExitOk);
  ASSERT_EQ(Run("evaluate", {{"reports", Dir("att")}}, "ev"), kExitOk);
  const json curves = json::parse(Slurp(root_ / "ev" / "curves.json"));
  EXPECT_EQ(curves.at("metric"), "auc");
  for (const json& band : curves.at("inclusion")) {
    const auto mean = band.at("mean").get<std::vector<double>>();
    EXPECT_EQ(mean.front(), 0.5);
    EXPECT_GT(mean.back(), 0.7);
  }
}

TEST_F(PipelineTest, FigureRecipeGrid) {
  ASSERT_EQ(Run("reproduce-figure", {{"recipe", "fig1a-grid"}, {"step", "0.1"}, {"svg", "true"}},
                "fig"),
            kExitOk);
  const json summary = json::parse(Slurp(root_ / "fig" / "fig1a_grid_summary.json"));
  ASSERT_EQ(summary.at("disagreement").size(), 2u);
  EXPECT_LT(summary.at("disagreement")[0].at("fraction").get<double>(),
            summary.at("disagreement")[1].at("fraction").get<double>());
  EXPECT_TRUE(fs::exists(root_ / "fig" / "fig1a_rho0.6.svg"));
  EXPECT_EQ(Run("reproduce-figure", {{"recipe", "fig9"}}, "nope"), kExitInvalidInput);
}

}  // namespace
}  // namespace semivalue
