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


#include "semivalue/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

namespace semivalue {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(SplitTest, SizesFollowTheRule) {
  const SplitSizes s = ComputeSplitSizes(10000);
  EXPECT_EQ(s.train, 7000u);
  EXPECT_EQ(s.test, 1000u);
  EXPECT_EQ(s.validation, 1000u);
  EXPECT_EQ(s.surrogate, 1000u);
  const SplitSizes small = ComputeSplitSizes(1001);
  EXPECT_EQ(small.test, 100u);
  EXPECT_EQ(small.train, 701u);
  EXPECT_EQ(small.validation + small.surrogate, 200u);
  EXPECT_GE(small.surrogate, small.validation);
  EXPECT_THROW(ComputeSplitSizes(300), std::invalid_argument);
  EXPECT_THROW(ComputeSplitSizes(0), std::invalid_argument);
}

TEST(SplitTest, AssignmentIsSeededShuffle) {
  const auto a = AssignSplits(2000, 5), b = AssignSplits(2000, 5), c = AssignSplits(2000, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::size_t train = 0;
  for (Split s : a) train += s == Split::kTrain ? 1 : 0;
  EXPECT_EQ(train, 1400u);
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(SplitFromString(ToString(static_cast<Split>(s))), static_cast<Split>(s));
  }
  EXPECT_THROW(SplitFromString("holdout"), std::invalid_argument);
}

TEST(SamplerTest, SampleCorrelationConverges) {
  const int d = 5;
  const std::size_t n = 100000;
  const double rho = 0.6;
  std::mt19937_64 rng(1);
  const Matrix x = SampleExchangeableGaussian(n, d, rho, rng);
  const Vector mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  double worst = 0.0;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const double corr = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
      worst = std::max(worst, std::abs(corr - (a == b ? 1.0 : rho)));
    }
  }
  EXPECT_LT(worst, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(MeanOffDiagonalCorrelation(x), rho, 0.01);
  EXPECT_THROW(SampleExchangeableGaussian(10, d, 1.0, rng), std::invalid_argument);
}

TEST(GeneratorTest, DefaultCoefficients) {
  const Vector reg = DefaultRegressionBeta(100);
  EXPECT_EQ(reg[0], 1.0);
  EXPECT_NEAR(reg[19], 0.81, 1e-12);
  EXPECT_EQ(reg[20], 0.0);
  const Vector cls = DefaultClassificationBeta(30);
  EXPECT_NEAR(cls[9], 0.82, 1e-12);
  EXPECT_EQ(cls[10], 0.0);
  EXPECT_EQ(DefaultRegressionBeta(5).size(), 5);
  // Var(Xᵀβ) = (1-ρ)|β|² + ρ(Σβ)².
  const Vector beta = (Vector(3) << 1.0, 2.0, -1.0).finished();
  EXPECT_NEAR(ExchangeableLinearVariance(beta, 0.5), 0.5 * 6.0 + 0.5 * 4.0, 1e-12);
}

TEST(GeneratorTest, DeterministicAndRecordsParameters) {
  const Vector beta = DefaultRegressionBeta(6);
  const Dataset a = GenerateExchangeableRegression(1000, 6, 0.6, beta, 2.0, 7);
  const Dataset b = GenerateExchangeableRegression(1000, 6, 0.6, beta, 2.0, 7);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(a.parameters.at("rho"), 0.6);
  EXPECT_EQ(a.task, "regression");
  EXPECT_FALSE(a.standardized);
  const Dataset c = GenerateExchangeableClassification(1000, 6, 0.25, beta, 3);
  for (Eigen::Index r = 0; r < c.y.size(); ++r) EXPECT_TRUE(c.y[r] == 0.0 || c.y[r] == 1.0);
  EXPECT_THROW(GenerateExchangeableRegression(1000, 6, 1.0, beta, 2.0, 7), std::invalid_argument);
}

TEST(AugmentTest, TriplesWidthAndKeepsOriginalColumns) {
  std::mt19937_64 rng(2);
  const Matrix x = SampleExchangeableGaussian(2000, 4, 0.3, rng);
  const Matrix out = AugmentSpurious(x, 9);
  ASSERT_EQ(out.cols(), 12);
  EXPECT_EQ(out.leftCols(4), x);
  EXPECT_TRUE(out.allFinite());
  // New columns correlate with the originals.
  EXPECT_GT(MeanOffDiagonalCorrelation(out), 0.1);
}

TEST(StandardizeTest, UsesTrainingStatisticsAndDropsConstants) {
  Dataset data = GenerateExchangeableRegression(1000, 3, 0.2, DefaultRegressionBeta(3), 1.0, 1);
  data.x.col(1).setConstant(4.0);
  StandardizeFromTraining(data);
  EXPECT_EQ(data.dim(), 2u);
  EXPECT_EQ(data.warnings.size(), 1u);
  const Matrix train = data.Rows(Split::kTrain);
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    EXPECT_NEAR(train.col(c).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt((train.col(c).array() - train.col(c).mean()).square().mean()), 1.0,
                1e-12);
  }
}

TEST(IngestTest, FiltersMissingAndNonNumeric) {
  const std::string path = TempPath("semivalue_ingest_test.csv");
  {
    std::ofstream out(path);
    out << "a,\"name, with comma\",b,target\n";
    for (int r = 0; r < 400; ++r) {
      const std::string b = r % 50 == 0 ? "NA" : std::to_string(r % 7);
      out << r * 0.5 << ",\"row " << r << "\"," << b << "," << (r % 3) << "\n";
    }
    out << "1.0,x,?,2\n";
  }
  IngestConfig config;
  config.max_rows = 1000;
  const Dataset data = IngestCsv(path, "target", config);
  EXPECT_EQ(data.dim(), 2u);
  EXPECT_EQ(data.rows(), 392u);
  EXPECT_TRUE(data.standardized);
  EXPECT_EQ(data.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(data.warnings.size(), 2u);

  config.max_rows = 350;
  EXPECT_EQ(IngestCsv(path, "target", config).rows(), 350u);
  EXPECT_THROW(IngestCsv(path, "missing", config), std::invalid_argument);
  config.task = "classification";
  EXPECT_THROW(IngestCsv(path, "target", config), std::invalid_argument);
  std::remove(path.c_str());
  EXPECT_THROW(IngestCsv(path, "target", IngestConfig{}), std::runtime_error);
}

TEST(DatasetCsvTest, RoundTripsExactly) {
  const Dataset data =
      GenerateExchangeableRegression(500, 3, 0.4, DefaultRegressionBeta(3), 1.0, 2);
  const std::string path = TempPath("semivalue_dataset_roundtrip.csv");
  WriteDatasetCsv(data, path);
  const Dataset back = ReadDatasetCsv(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.x, data.x);
  EXPECT_EQ(back.y, data.y);
  EXPECT_EQ(back.split, data.split);
  EXPECT_EQ(back.feature_names, data.feature_names);
  const nlohmann::json manifest = DatasetManifest(data);
  EXPECT_EQ(manifest.at("splits").at("test").size(), 100u);
  EXPECT_GE(manifest.at("splits").at("train")[0].get<int>(), 1);
}

}  // namespace
}  // namespace semivalue
