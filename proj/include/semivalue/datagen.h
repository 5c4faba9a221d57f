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


#ifndef SEMIVALUE_DATAGEN_H_
#define SEMIVALUE_DATAGEN_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "semivalue/core.h"

namespace semivalue {

enum class Split : int { kTrain = 0, kValidation = 1, kSurrogate = 2, kTest = 3 };

std::string ToString(Split split);
Split SplitFromString(const std::string& name);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t surrogate = 0;
  std::size_t test = 0;
};

// train = round(0.7n), test = max(round(0.1n), 100), the rest halved between
// validation and surrogate (surrogate takes the odd row). Throws
// std::invalid_argument when validation or surrogate would be empty.
SplitSizes ComputeSplitSizes(std::size_t n);

struct Dataset {
  std::string task;  // "regression" or "classification"
  Matrix x;
  Vector y;
  std::vector<Split> split;
  std::vector<std::string> feature_names;
  bool standardized = false;
  Vector feature_mean;   // training-split statistics, when standardized
  Vector feature_scale;
  nlohmann::json parameters;  // generator or ingestion settings
  std::vector<std::string> warnings;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  std::vector<std::size_t> Indices(Split s) const;
  Matrix Rows(Split s) const;
  Vector Labels(Split s) const;
};

// Random assignment of n rows to the four splits with ComputeSplitSizes.
std::vector<Split> AssignSplits(std::size_t n, std::uint64_t seed);

// Standardizes every column with training-split mean and population sd.
// Columns with zero training sd are dropped and a warning is recorded.
void StandardizeFromTraining(Dataset& data);

// (1.00, 0.99, ..., 0.81, 0, ..., 0); d < 20 keeps the first d entries.
Vector DefaultRegressionBeta(int d);
// (1.00, 0.98, ..., 0.82, 0, ..., 0).
Vector DefaultClassificationBeta(int d);

// Var(Xᵀβ) for X ~ N(0, (1-ρ)I + ρ𝟙𝟙ᵀ).
double ExchangeableLinearVariance(const Vector& beta, double rho);

// n draws of X = √ρ·Z·𝟙 + √(1-ρ)·E. Throws unless ρ ∈ [0, 1).
Matrix SampleExchangeableGaussian(std::size_t n, int d, double rho, std::mt19937_64& rng);

// Y = Xᵀβ* + noise_sd·ε; split assignment drawn from the same seed.
Dataset GenerateExchangeableRegression(std::size_t n, int d, double rho,
                                       const Vector& beta_star, double noise_sd,
                                       std::uint64_t seed);

// Y ~ Bernoulli(σ(Xᵀβ*)).
Dataset GenerateExchangeableClassification(std::size_t n, int d, double rho,
                                           const Vector& beta_star, std::uint64_t seed);

// Appends columns (ρ/(1+ρ(p-1)))·X𝟙 + sqrt(max(0, 1 - ρ²p/(1+ρ(p-1))))·ε one
// at a time until the width is three times the original; p and ρ (mean
// off-diagonal sample correlation, 0 when p = 1) are recomputed each round.
Matrix AugmentSpurious(const Matrix& x, std::uint64_t seed);

// Mean off-diagonal entry of the sample correlation matrix.
double MeanOffDiagonalCorrelation(const Matrix& x);

struct IngestConfig {
  std::size_t max_rows = 10000;
  std::uint64_t seed = 0;
  std::string task = "regression";
};

// Comma-delimited with a header row. Non-numeric columns are dropped, rows
// with a missing value (empty, NA, NaN, ?) are excluded, the rest are
// subsampled to max_rows, split and standardized. Throws std::runtime_error
// when unreadable and std::invalid_argument on a missing or non-numeric
// target or when nothing survives filtering.
Dataset IngestCsv(const std::string& path, const std::string& target_column,
                  const IngestConfig& config);

// Columns x1..xd (or the feature names), y, split.
void WriteDatasetCsv(const Dataset& data, const std::string& path);
Dataset ReadDatasetCsv(const std::string& path);

// Parameters, split sizes and indices (1-based rows) and standardization.
nlohmann::json DatasetManifest(const Dataset& data);

}  // namespace semivalue

#endif  // SEMIVALUE_DATAGEN_H_
