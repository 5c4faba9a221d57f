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

#ifndef SEMIVALUE_GAUSSIAN_LINEAR_H_
#define SEMIVALUE_GAUSSIAN_LINEAR_H_

#include <cstddef>
#include <span>
#include <vector>

#include "semivalue/core.h"

// Closed-form marginal contributions for a linear model f̂(x) = β̂₀ + xᵀβ̂ under
// X ~ N(0, Σ) with Σ block diagonal, each block an exchangeable correlation
// matrix (1-ρ_b) I + ρ_b 𝟙𝟙ᵀ.
namespace semivalue {

class BlockGaussianSpec {
 public:
  // Throws std::invalid_argument unless every block size is >= 1, every
  // ρ_b lies in [0, 1) and the total dimension is >= 2.
  BlockGaussianSpec(std::vector<int> block_sizes,
                    std::vector<double> block_correlations);

  // A single exchangeable block.
  static BlockGaussianSpec Exchangeable(int d, double rho);

  std::size_t dim() const { return dim_; }
  std::size_t num_blocks() const { return block_sizes_.size(); }
  const std::vector<int>& block_sizes() const { return block_sizes_; }
  const std::vector<double>& block_correlations() const { return rhos_; }

  std::size_t block_of(std::size_t feature) const { return block_of_.at(feature); }
  std::size_t block_start(std::size_t block) const { return starts_.at(block); }

  // Dense Σ, for oracles and sampling checks.
  Matrix Covariance() const;

 private:
  std::vector<int> block_sizes_;
  std::vector<double> rhos_;
  std::vector<std::size_t> starts_;
  std::vector<std::size_t> block_of_;
  std::size_t dim_ = 0;
};

struct LinearModel {
  double intercept = 0.0;
  Vector coefficients;

  std::size_t dim() const { return static_cast<std::size_t>(coefficients.size()); }
  double Predict(const Vector& x) const { return intercept + x.dot(coefficients); }
};

// E[f̂(x_S, X_{[d]\S}) | X_S = x_S]. Returns β̂₀ for S = ∅ and f̂(x) for S = [d].
double ConditionalExpectation(const BlockGaussianSpec& spec,
                              const LinearModel& model, const Explicand& x,
                              const FeatureSubset& s);

// v(S) = E[f̂ | X_S = x_S] - E[f̂(X)], with v(∅) = 0 exactly.
double CoalitionValue(const BlockGaussianSpec& spec, const LinearModel& model,
                      const Explicand& x, const FeatureSubset& s);

// h_d(i, j) for a single exchangeable block: Δ_j(x_i) = xᵀ h_d(i, j) β̂.
// `i` is 0-based, `j` in [1, d]. Throws std::invalid_argument otherwise.
Matrix HMatrix(int d, double rho, int i, int j);

// H(i, j) for the block-diagonal spec; zero outside the block holding i.
Matrix BigHMatrix(const BlockGaussianSpec& spec, int i, int j);

// Precomputes H(i, j)β̂ for every (i, j) once per (spec, model), storing only
// the block-local part; each explicand then costs one length-d_m dot product
// per entry.
class ExactContributionEngine {
 public:
  ExactContributionEngine(BlockGaussianSpec spec, LinearModel model);

  const BlockGaussianSpec& spec() const { return spec_; }
  const LinearModel& model() const { return model_; }

  MarginalContributionMatrix Compute(const Explicand& x) const;

  // Block-local part of H(i, j)β̂ (length d_m of i's block).
  const Vector& HBeta(std::size_t i, std::size_t j) const {
    return h_beta_[i * spec_.dim() + (j - 1)];
  }

 private:
  BlockGaussianSpec spec_;
  LinearModel model_;
  std::vector<Vector> h_beta_;
};

MarginalContributionMatrix ExactMarginalContributions(
    const BlockGaussianSpec& spec, const LinearModel& model, const Explicand& x);

inline constexpr std::size_t kBruteForceMaxDim = 20;

// Direct average of v(S ∪ {i}) - v(S) over every S of each size. Throws
// std::invalid_argument for d > kBruteForceMaxDim.
MarginalContributionMatrix BruteForceMarginalContributions(
    const BlockGaussianSpec& spec, const LinearModel& model, const Explicand& x);

// E(k) = |f̂(x) - E[f̂ | X_k = x_k]| for d = 2; `k` is 1 or 2.
double TwoFeatureRecoveryError(const BlockGaussianSpec& spec,
                               const LinearModel& model, const Explicand& x,
                               int k);

enum class DisagreementFlag { kAgree, kDisagree, kTie };

struct DisagreementRegion {
  double fraction = 0.0;                // disagreements / non-tied points
  std::size_t counted = 0;              // non-tied points
  std::vector<DisagreementFlag> flags;  // one per grid point
  std::vector<int> optimal_first;       // argmin_k E(k), 0-based
  std::vector<int> shapley_first;       // 0-based
  std::vector<double> e1_minus_e2;
};

inline constexpr double kDisagreementTieTolerance = 1e-12;

// For d = 2, compares the AUP-optimal first feature with the one ranked first
// by the exact Shapley value at every grid point.
DisagreementRegion ShapleyDisagreementRegion(const BlockGaussianSpec& spec,
                                             const LinearModel& model,
                                             std::span<const Vector> grid);

// Square grid [lo, hi]² with the given step, x₁ varying slowest.
std::vector<Vector> SquareGrid(double lo, double hi, double step);

}  // namespace semivalue

#endif  // SEMIVALUE_GAUSSIAN_LINEAR_H_
