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

#ifndef SEMIVALUE_MC_ESTIMATOR_H_
#define SEMIVALUE_MC_ESTIMATOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "semivalue/coalition.h"
#include "semivalue/core.h"

// Permutation sampling of every Δ_j(x_i), run as parallel chains and stopped
// by the Gelman-Rubin potential scale reduction.
namespace semivalue {

struct ConvergenceConfig {
  int n_chains = 10;
  double threshold = 1.005;
  int min_iterations = 20;
  int max_iterations = 5000;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument unless threshold > 1, n_chains >= 2 and
  // 1 <= min_iterations <= max_iterations.
  void Validate() const;
};

// Welford accumulator.
class RunningStats {
 public:
  void Add(double value);
  void Merge(const RunningStats& other);

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  // Unbiased sample variance; 0 with fewer than two samples.
  double variance() const;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline constexpr double kRhatDivergent = std::numeric_limits<double>::infinity();

// R̂ = sqrt(((n-1)/n · W + B/n) / W), with W the mean within-chain variance and
// B/n the variance of the chain means. Variances at or below zero_tolerance²
// count as zero: no spread at all gives 1, chains that disagree with no
// within-chain spread give kRhatDivergent. Otherwise clamped below at 1.
// Throws std::invalid_argument with fewer than 2 chains, fewer than 2 samples
// per chain, or unequal chain lengths.
double GelmanRubinStatistic(std::span<const RunningStats> chains,
                            double zero_tolerance = 0.0);
double GelmanRubinStatistic(const std::vector<std::vector<double>>& chains,
                            double zero_tolerance = 0.0);

// Counter-based generator: SplitMix64 seeded from a hash of its key.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 Keyed(std::uint64_t seed, std::uint64_t chain,
                          std::uint64_t iteration, std::uint64_t feature);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on [0, bound) without modulo bias.
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Uniform permutation of [d] \ {i}, shuffled by Fisher-Yates.
std::vector<int> RandomOrderExcluding(std::size_t d, int i, SplitMix64& rng);

struct McDiagnostics {
  int iterations = 0;  // per chain
  double max_rhat = kRhatDivergent;
  bool converged = false;
  double wall_time_seconds = 0.0;
  std::size_t samples_per_entry = 0;  // across all chains
  // Largest |Σ increments along ∅ ⊂ S_1 ⊂ ... ⊂ S_{d-1} ⊂ [d] - v([d])| over
  // every sampled walk, and how many walks ended off v([d]) bit-wise.
  double max_path_residual = 0.0;
  std::size_t endpoint_mismatches = 0;
  std::size_t walks = 0;
};

struct McResult {
  MarginalContributionMatrix estimate;
  McDiagnostics diagnostics;
};

// Algorithm: each outer iteration, each chain and each feature i draws one
// order of [d] \ {i}, walks its prefixes and records v(S ∪ {i}) - v(S) as a
// sample of Δ_{|S|+1}(x_i). After at least max(min_iterations, 2) iterations
// the run stops once max R̂ over all (i, j) falls below the threshold, or at
// max_iterations with converged = false. The estimate pools all chains.
McResult SampleMarginalContributions(const CoalitionProvider& provider,
                                     const Explicand& x,
                                     const ConvergenceConfig& config);

}  // namespace semivalue

#endif  // SEMIVALUE_MC_ESTIMATOR_H_
