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

#include "semivalue/mc_estimator.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace semivalue {

void ConvergenceConfig::Validate() const {
  if (!(threshold > 1.0)) throw std::invalid_argument("threshold must exceed 1");
  if (n_chains < 2) throw std::invalid_argument("n_chains must be at least 2");
  if (min_iterations < 1 || max_iterations < min_iterations) {
    throw std::invalid_argument("need 1 <= min_iterations <= max_iterations");
  }
}

void RunningStats::Add(double value) {
  ++count_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);
}

void RunningStats::Merge(const RunningStats& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count_);
  const double n_b = static_cast<double>(other.count_);
  const double delta = other.mean_ - mean_;
  // Written as an update so equal means stay bit-identical.
  mean_ += delta * n_b / (n_a + n_b);
  m2_ += other.m2_ + delta * delta * n_a * n_b / (n_a + n_b);
  count_ += other.count_;
}

double RunningStats::variance() const {
  return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

double GelmanRubinStatistic(std::span<const RunningStats> chains, double zero_tolerance) {
  if (chains.size() < 2) throw std::invalid_argument("R-hat needs at least 2 chains");
  const std::size_t n = chains[0].count();
  if (n < 2) throw std::invalid_argument("R-hat needs at least 2 samples per chain");
  const auto m = static_cast<double>(chains.size());
  double within = 0.0;
  double grand = 0.0;
  for (const RunningStats& c : chains) {
    if (c.count() != n) throw std::invalid_argument("chains must have equal lengths");
    within += c.variance();
    grand += c.mean();
  }
  within /= m;
  grand /= m;
  double between = 0.0;  // B / n
  for (const RunningStats& c : chains) between += (c.mean() - grand) * (c.mean() - grand);
  between /= m - 1.0;

  const double floor = zero_tolerance * zero_tolerance;
  if (within <= floor) return between <= floor ? 1.0 : kRhatDivergent;
  const double nn = static_cast<double>(n);
  const double rhat = std::sqrt(((nn - 1.0) / nn * within + between) / within);
  return std::max(rhat, 1.0);
}

double GelmanRubinStatistic(const std::vector<std::vector<double>>& chains,
                            double zero_tolerance) {
  std::vector<RunningStats> stats(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (double v : chains[c]) stats[c].Add(v);
  }
  return GelmanRubinStatistic(std::span<const RunningStats>(stats), zero_tolerance);
}

namespace {

std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64 SplitMix64::Keyed(std::uint64_t seed, std::uint64_t chain,
                             std::uint64_t iteration, std::uint64_t feature) {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = Mix(seed + kGolden);
  h = Mix(h ^ (chain + kGolden));
  h = Mix(h ^ (iteration + 2 * kGolden));
  h = Mix(h ^ (feature + 3 * kGolden));
  return SplitMix64(h);
}

SplitMix64::result_type SplitMix64::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return Mix(state_);
}

std::uint64_t SplitMix64::Below(std::uint64_t bound) {
  // Rejection on the top of the range.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r;
  do {
    r = (*this)();
  } while (r >= limit);
  return r % bound;
}

std::vector<int> RandomOrderExcluding(std::size_t d, int i, SplitMix64& rng) {
  std::vector<int> order;
  order.reserve(d - 1);
  for (int k = 0; k < static_cast<int>(d); ++k) {
    if (k != i) order.push_back(k);
  }
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[rng.Below(k)]);
  }
  return order;
}

McResult SampleMarginalContributions(const CoalitionProvider& provider,
                                     const Explicand& x,
                                     const ConvergenceConfig& config) {
  config.Validate();
  const std::size_t d = provider.dim();
  if (x.dim() != d) {
    throw std::invalid_argument("explicand dimension does not match provider");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto chains = static_cast<std::size_t>(config.n_chains);
  const std::size_t entries = d * d;

  // stats[c * d² + i * d + j]
  std::vector<RunningStats> stats(chains * entries);
  std::vector<RunningStats> per_entry(chains);
  Matrix with_i;
  Matrix without_i;
  std::vector<std::vector<int>> orders(d);
  const double v_full = provider.Evaluate(x, FeatureSubset::Full(d));

  McDiagnostics diag;
  double max_abs_sample = std::abs(v_full);
  const int check_from = std::max(config.min_iterations, 2);

  for (int t = 1; t <= config.max_iterations; ++t) {
    for (std::size_t c = 0; c < chains; ++c) {
      for (std::size_t i = 0; i < d; ++i) {
        SplitMix64 rng = SplitMix64::Keyed(config.seed, c, static_cast<std::uint64_t>(t), i);
        orders[i] = RandomOrderExcluding(d, static_cast<int>(i), rng);
      }
      provider.EvaluateWalks(x, orders, with_i, without_i);
      max_abs_sample = std::max(max_abs_sample, with_i.cwiseAbs().maxCoeff());

      for (std::size_t i = 0; i < d; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        RunningStats* row = &stats[c * entries + i * d];
        double path = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const auto col = static_cast<Eigen::Index>(j);
          row[j].Add(with_i(r, col) - without_i(r, col));
          if (j > 0) path += without_i(r, col) - without_i(r, col - 1);
        }
        const auto last = static_cast<Eigen::Index>(d - 1);
        path += with_i(r, last) - without_i(r, last);
        diag.max_path_residual = std::max(diag.max_path_residual, std::abs(path - v_full));
        if (with_i(r, last) != v_full) ++diag.endpoint_mismatches;
        ++diag.walks;
      }
    }
    diag.iterations = t;
    if (t < check_from) continue;

    const double tolerance = 1e-12 * (1.0 + max_abs_sample);
    double max_rhat = 1.0;
    for (std::size_t e = 0; e < entries && max_rhat < config.threshold; ++e) {
      for (std::size_t c = 0; c < chains; ++c) per_entry[c] = stats[c * entries + e];
      max_rhat = std::max(max_rhat, GelmanRubinStatistic(per_entry, tolerance));
    }
    diag.max_rhat = max_rhat;
    if (max_rhat < config.threshold) {
      diag.converged = true;
      break;
    }
  }
  if (diag.iterations < check_from) {
    // Too few iterations for the statistic; report on whatever is there.
    diag.max_rhat = kRhatDivergent;
  }

  Matrix estimate(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      RunningStats pooled;
      for (std::size_t c = 0; c < chains; ++c) pooled.Merge(stats[c * entries + i * d + j]);
      estimate(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pooled.mean();
    }
  }
  diag.samples_per_entry = chains * static_cast<std::size_t>(diag.iterations);
  diag.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {MarginalContributionMatrix(std::move(estimate), ContributionSource::kSampled),
          diag};
}

}  // namespace semivalue
