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

#include "semivalue/gaussian_linear.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace semivalue {

namespace {

void CheckModel(const BlockGaussianSpec& spec, const LinearModel& model,
                const Explicand& x) {
  if (model.dim() != spec.dim() || x.dim() != spec.dim()) {
    throw std::invalid_argument(
        "dimension mismatch: spec d=" + std::to_string(spec.dim()) +
        ", model d=" + std::to_string(model.dim()) +
        ", explicand d=" + std::to_string(x.dim()));
  }
}

// ρ / (1 - ρ + ρ s): the weight of Σ x_S in E[X_k | X_S = x_S] for k outside
// S in the same exchangeable block, from the Sherman–Morrison inverse
// Σ_SS⁻¹ = (1-ρ)⁻¹ I - ρ / ((1-ρ)(1+ρ(s-1))) 𝟙𝟙ᵀ.
double ConditioningWeight(double rho, std::size_t observed) {
  return rho / (1.0 - rho + rho * static_cast<double>(observed));
}

// h_d(i, j)β restricted to one exchangeable block, without forming h_d.
Vector HTimesBeta(int d, double rho, int i, int j, const Vector& beta) {
  Vector out = Vector::Zero(d);
  out[i] = beta[i];
  if (d == 1) return out;

  const double dm1 = d - 1.0;
  const double a = rho / (1.0 + rho * (j - 1));
  const double b = rho / (1.0 - rho + rho * (j - 1));
  const double others = beta.sum() - beta[i];

  out[i] += a * (d - j) / dm1 * others;
  const double col = -b * (j - 1) / dm1 * beta[i];
  // (j-1)(d-j) vanishes at j ∈ {1, d}; this also keeps d = 2 finite.
  const double c4 = (j == 1 || j == d)
                        ? 0.0
                        : (a - b) * (j - 1.0) * (d - j) / (dm1 * (d - 2.0));
  for (int r = 0; r < d; ++r) {
    if (r == i) continue;
    out[r] += col + c4 * (others - beta[r]);
  }
  return out;
}

}  // namespace

BlockGaussianSpec::BlockGaussianSpec(std::vector<int> block_sizes,
                                     std::vector<double> block_correlations)
    : block_sizes_(std::move(block_sizes)), rhos_(std::move(block_correlations)) {
  if (block_sizes_.empty() || block_sizes_.size() != rhos_.size()) {
    throw std::invalid_argument(
        "block sizes and correlations must be nonempty and of equal length");
  }
  for (std::size_t b = 0; b < block_sizes_.size(); ++b) {
    if (block_sizes_[b] < 1) {
      throw std::invalid_argument("block sizes must be >= 1");
    }
    if (!(rhos_[b] >= 0.0 && rhos_[b] < 1.0)) {
      throw std::invalid_argument("block correlation must lie in [0, 1), got " +
                                  std::to_string(rhos_[b]));
    }
    starts_.push_back(dim_);
    for (int k = 0; k < block_sizes_[b]; ++k) block_of_.push_back(b);
    dim_ += static_cast<std::size_t>(block_sizes_[b]);
  }
  if (dim_ < 2) {
    throw std::invalid_argument("total dimension must be >= 2");
  }
}

BlockGaussianSpec BlockGaussianSpec::Exchangeable(int d, double rho) {
  return BlockGaussianSpec({d}, {rho});
}

Matrix BlockGaussianSpec::Covariance() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix sigma = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const auto s = static_cast<Eigen::Index>(starts_[b]);
    const auto n = static_cast<Eigen::Index>(block_sizes_[b]);
    sigma.block(s, s, n, n).setConstant(rhos_[b]);
    sigma.block(s, s, n, n).diagonal().setOnes();
  }
  return sigma;
}

double ConditionalExpectation(const BlockGaussianSpec& spec,
                              const LinearModel& model, const Explicand& x,
                              const FeatureSubset& s) {
  CheckModel(spec, model, x);
  if (s.dim() != spec.dim()) {
    throw std::invalid_argument("subset dimension mismatch");
  }
  if (s.size() == spec.dim()) return model.Predict(x.values());
  if (s.empty()) return model.intercept;

  const Vector& beta = model.coefficients;
  double value = model.intercept;
  for (std::size_t b = 0; b < spec.num_blocks(); ++b) {
    const std::size_t start = spec.block_start(b);
    const std::size_t end = start + static_cast<std::size_t>(spec.block_sizes()[b]);
    std::size_t observed = 0;
    double sum_x = 0.0;
    double direct = 0.0;
    double beta_hidden = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      if (s.contains(k)) {
        ++observed;
        sum_x += x[k];
        direct += x[k] * beta[static_cast<Eigen::Index>(k)];
      } else {
        beta_hidden += beta[static_cast<Eigen::Index>(k)];
      }
    }
    if (observed == 0) continue;  // E[X_block] = 0
    value += direct +
             ConditioningWeight(spec.block_correlations()[b], observed) * sum_x *
                 beta_hidden;
  }
  return value;
}

double CoalitionValue(const BlockGaussianSpec& spec, const LinearModel& model,
                      const Explicand& x, const FeatureSubset& s) {
  if (s.empty()) {
    CheckModel(spec, model, x);
    return 0.0;
  }
  return ConditionalExpectation(spec, model, x, s) - model.intercept;
}

Matrix HMatrix(int d, double rho, int i, int j) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (i < 0 || i >= d) {
    throw std::invalid_argument("feature index out of range");
  }
  if (j < 1 || j > d) {
    throw std::invalid_argument("coalition size j must lie in [1, d], got " +
                                std::to_string(j));
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1)");
  }
  Matrix h = Matrix::Zero(d, d);
  h(i, i) = 1.0;
  if (d == 1) return h;

  const double dm1 = d - 1.0;
  const double a = rho / (1.0 + rho * (j - 1));
  const double b = rho / (1.0 - rho + rho * (j - 1));
  const double c4 = (j == 1 || j == d)
                        ? 0.0
                        : (a - b) * (j - 1.0) * (d - j) / (dm1 * (d - 2.0));
  for (int r = 0; r < d; ++r) {
    if (r == i) continue;
    h(i, r) += a * (d - j) / dm1;   // e_i (𝟙 - e_i)ᵀ
    h(r, i) -= b * (j - 1) / dm1;   // (𝟙 - e_i) e_iᵀ
    for (int c = 0; c < d; ++c) {   // (𝟙-e_i)(𝟙-e_i)ᵀ - (I - e_i e_iᵀ)
      if (c == i || c == r) continue;
      h(r, c) += c4;
    }
  }
  return h;
}

namespace {

// Weight of h_{d_m}(i, k+1) in H(i, j): the hypergeometric probability that a
// uniform (j-1)-subset of the other d-1 features puts k of them in i's block.
double BlockMixingWeight(std::size_t d, std::size_t dm, std::size_t j,
                         std::size_t k) {
  const double log_w = LogBinomial(dm - 1.0, k) +
                       LogBinomial(double(d - dm), double(j - 1) - double(k)) -
                       LogBinomial(d - 1.0, j - 1.0);
  return std::exp(log_w);
}

// Valid k for the Vandermonde decomposition C(d-1, j-1) = Σ_k C(dm-1, k)
// C(d-dm, j-1-k).
std::pair<std::size_t, std::size_t> MixingRange(std::size_t d, std::size_t dm,
                                                std::size_t j) {
  const std::size_t outside = d - dm;
  const std::size_t lo = (j - 1 > outside) ? j - 1 - outside : 0;
  const std::size_t hi = std::min(dm - 1, j - 1);
  return {lo, hi};
}

}  // namespace

Matrix BigHMatrix(const BlockGaussianSpec& spec, int i, int j) {
  const std::size_t d = spec.dim();
  if (i < 0 || static_cast<std::size_t>(i) >= d) {
    throw std::invalid_argument("feature index out of range");
  }
  if (j < 1 || static_cast<std::size_t>(j) > d) {
    throw std::invalid_argument("coalition size j must lie in [1, d]");
  }
  const std::size_t m = spec.block_of(i);
  const std::size_t start = spec.block_start(m);
  const auto dm = static_cast<std::size_t>(spec.block_sizes()[m]);
  const int local = i - static_cast<int>(start);

  Matrix block = Matrix::Zero(dm, dm);
  const auto [lo, hi] = MixingRange(d, dm, j);
  for (std::size_t k = lo; k <= hi; ++k) {
    block += BlockMixingWeight(d, dm, j, k) *
             HMatrix(static_cast<int>(dm), spec.block_correlations()[m], local,
                     static_cast<int>(k + 1));
  }
  Matrix h = Matrix::Zero(d, d);
  h.block(start, start, dm, dm) = block;
  return h;
}

ExactContributionEngine::ExactContributionEngine(BlockGaussianSpec spec,
                                                 LinearModel model)
    : spec_(std::move(spec)), model_(std::move(model)) {
  const std::size_t d = spec_.dim();
  if (model_.dim() != d) {
    throw std::invalid_argument("model dimension does not match spec");
  }
  if (!model_.coefficients.allFinite() || !std::isfinite(model_.intercept)) {
    throw std::invalid_argument("model coefficients must be finite");
  }
  h_beta_.resize(d * d);
  for (std::size_t m = 0; m < spec_.num_blocks(); ++m) {
    const std::size_t start = spec_.block_start(m);
    const auto dm = static_cast<std::size_t>(spec_.block_sizes()[m]);
    const double rho = spec_.block_correlations()[m];
    const Vector beta_block = model_.coefficients.segment(start, dm);
    for (std::size_t local = 0; local < dm; ++local) {
      // h_{d_m}(i, k+1)β for every within-block coalition size.
      std::vector<Vector> within(dm);
      for (std::size_t k = 0; k < dm; ++k) {
        within[k] = HTimesBeta(static_cast<int>(dm), rho, static_cast<int>(local),
                               static_cast<int>(k + 1), beta_block);
      }
      const std::size_t i = start + local;
      for (std::size_t j = 1; j <= d; ++j) {
        Vector acc = Vector::Zero(dm);
        const auto [lo, hi] = MixingRange(d, dm, j);
        for (std::size_t k = lo; k <= hi; ++k) {
          acc += BlockMixingWeight(d, dm, j, k) * within[k];
        }
        h_beta_[i * d + (j - 1)] = std::move(acc);
      }
    }
  }
}

MarginalContributionMatrix ExactContributionEngine::Compute(
    const Explicand& x) const {
  CheckModel(spec_, model_, x);
  const std::size_t d = spec_.dim();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t m = spec_.block_of(i);
    const std::size_t start = spec_.block_start(m);
    const auto dm = static_cast<Eigen::Index>(spec_.block_sizes()[m]);
    const auto x_block = x.values().segment(start, dm);
    for (std::size_t j = 1; j <= d; ++j) {
      out(i, j - 1) = x_block.dot(HBeta(i, j));
    }
  }
  return MarginalContributionMatrix(std::move(out), ContributionSource::kExact);
}

MarginalContributionMatrix ExactMarginalContributions(
    const BlockGaussianSpec& spec, const LinearModel& model, const Explicand& x) {
  return ExactContributionEngine(spec, model).Compute(x);
}

MarginalContributionMatrix BruteForceMarginalContributions(
    const BlockGaussianSpec& spec, const LinearModel& model, const Explicand& x) {
  CheckModel(spec, model, x);
  const std::size_t d = spec.dim();
  if (d > kBruteForceMaxDim) {
    throw std::invalid_argument("brute-force enumeration limited to d <= " +
                                std::to_string(kBruteForceMaxDim));
  }
  const std::uint32_t n_subsets = 1u << d;
  std::vector<double> v(n_subsets);
  for (std::uint32_t bits = 0; bits < n_subsets; ++bits) {
    FeatureSubset s = FeatureSubset::Empty(d);
    for (std::size_t k = 0; k < d; ++k) {
      if (bits & (1u << k)) s.insert(k);
    }
    v[bits] = CoalitionValue(spec, model, x, s);
  }

  Matrix sums = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint32_t bit_i = 1u << i;
    for (std::uint32_t bits = 0; bits < n_subsets; ++bits) {
      if (bits & bit_i) continue;
      const int size = std::popcount(bits);
      sums(i, size) += v[bits | bit_i] - v[bits];
    }
  }
  for (std::size_t j = 1; j <= d; ++j) {
    sums.col(j - 1) /= Binomial(static_cast<int>(d - 1), static_cast<int>(j - 1));
  }
  return MarginalContributionMatrix(std::move(sums),
                                    ContributionSource::kBruteForce);
}

double TwoFeatureRecoveryError(const BlockGaussianSpec& spec,
                               const LinearModel& model, const Explicand& x,
                               int k) {
  if (spec.dim() != 2) {
    throw std::invalid_argument("two-feature recovery error requires d = 2");
  }
  if (k != 1 && k != 2) {
    throw std::invalid_argument("k must be 1 or 2");
  }
  const int observed[] = {k - 1};
  const FeatureSubset s = FeatureSubset::FromIndices(2, observed);
  return std::abs(model.Predict(x.values()) -
                  ConditionalExpectation(spec, model, x, s));
}

DisagreementRegion ShapleyDisagreementRegion(const BlockGaussianSpec& spec,
                                             const LinearModel& model,
                                             std::span<const Vector> grid) {
  if (spec.dim() != 2) {
    throw std::invalid_argument("disagreement region requires d = 2");
  }
  const ExactContributionEngine engine(spec, model);
  DisagreementRegion region;
  region.flags.reserve(grid.size());
  std::size_t disagreements = 0;
  for (const Vector& point : grid) {
    const Explicand x(point);
    const double e1 = TwoFeatureRecoveryError(spec, model, x, 1);
    const double e2 = TwoFeatureRecoveryError(spec, model, x, 2);
    const Vector shapley = engine.Compute(x).values().rowwise().mean();
    const int optimal = e1 < e2 ? 0 : 1;
    const int ranked = RankByMagnitude(shapley).front();
    region.optimal_first.push_back(optimal);
    region.shapley_first.push_back(ranked);
    region.e1_minus_e2.push_back(e1 - e2);

    const bool tie =
        std::abs(e1 - e2) <= kDisagreementTieTolerance ||
        std::abs(std::abs(shapley[0]) - std::abs(shapley[1])) <=
            kDisagreementTieTolerance;
    if (tie) {
      region.flags.push_back(DisagreementFlag::kTie);
      continue;
    }
    ++region.counted;
    if (optimal != ranked) {
      ++disagreements;
      region.flags.push_back(DisagreementFlag::kDisagree);
    } else {
      region.flags.push_back(DisagreementFlag::kAgree);
    }
  }
  region.fraction = region.counted == 0
                        ? 0.0
                        : static_cast<double>(disagreements) /
                              static_cast<double>(region.counted);
  return region;
}

std::vector<Vector> SquareGrid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("grid needs step > 0 and hi >= lo");
  }
  const auto n = static_cast<long>(std::lround((hi - lo) / step)) + 1;
  std::vector<Vector> grid;
  grid.reserve(static_cast<std::size_t>(n * n));
  for (long a = 0; a < n; ++a) {
    for (long b = 0; b < n; ++b) {
      Vector p(2);
      p << lo + static_cast<double>(a) * step, lo + static_cast<double>(b) * step;
      grid.push_back(std::move(p));
    }
  }
  return grid;
}

}  // namespace semivalue
