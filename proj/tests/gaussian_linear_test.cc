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
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace semivalue {
namespace {

// Independent reference: general Gaussian conditioning on a dense Σ,
// E[X_T | X_S = x_S] = Σ_TS Σ_SS⁻¹ x_S.
double OracleConditional(const Matrix& sigma, const LinearModel& model, const Vector& x,
                         const std::vector<int>& s) {
  const int d = static_cast<int>(x.size());
  std::vector<int> t;
  std::vector<bool> in(d, false);
  for (int i : s) in[i] = true;
  for (int i = 0; i < d; ++i) {
    if (!in[i]) t.push_back(i);
  }
  double value = model.intercept;
  for (int i : s) value += model.coefficients[i] * x[i];
  if (s.empty() || t.empty()) {
    if (s.empty()) return model.intercept;
    return value;
  }
  Matrix sss(s.size(), s.size()), sts(t.size(), s.size());
  Vector xs(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    xs[a] = x[s[a]];
    for (std::size_t b = 0; b < s.size(); ++b) sss(a, b) = sigma(s[a], s[b]);
    for (std::size_t b = 0; b < t.size(); ++b) sts(b, a) = sigma(t[b], s[a]);
  }
  const Vector mean_t = sts * sss.fullPivLu().solve(xs);
  for (std::size_t b = 0; b < t.size(); ++b) value += model.coefficients[t[b]] * mean_t[b];
  return value;
}

// Δ_j(x_i) by enumerating subsets with the oracle conditional expectation.
Matrix OracleContributions(const Matrix& sigma, const LinearModel& model, const Vector& x) {
  const int d = static_cast<int>(x.size());
  Matrix out = Matrix::Zero(d, d);
  Matrix counts = Matrix::Zero(d, d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::vector<int> s;
    for (int k = 0; k < d; ++k) {
      if (mask & (1u << k)) s.push_back(k);
    }
    const double without = OracleConditional(sigma, model, x, s);
    for (int i = 0; i < d; ++i) {
      if (mask & (1u << i)) continue;
      std::vector<int> si = s;
      si.push_back(i);
      std::sort(si.begin(), si.end());
      out(i, s.size()) += OracleConditional(sigma, model, x, si) - without;
      counts(i, s.size()) += 1.0;
    }
  }
  return out.cwiseQuotient(counts);
}

struct Instance {
  BlockGaussianSpec spec;
  LinearModel model;
  Vector x;
};

Instance RandomInstance(std::mt19937_64& rng, int d, int blocks) {
  std::uniform_real_distribution<double> rho(0.0, 0.95), coef(-2.0, 2.0);
  std::normal_distribution<double> normal;
  std::vector<int> sizes(blocks, 1);
  for (int extra = d - blocks; extra > 0; --extra) {
    ++sizes[std::uniform_int_distribution<int>(0, blocks - 1)(rng)];
  }
  std::vector<double> rhos;
  for (int b = 0; b < blocks; ++b) rhos.push_back(rho(rng));
  LinearModel model{coef(rng), Vector(d)};
  Vector x(d);
  for (int i = 0; i < d; ++i) {
    model.coefficients[i] = coef(rng);
    x[i] = normal(rng);
  }
  return {BlockGaussianSpec(sizes, rhos), model, x};
}

TEST(BlockGaussianSpecTest, Validation) {
  EXPECT_THROW(BlockGaussianSpec({2}, {1.0}), std::invalid_argument);
  EXPECT_THROW(BlockGaussianSpec({2}, {-0.1}), std::invalid_argument);
  EXPECT_THROW(BlockGaussianSpec({0, 2}, {0.1, 0.1}), std::invalid_argument);
  EXPECT_THROW(BlockGaussianSpec({1}, {0.1}), std::invalid_argument);
  EXPECT_THROW(BlockGaussianSpec({2, 2}, {0.1}), std::invalid_argument);
  EXPECT_NO_THROW(BlockGaussianSpec({1, 1}, {0.0, 0.5}));
}

TEST(BlockGaussianSpecTest, CovarianceIsBlockExchangeable) {
  const BlockGaussianSpec spec({2, 3}, {0.3, 0.7});
  const Matrix sigma = spec.Covariance();
  EXPECT_EQ(sigma(0, 0), 1.0);
  EXPECT_EQ(sigma(0, 1), 0.3);
  EXPECT_EQ(sigma(2, 4), 0.7);
  EXPECT_EQ(sigma(1, 2), 0.0);
  EXPECT_EQ(spec.block_of(3), 1u);
  EXPECT_EQ(spec.block_start(1), 2u);
}

TEST(ConditionalExpectationTest, MatchesGeneralConditioning) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + trial % 7;
    const Instance in = RandomInstance(rng, d, 1 + trial % std::min(3, d));
    const Matrix sigma = in.spec.Covariance();
    for (unsigned mask = 0; mask < (1u << d); mask += 1 + trial % 3) {
      std::vector<int> s;
      for (int k = 0; k < d; ++k) {
        if (mask & (1u << k)) s.push_back(k);
      }
      const double got = ConditionalExpectation(in.spec, in.model, Explicand(in.x),
                                                FeatureSubset::FromIndices(d, s));
      EXPECT_NEAR(got, OracleConditional(sigma, in.model, in.x, s), 1e-10);
    }
  }
}

TEST(ConditionalExpectationTest, Endpoints) {
  const Instance in = [] {
    std::mt19937_64 rng(2);
    return RandomInstance(rng, 5, 2);
  }();
  const Explicand x(in.x);
  EXPECT_EQ(ConditionalExpectation(in.spec, in.model, x, FeatureSubset::Empty(5)),
            in.model.intercept);
  EXPECT_NEAR(ConditionalExpectation(in.spec, in.model, x, FeatureSubset::Full(5)),
              in.model.Predict(in.x), 1e-12);
  EXPECT_EQ(CoalitionValue(in.spec, in.model, x, FeatureSubset::Empty(5)), 0.0);
}

TEST(ExactContributionsTest, MatchEnumerationOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + trial % 7;
    const Instance in = RandomInstance(rng, d, 1 + trial % std::min(3, d));
    const Matrix oracle = OracleContributions(in.spec.Covariance(), in.model, in.x);
    const Matrix exact = ExactMarginalContributions(in.spec, in.model, Explicand(in.x)).values();
    const Matrix brute =
        BruteForceMarginalContributions(in.spec, in.model, Explicand(in.x)).values();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        EXPECT_LT(RelativeDifference(exact(i, j), oracle(i, j)), 1e-9) << trial;
        EXPECT_LT(RelativeDifference(brute(i, j), oracle(i, j)), 1e-9) << trial;
      }
    }
  }
}

TEST(ExactContributionsTest, ShapleyEfficiency) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 7;
    const Instance in = RandomInstance(rng, d, 1 + trial % std::min(3, d));
    const Matrix exact = ExactMarginalContributions(in.spec, in.model, Explicand(in.x)).values();
    EXPECT_NEAR(exact.rowwise().mean().sum(), in.model.Predict(in.x) - in.model.intercept,
                1e-9);
  }
}

TEST(HMatrixTest, ReproducesSingleBlockContributions) {
  std::mt19937_64 rng(13);
  for (int d : {2, 3, 6}) {
    const Instance in = RandomInstance(rng, d, 1);
    const double rho = in.spec.block_correlations()[0];
    const Matrix oracle = OracleContributions(in.spec.Covariance(), in.model, in.x);
    for (int i = 0; i < d; ++i) {
      for (int j = 1; j <= d; ++j) {
        const double via_h = in.x.dot(HMatrix(d, rho, i, j) * in.model.coefficients);
        EXPECT_NEAR(via_h, oracle(i, j - 1), 1e-10 * (1.0 + std::abs(oracle(i, j - 1))));
      }
    }
  }
  EXPECT_THROW(HMatrix(3, 0.5, 3, 1), std::invalid_argument);
  EXPECT_THROW(HMatrix(3, 0.5, 0, 0), std::invalid_argument);
  EXPECT_THROW(HMatrix(3, 0.5, 0, 4), std::invalid_argument);
}

TEST(HMatrixTest, BigHIsZeroOutsideTheBlock) {
  const BlockGaussianSpec spec({2, 3}, {0.4, 0.6});
  const Matrix h = BigHMatrix(spec, 3, 2);
  EXPECT_EQ(h.rows(), 5);
  EXPECT_EQ(h.block(0, 0, 2, 5).norm(), 0.0);
  EXPECT_EQ(h.block(0, 0, 5, 2).norm(), 0.0);
  EXPECT_GT(h.block(2, 2, 3, 3).norm(), 0.0);
}

TEST(ExactContributionsTest, IndependentFeaturesGiveConstantContributions) {
  const BlockGaussianSpec spec({4}, {0.0});
  Vector beta(4), x(4);
  beta << 1, -2, 3, 0.5;
  x << 0.3, -1.2, 2.0, 0.7;
  const Matrix m = ExactMarginalContributions(spec, {0.4, beta}, Explicand(x)).values();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(m(i, j), beta[i] * x[i], 1e-12);
  }
}

TEST(BruteForceTest, RejectsLargeDimension) {
  const BlockGaussianSpec spec = BlockGaussianSpec::Exchangeable(21, 0.1);
  EXPECT_THROW(BruteForceMarginalContributions(spec, {0.0, Vector::Ones(21)},
                                               Explicand(Vector::Ones(21))),
               std::invalid_argument);
}

TEST(TwoFeatureTest, RecoveryErrorClosedForm) {
  const double rho = 0.6;
  const BlockGaussianSpec spec = BlockGaussianSpec::Exchangeable(2, rho);
  const LinearModel model{0.0, (Vector(2) << 1.5, 1.0).finished()};
  const Vector x = (Vector(2) << 0.7, -1.1).finished();
  EXPECT_NEAR(TwoFeatureRecoveryError(spec, model, Explicand(x), 1),
              std::abs(1.0 * (x[1] - rho * x[0])), 1e-12);
  EXPECT_NEAR(TwoFeatureRecoveryError(spec, model, Explicand(x), 2),
              std::abs(1.5 * (x[0] - rho * x[1])), 1e-12);
}

TEST(DisagreementTest, AgreesWithDirectComparison) {
  const double rho = 0.6, b1 = 1.5, b2 = 1.0;
  const BlockGaussianSpec spec = BlockGaussianSpec::Exchangeable(2, rho);
  const LinearModel model{0.0, (Vector(2) << b1, b2).finished()};
  const std::vector<Vector> grid = SquareGrid(-2.0, 2.0, 0.1);
  ASSERT_EQ(grid.size(), 41u * 41u);
  EXPECT_EQ(grid[1][0], -2.0);  // x₁ varies slowest
  const DisagreementRegion r = ShapleyDisagreementRegion(spec, model, grid);
  std::size_t checked = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x1 = grid[g][0], x2 = grid[g][1];
    const double v1 = b1 * x1 + b2 * rho * x1, v2 = b2 * x2 + b1 * rho * x2;
    const double full = b1 * x1 + b2 * x2;
    const double phi1 = 0.5 * (v1 + full - v2), phi2 = 0.5 * (v2 + full - v1);
    const double e1 = std::abs(full - v1), e2 = std::abs(full - v2);
    if (std::abs(e1 - e2) < 1e-9 || std::abs(std::abs(phi1) - std::abs(phi2)) < 1e-9) continue;
    ++checked;
    const bool disagree = (e1 < e2) != (std::abs(phi1) > std::abs(phi2));
    EXPECT_EQ(r.flags[g], disagree ? DisagreementFlag::kDisagree : DisagreementFlag::kAgree);
  }
  EXPECT_GT(checked, grid.size() / 2);
}

}  // namespace
}  // namespace semivalue
