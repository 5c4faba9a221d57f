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


#include "semivalue/coalition.h"

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "semivalue/gaussian_linear.h"
#include "semivalue/surrogate.h"

namespace semivalue {
namespace {

LinearModel Model(int d) {
  Vector beta(d);
  for (int i = 0; i < d; ++i) beta[i] = 1.0 - 0.3 * i;
  return {0.25, beta};
}

Vector Point(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(d);
  for (int i = 0; i < d; ++i) x[i] = normal(rng);
  return x;
}

std::shared_ptr<const MaskedSurrogate> RandomSurrogate(int d) {
  return std::make_shared<const MaskedSurrogate>(d, SurrogateTask::kRegression, 16, 4);
}

TEST(ProviderTest, EmptyCoalitionIsExactlyZero) {
  const int d = 4;
  const Explicand x(Point(d, 1));
  const LinearModel m = Model(d);
  ExactGaussianProvider exact(BlockGaussianSpec::Exchangeable(d, 0.5), m);
  SurrogateProvider surrogate(RandomSurrogate(d), 0.123);
  MeanMaskedProvider masked([m](const Vector& v) { return m.Predict(v); },
                            Vector::Constant(d, 0.2));
  for (const CoalitionProvider* p :
       std::vector<const CoalitionProvider*>{&exact, &surrogate, &masked}) {
    EXPECT_EQ(p->Evaluate(x, FeatureSubset::Empty(d)), 0.0) << ToString(p->kind());
  }
}

TEST(ProviderTest, ExactProviderMatchesClosedForm) {
  const int d = 5;
  const BlockGaussianSpec spec = BlockGaussianSpec::Exchangeable(d, 0.3);
  const LinearModel m = Model(d);
  ExactGaussianProvider p(spec, m);
  const Explicand x(Point(d, 2));
  const std::vector<int> idx = {1, 3};
  const FeatureSubset s = FeatureSubset::FromIndices(d, idx);
  EXPECT_EQ(p.Evaluate(x, s), CoalitionValue(spec, m, x, s));
  EXPECT_EQ(p.grand_mean(), m.intercept);
  EXPECT_NEAR(p.Evaluate(x, FeatureSubset::Full(d)), m.Predict(x.values()) - m.intercept,
              1e-12);
}

TEST(ProviderTest, MeanMaskedReplacesMissingWithMeans) {
  const int d = 3;
  const LinearModel m = Model(d);
  const Vector mu = (Vector(3) << 1.0, 2.0, 3.0).finished();
  MeanMaskedProvider p([m](const Vector& v) { return m.Predict(v); }, mu);
  const Explicand x((Vector(3) << -1.0, 0.5, 4.0).finished());
  const std::vector<int> idx = {0, 2};
  const FeatureSubset s = FeatureSubset::FromIndices(d, idx);
  const Vector filled = (Vector(3) << -1.0, 2.0, 4.0).finished();
  EXPECT_DOUBLE_EQ(p.Evaluate(x, s), m.Predict(filled) - m.Predict(mu));
  EXPECT_DOUBLE_EQ(MeanMaskedPrediction([m](const Vector& v) { return m.Predict(v); }, x, s, mu),
                   m.Predict(filled));
}

TEST(ProviderTest, SurrogateSubtractsBackgroundMean) {
  const int d = 3;
  auto net = RandomSurrogate(d);
  SurrogateProvider p(net, 0.75);
  const Explicand x(Point(d, 3));
  const std::vector<int> idx = {2};
  const FeatureSubset s = FeatureSubset::FromIndices(d, idx);
  EXPECT_DOUBLE_EQ(p.Evaluate(x, s), net->Predict(x.values(), s) - 0.75);
  EXPECT_EQ(p.dim(), 3u);
}

TEST(ProviderTest, DimensionMismatchThrows) {
  ExactGaussianProvider p(BlockGaussianSpec::Exchangeable(3, 0.2), Model(3));
  EXPECT_THROW(p.Evaluate(Explicand(Point(4, 1)), FeatureSubset::Full(4)),
               std::invalid_argument);
}

void CheckWalks(const CoalitionProvider& p, int d, double tol) {
  const Explicand x(Point(d, 9));
  std::mt19937_64 rng(1);
  std::vector<std::vector<int>> orders(d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      if (k != i) orders[i].push_back(k);
    }
    std::shuffle(orders[i].begin(), orders[i].end(), rng);
  }
  Matrix with_i(d, d), without_i(d, d);
  p.EvaluateWalks(x, orders, with_i, without_i);
  for (int i = 0; i < d; ++i) {
    std::vector<double> w(d), wo(d);
    p.EvaluateWalk(x, i, orders[i], w, wo);
    FeatureSubset s = FeatureSubset::Empty(d);
    for (int j = 0; j < d; ++j) {
      EXPECT_NEAR(wo[j], p.Evaluate(x, s), tol);
      EXPECT_NEAR(w[j], p.Evaluate(x, s.With(i)), tol);
      EXPECT_NEAR(with_i(i, j), w[j], tol);
      EXPECT_NEAR(without_i(i, j), wo[j], tol);
      if (j + 1 < d) s.insert(orders[i][j]);
    }
    EXPECT_EQ(wo[0], 0.0);
  }
}

TEST(ProviderTest, WalksMatchPointEvaluations) {
  const int d = 6;
  CheckWalks(ExactGaussianProvider(BlockGaussianSpec::Exchangeable(d, 0.4), Model(d)), d, 1e-12);
  CheckWalks(SurrogateProvider(RandomSurrogate(d), 0.1), d, 1e-12);
  const LinearModel m = Model(d);
  CheckWalks(MeanMaskedProvider([m](const Vector& v) { return m.Predict(v); },
                                Vector::Constant(d, -0.5)),
             d, 1e-12);
}

TEST(ProviderTest, BatchMatchesSingleEvaluations) {
  const int d = 4;
  ExactGaussianProvider p(BlockGaussianSpec::Exchangeable(d, 0.4), Model(d));
  const Explicand x(Point(d, 5));
  std::vector<FeatureSubset> subsets;
  for (unsigned mask = 0; mask < 16; ++mask) {
    std::vector<int> idx;
    for (int k = 0; k < d; ++k) {
      if (mask & (1u << k)) idx.push_back(k);
    }
    subsets.push_back(FeatureSubset::FromIndices(d, idx));
  }
  std::vector<double> out(subsets.size());
  p.EvaluateBatch(x, subsets, out);
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    EXPECT_EQ(out[k], p.Evaluate(x, subsets[k]));
  }
}

}  // namespace
}  // namespace semivalue
