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


#include "semivalue/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "semivalue/gaussian_linear.h"

namespace semivalue {
namespace {

struct LinearCase {
  BlockGaussianSpec spec = BlockGaussianSpec::Exchangeable(5, 0.5);
  LinearModel model{0.7, (Vector(5) << 1.0, -0.5, 2.0, 0.1, -1.2).finished()};
  ExactGaussianProvider provider{spec, model};
  PredictFn predictor = [m = model](const Vector& v) { return m.Predict(v); };

  Explicand Point(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector x(5);
    for (int i = 0; i < 5; ++i) x[i] = normal(rng);
    return Explicand(x);
  }
};

FeatureSubset Prefix(const std::vector<int>& order, std::size_t k, std::size_t d) {
  FeatureSubset s = FeatureSubset::Empty(d);
  for (std::size_t m = 0; m < k; ++m) s.insert(order[m]);
  return s;
}

TEST(AupTest, MatchesDirectSum) {
  const LinearCase s;
  const Explicand x = s.Point(1);
  const Vector phi = (Vector(5) << 0.1, -3.0, 0.5, 2.0, 0.0).finished();
  const std::vector<int> order = {1, 3, 2, 0, 4};
  const double full = s.model.Predict(x.values());
  double area = 0.0, excl = 0.0, masked = 0.0;
  const Vector mu = Vector::Constant(5, 0.3);
  for (std::size_t k = 1; k <= 5; ++k) {
    const FeatureSubset in = Prefix(order, k, 5);
    area += std::abs(full - ConditionalExpectation(s.spec, s.model, x, in));
    excl += std::abs(full - ConditionalExpectation(s.spec, s.model, x, in.Complement()));
    masked += std::abs(full - MeanMaskedPrediction(s.predictor, x, in, mu));
  }
  const CurveResult r = Aup(phi, x, s.provider, full);
  EXPECT_NEAR(r.area, area, 1e-12);
  ASSERT_EQ(r.curve.points.size(), 6);
  EXPECT_NEAR(r.curve.points[0], std::abs(full - s.model.intercept), 1e-12);
  EXPECT_NEAR(r.curve.points[5], 0.0, 1e-12);
  EXPECT_NEAR(ExclusionAup(phi, x, s.provider, full).area, excl, 1e-12);
  EXPECT_NEAR(MaskedInclusionAup(phi, x, s.predictor, mu).area, masked, 1e-12);
}

TEST(OptimalAupTest, EqualsMinimumOverAllOrders) {
  const LinearCase s;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Explicand x = s.Point(seed);
    const double full = s.model.Predict(x.values());
    std::vector<int> order = {0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      Vector phi(5);
      for (int r = 0; r < 5; ++r) phi[order[r]] = 5.0 - r;
      best = std::min(best, Aup(phi, x, s.provider, full).area);
    } while (std::next_permutation(order.begin(), order.end()));
    EXPECT_NEAR(OptimalAup(x, s.provider, full), best, 1e-12);
  }
  const BlockGaussianSpec big = BlockGaussianSpec::Exchangeable(17, 0.1);
  const ExactGaussianProvider p(big, {0.0, Vector::Ones(17)});
  EXPECT_THROW(OptimalAup(Explicand(Vector::Ones(17)), p, 17.0), std::invalid_argument);
}

double PairwiseAuc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (y[a] == 1.0 && y[b] == 0.0) {
        pairs += 1.0;
        wins += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

TEST(RocAucTest, MatchesPairCounting) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(40), y(40);
    for (std::size_t k = 0; k < s.size(); ++k) {
      y[k] = k % 3 == 0 ? 1.0 : 0.0;
      s[k] = static_cast<double>(rng() % 7) + 0.5 * y[k];  // plenty of ties
    }
    EXPECT_NEAR(RocAuc(s, y), PairwiseAuc(s, y), 1e-12);
  }
  const std::vector<double> s = {0.1, 0.2}, one = {1.0, 1.0}, bad = {0.0, 2.0};
  EXPECT_THROW(RocAuc(s, one), std::invalid_argument);
  EXPECT_THROW(RocAuc(s, bad), std::invalid_argument);
}

TEST(PerformanceCurveTest, EndpointsAndMaskedStart) {
  const LinearCase s;
  std::vector<Explicand> rows;
  std::vector<double> labels;
  std::vector<std::vector<int>> rankings;
  for (std::uint64_t k = 0; k < 30; ++k) {
    rows.push_back(s.Point(k + 50));
    labels.push_back(s.model.Predict(rows.back().values()) + (k % 2 ? 0.5 : -0.5));
    rankings.push_back({4, 2, 0, 1, 3});
  }
  const Vector inc = InclusionPerformanceCurve(rankings, rows, labels, s.provider,
                                               PerformanceMetric::kMse);
  const Vector exc = ExclusionPerformanceCurve(rankings, rows, labels, s.provider,
                                               PerformanceMetric::kMse);
  const Vector mu = Vector::Constant(5, -0.2);
  const Vector msk = MaskedInclusionPerformanceCurve(rankings, rows, labels, s.predictor, mu,
                                                     PerformanceMetric::kMse);
  ASSERT_EQ(inc.size(), 6);
  EXPECT_NEAR(inc[5], 0.25, 1e-12);
  EXPECT_NEAR(exc[0], 0.25, 1e-12);
  EXPECT_NEAR(msk[5], 0.25, 1e-12);
  double intercept_mse = 0.0, mu_mse = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    intercept_mse += std::pow(s.model.intercept - labels[k], 2);
    mu_mse += std::pow(s.model.Predict(mu) - labels[k], 2);
  }
  EXPECT_NEAR(inc[0], intercept_mse / rows.size(), 1e-12);
  EXPECT_NEAR(exc[5], intercept_mse / rows.size(), 1e-12);
  EXPECT_NEAR(msk[0], mu_mse / rows.size(), 1e-12);
}

TEST(AggregateCurvesTest, MeanAndNormalBand) {
  const std::vector<Vector> curves = {(Vector(2) << 1.0, 2.0).finished(),
                                      (Vector(2) << 3.0, 2.0).finished()};
  const CurveBand band = AggregateCurves(curves, "m");
  EXPECT_EQ(band.mean[0], 2.0);
  EXPECT_NEAR(band.upper[0] - band.mean[0], kNormalQuantile975 * 1.0, 1e-12);
  EXPECT_EQ(band.upper[1], band.lower[1]);
  const CurveBand single = AggregateCurves({curves[0]}, "one");
  EXPECT_EQ(single.lower, single.upper);
  EXPECT_THROW(AggregateCurves({curves[0], Vector::Zero(3)}, "bad"), std::invalid_argument);
  EXPECT_THROW(AggregateCurves({}, "none"), std::invalid_argument);
  std::ostringstream out;
  WriteCurvesCsv(out, {band, single});
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("k,mean,lower,upper,method\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(PerformanceMetricTest, Names) {
  EXPECT_EQ(PerformanceMetricFromString("mse"), PerformanceMetric::kMse);
  EXPECT_EQ(ToString(PerformanceMetric::kAuc), "auc");
  EXPECT_THROW(PerformanceMetricFromString("r2"), std::invalid_argument);
}

}  // namespace
}  // namespace semivalue
