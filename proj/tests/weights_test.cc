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


#include "semivalue/weights.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace semivalue {
namespace {

// Beta-binomial pmf of j - 1 on {0..d-1} by the ratio recursion
// p(k+1)/p(k) = (n-k)(k+β) / ((k+1)(n-k-1+α)), normalized in long double.
std::vector<long double> RecursiveBetaWeights(int d, long double alpha, long double beta) {
  const int n = d - 1;
  std::vector<long double> p(d);
  p[0] = 1.0L;
  for (int k = 0; k < n; ++k) {
    p[k + 1] = p[k] * (n - k) * (k + beta) / ((k + 1) * (n - k - 1 + alpha));
  }
  long double total = 0.0L;
  for (long double v : p) total += v;
  for (long double& v : p) v /= total;
  return p;
}

const double kGrid[][2] = {{16, 1}, {8, 1}, {4, 1}, {2, 1}, {1, 1},
                           {1, 2},  {1, 4}, {1, 8}, {1, 16}, {1, 32}};

TEST(BetaWeightsTest, MatchRecursionOracle) {
  for (int d : {2, 3, 10, 57, 100}) {
    for (const auto& ab : kGrid) {
      const SemivalueWeights w = BetaWeights(d, ab[0], ab[1]);
      const std::vector<long double> oracle = RecursiveBetaWeights(d, ab[0], ab[1]);
      for (int j = 0; j < d; ++j) {
        EXPECT_NEAR(w.w()[j], static_cast<double>(oracle[j]),
                    1e-12 + 1e-9 * static_cast<double>(oracle[j]))
            << d << " " << ab[0] << "," << ab[1] << " j=" << j + 1;
      }
    }
  }
}

TEST(BetaWeightsTest, UniformAtOneOne) {
  for (int d : {2, 3, 10, 100, 500}) {
    const SemivalueWeights w = BetaWeights(d, 1, 1);
    EXPECT_EQ(w.label(), "shapley");
    EXPECT_LT((w.w() - UniformWeights(d).w()).cwiseAbs().maxCoeff(), 1e-12) << d;
  }
}

TEST(BetaWeightsTest, SimplexAndNormalizationConstraint) {
  for (int d : {2, 5, 100, 500}) {
    for (const SemivalueWeights& w : DefaultWeightSet(d)) {
      EXPECT_GE(w.w().minCoeff(), 0.0);
      EXPECT_NEAR(w.w().sum(), 1.0, 1e-12) << w.label();
      const Vector tilde = ToBinomialForm(w);
      double constraint = 0.0;
      for (int j = 1; j <= d; ++j) constraint += Binomial(d - 1, j - 1) * tilde[j - 1];
      EXPECT_NEAR(constraint, d, 1e-9 * d) << w.label();
    }
  }
}

TEST(BetaWeightsTest, EmphasisFollowsParameters) {
  const int d = 100;
  EXPECT_LT(MeanCoalitionSize(BetaWeights(d, 16, 1)), MeanCoalitionSize(BetaWeights(d, 1, 1)));
  EXPECT_GT(MeanCoalitionSize(BetaWeights(d, 1, 16)), MeanCoalitionSize(BetaWeights(d, 1, 1)));
  // With α = 1 the pmf is nondecreasing in j for β > 1, so Beta(1, 32) peaks at j = d.
  const Vector w = BetaWeights(d, 1, 32).w();
  Eigen::Index arg = 0;
  w.maxCoeff(&arg);
  EXPECT_EQ(arg, d - 1);
  EXPECT_NEAR(MeanCoalitionSize(UniformWeights(d)), (d + 1) / 2.0, 1e-9);
}

TEST(BetaWeightsTest, RejectsBadParameters) {
  EXPECT_THROW(BetaWeights(1, 1, 1), std::invalid_argument);
  EXPECT_THROW(BetaWeights(5, 0, 1), std::invalid_argument);
  EXPECT_THROW(BetaWeights(5, 1, -2), std::invalid_argument);
}

TEST(DefaultWeightSetTest, MembersAndOrder) {
  const std::vector<SemivalueWeights> set = DefaultWeightSet(10);
  ASSERT_EQ(set.size(), 12u);
  EXPECT_EQ(set[0].label(), "delta_1");
  EXPECT_EQ(set[1].label(), "delta_d");
  EXPECT_EQ(set[2].label(), "beta(16,1)");
  EXPECT_EQ(set[6].label(), "shapley");
  EXPECT_EQ(set[6].w(), UniformWeights(10).w());
  EXPECT_EQ(set[11].label(), "beta(1,32)");
  EXPECT_EQ(NamedWeightSet("shapley-only", 10).size(), 1u);
  EXPECT_THROW(NamedWeightSet("fancy", 10), std::invalid_argument);
}

TEST(SemivalueWeightsTest, ValidationAndRenormalization) {
  EXPECT_THROW(SemivalueWeights((Vector(2) << -0.1, 1.1).finished(), "x"),
               std::invalid_argument);
  EXPECT_THROW(SemivalueWeights((Vector(2) << 0.5, 0.6).finished(), "x"),
               std::invalid_argument);
  EXPECT_THROW(SemivalueWeights((Vector(2) << NAN, 1.0).finished(), "x"),
               std::invalid_argument);
  const SemivalueWeights w((Vector(2) << 0.5, 0.5 + 1e-10).finished(), "x");
  EXPECT_NEAR(w.w().sum(), 1.0, 1e-15);
}

TEST(OneHotWeightsTest, Labels) {
  EXPECT_EQ(OneHotWeights(5, 1).label(), "delta_1");
  EXPECT_EQ(OneHotWeights(5, 3).label(), "delta_3");
  EXPECT_EQ(OneHotWeights(5, 5).label(), "delta_d");
  EXPECT_EQ(OneHotWeights(5, 3).w()[2], 1.0);
  EXPECT_THROW(OneHotWeights(5, 6), std::invalid_argument);
  EXPECT_THROW(OneHotWeights(5, 0), std::invalid_argument);
}

TEST(BinomialFormTest, RoundTripAndConstraintCheck) {
  const SemivalueWeights w = BetaWeights(12, 2, 1);
  const SemivalueWeights back = FromBinomialForm(ToBinomialForm(w), w.label());
  EXPECT_LT((back.w() - w.w()).cwiseAbs().maxCoeff(), 1e-14);
  const Vector uniform = ToBinomialForm(UniformWeights(4));
  const Vector expected = (Vector(4) << 1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0).finished();
  EXPECT_LT((uniform - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(FromBinomialForm(Vector::Constant(4, 2.0), "bad"), std::invalid_argument);
}

TEST(WeightsJsonTest, RoundTrip) {
  const SemivalueWeights w = BetaWeights(7, 1, 4);
  const SemivalueWeights back = WeightsFromJson(ToJson(w));
  EXPECT_EQ(back.label(), w.label());
  EXPECT_EQ(back.w(), w.w());
}

}  // namespace
}  // namespace semivalue
