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


#ifndef SEMIVALUE_EVALUATION_H_
#define SEMIVALUE_EVALUATION_H_

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "semivalue/coalition.h"
#include "semivalue/core.h"

namespace semivalue {

// points[k] for k = 0..d. The k = 0 entry is the all-masked origin, kept for
// plotting only; areas sum k = 1..d.
struct RecoveryCurve {
  Vector points;
  std::string method;
  std::string explicand_id;
};

struct CurveResult {
  double area = 0.0;
  RecoveryCurve curve;
};

// Σ_{k=1..d} |f̂(x) - E[f̂ | X_I(k) = x_I(k)]| with I(k) the top-k features by
// |φ| and the expectation taken from provider.ConditionalExpectation.
CurveResult Aup(const Vector& phi, const Explicand& x, const CoalitionProvider& provider,
                double full_prediction);

// Σ_{k=1..d} |f̂(x) - E[f̂ | X_J(k) = x_J(k)]| with J(k) = [d] \ I(k).
CurveResult ExclusionAup(const Vector& phi, const Explicand& x,
                         const CoalitionProvider& provider, double full_prediction);

// Σ_{k=1..d} |f̂(x) - f̂(x on I(k), μ elsewhere)|.
CurveResult MaskedInclusionAup(const Vector& phi, const Explicand& x,
                               const PredictFn& predictor, const Vector& mu);

// Minimum AUP over all d! orderings, by dynamic programming over subsets.
// Throws std::invalid_argument for d > kOptimalAupMaxDim.
inline constexpr std::size_t kOptimalAupMaxDim = 16;
double OptimalAup(const Explicand& x, const CoalitionProvider& provider,
                  double full_prediction);

enum class PerformanceMetric { kMse, kAuc };

std::string ToString(PerformanceMetric metric);
PerformanceMetric PerformanceMetricFromString(const std::string& name);

// Area under the ROC curve by the Mann-Whitney statistic, ties counted 1/2.
// Labels must be 0/1; throws std::invalid_argument if only one class occurs.
double RocAuc(std::span<const double> scores, std::span<const double> labels);

// For k = 0..d, every test row is replaced by the provider's conditional
// expectation given its own top-k features; returns MSE against the labels or
// the AUC of those scores. rankings[n] orders the features of row n.
Vector InclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                 const std::vector<Explicand>& test,
                                 std::span<const double> labels,
                                 const CoalitionProvider& provider,
                                 PerformanceMetric metric);

// As above with mean-masked predictions f̂(x on I(k), μ elsewhere).
Vector MaskedInclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                       const std::vector<Explicand>& test,
                                       std::span<const double> labels,
                                       const PredictFn& predictor, const Vector& mu,
                                       PerformanceMetric metric);

// Removal counterpart: features dropped from most to least influential, so
// entry k conditions on the d - k least influential features.
Vector ExclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                 const std::vector<Explicand>& test,
                                 std::span<const double> labels,
                                 const CoalitionProvider& provider,
                                 PerformanceMetric metric);

// Pointwise mean with a normal-approximation 95% band.
struct CurveBand {
  std::string method;
  Vector mean;
  Vector lower;
  Vector upper;
};

inline constexpr double kNormalQuantile975 = 1.959963984540054;

// All curves must share one length. A single curve yields a zero-width band.
CurveBand AggregateCurves(const std::vector<Vector>& curves, std::string method);

// Header "k,mean,lower,upper,method", one row per (band, k) in input order.
void WriteCurvesCsv(std::ostream& out, const std::vector<CurveBand>& bands);

}  // namespace semivalue

#endif  // SEMIVALUE_EVALUATION_H_
