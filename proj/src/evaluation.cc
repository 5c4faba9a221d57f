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
#include <limits>
#include <stdexcept>
#include <utility>

namespace semivalue {

namespace {

// Top-k subsets along a ranking, k = 0..d.
template <typename Fn>
void ForEachPrefix(const std::vector<int>& ranking, Fn&& fn) {
  const std::size_t d = ranking.size();
  FeatureSubset s = FeatureSubset::Empty(d);
  fn(std::size_t{0}, s);
  for (std::size_t k = 1; k <= d; ++k) {
    s.insert(static_cast<std::size_t>(ranking[k - 1]));
    fn(k, s);
  }
}

void CheckPhi(const Vector& phi, std::size_t d) {
  if (static_cast<std::size_t>(phi.size()) != d) {
    throw std::invalid_argument("attribution length does not match the explicand");
  }
  if (!phi.allFinite()) throw std::invalid_argument("attribution must be finite");
}

double AreaOf(const Vector& points) { return points.tail(points.size() - 1).sum(); }

double Mse(std::span<const double> predictions, std::span<const double> labels) {
  double total = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const double r = predictions[n] - labels[n];
    total += r * r;
  }
  return total / static_cast<double>(labels.size());
}

void CheckLabels(const std::vector<std::vector<int>>& rankings,
                 const std::vector<Explicand>& test, std::span<const double> labels,
                 PerformanceMetric metric) {
  if (test.empty()) throw std::invalid_argument("test set is empty");
  if (rankings.size() != test.size() || labels.size() != test.size()) {
    throw std::invalid_argument("rankings, test rows and labels differ in length");
  }
  if (metric == PerformanceMetric::kAuc) {
    bool seen[2] = {false, false};
    for (double y : labels) {
      if (y != 0.0 && y != 1.0) throw std::invalid_argument("AUC needs 0/1 labels");
      seen[y == 1.0] = true;
    }
    if (!seen[0] || !seen[1]) {
      throw std::invalid_argument("AUC is undefined on a single-class test set");
    }
  }
}

// Shared driver: predict(n, S) gives row n's recovered prediction.
template <typename Predict>
Vector PerformanceCurve(const std::vector<std::vector<int>>& rankings,
                        const std::vector<Explicand>& test, std::span<const double> labels,
                        PerformanceMetric metric, bool exclusion, Predict&& predict) {
  CheckLabels(rankings, test, labels, metric);
  const std::size_t d = test[0].dim();
  Matrix preds(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(test.size()));
  for (std::size_t n = 0; n < test.size(); ++n) {
    if (rankings[n].size() != d) throw std::invalid_argument("ranking length mismatch");
    ForEachPrefix(rankings[n], [&](std::size_t k, const FeatureSubset& top) {
      preds(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) =
          predict(n, exclusion ? top.Complement() : top);
    });
  }
  Vector curve(static_cast<Eigen::Index>(d + 1));
  for (std::size_t k = 0; k <= d; ++k) {
    const Vector row = preds.row(static_cast<Eigen::Index>(k)).transpose();
    const std::span<const double> scores(row.data(), static_cast<std::size_t>(row.size()));
    curve[static_cast<Eigen::Index>(k)] =
        metric == PerformanceMetric::kMse ? Mse(scores, labels) : RocAuc(scores, labels);
  }
  return curve;
}

}  // namespace

CurveResult Aup(const Vector& phi, const Explicand& x, const CoalitionProvider& provider,
                double full_prediction) {
  CheckPhi(phi, x.dim());
  Vector points(static_cast<Eigen::Index>(x.dim() + 1));
  ForEachPrefix(RankByMagnitude(phi), [&](std::size_t k, const FeatureSubset& s) {
    points[static_cast<Eigen::Index>(k)] =
        std::abs(full_prediction - provider.ConditionalExpectation(x, s));
  });
  const double area = AreaOf(points);
  return {area, {std::move(points), "", ""}};
}

CurveResult ExclusionAup(const Vector& phi, const Explicand& x,
                         const CoalitionProvider& provider, double full_prediction) {
  CheckPhi(phi, x.dim());
  Vector points(static_cast<Eigen::Index>(x.dim() + 1));
  ForEachPrefix(RankByMagnitude(phi), [&](std::size_t k, const FeatureSubset& s) {
    points[static_cast<Eigen::Index>(k)] =
        std::abs(full_prediction - provider.ConditionalExpectation(x, s.Complement()));
  });
  const double area = AreaOf(points);
  return {area, {std::move(points), "", ""}};
}

CurveResult MaskedInclusionAup(const Vector& phi, const Explicand& x,
                               const PredictFn& predictor, const Vector& mu) {
  CheckPhi(phi, x.dim());
  const double full = predictor(x.values());
  Vector points(static_cast<Eigen::Index>(x.dim() + 1));
  ForEachPrefix(RankByMagnitude(phi), [&](std::size_t k, const FeatureSubset& s) {
    points[static_cast<Eigen::Index>(k)] =
        std::abs(full - MeanMaskedPrediction(predictor, x, s, mu));
  });
  const double area = AreaOf(points);
  return {area, {std::move(points), "", ""}};
}

double OptimalAup(const Explicand& x, const CoalitionProvider& provider,
                  double full_prediction) {
  const std::size_t d = x.dim();
  if (d > kOptimalAupMaxDim) {
    throw std::invalid_argument("optimal AUP enumeration limited to d <= " +
                                std::to_string(kOptimalAupMaxDim));
  }
  const std::size_t count = std::size_t{1} << d;
  std::vector<double> best(count, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (std::size_t mask = 1; mask < count; ++mask) {
    std::vector<int> members;
    for (std::size_t k = 0; k < d; ++k) {
      if (mask & (std::size_t{1} << k)) members.push_back(static_cast<int>(k));
    }
    const double err = std::abs(
        full_prediction -
        provider.ConditionalExpectation(x, FeatureSubset::FromIndices(d, members)));
    double prev = std::numeric_limits<double>::infinity();
    for (int k : members) prev = std::min(prev, best[mask ^ (std::size_t{1} << k)]);
    best[mask] = prev + err;
  }
  return best[count - 1];
}

std::string ToString(PerformanceMetric metric) {
  return metric == PerformanceMetric::kMse ? "mse" : "auc";
}

PerformanceMetric PerformanceMetricFromString(const std::string& name) {
  if (name == "mse") return PerformanceMetric::kMse;
  if (name == "auc") return PerformanceMetric::kAuc;
  throw std::invalid_argument("unknown metric: " + name);
}

double RocAuc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("AUC length mismatch");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks over tied groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double mid_rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t n = lo; n < hi; ++n) {
      if (labels[order[n]] == 1.0) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    lo = hi;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("AUC is undefined on a single-class set");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

Vector InclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                 const std::vector<Explicand>& test,
                                 std::span<const double> labels,
                                 const CoalitionProvider& provider,
                                 PerformanceMetric metric) {
  return PerformanceCurve(rankings, test, labels, metric, false,
                          [&](std::size_t n, const FeatureSubset& s) {
                            return provider.ConditionalExpectation(test[n], s);
                          });
}

Vector MaskedInclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                       const std::vector<Explicand>& test,
                                       std::span<const double> labels,
                                       const PredictFn& predictor, const Vector& mu,
                                       PerformanceMetric metric) {
  return PerformanceCurve(rankings, test, labels, metric, false,
                          [&](std::size_t n, const FeatureSubset& s) {
                            return MeanMaskedPrediction(predictor, test[n], s, mu);
                          });
}

Vector ExclusionPerformanceCurve(const std::vector<std::vector<int>>& rankings,
                                 const std::vector<Explicand>& test,
                                 std::span<const double> labels,
                                 const CoalitionProvider& provider,
                                 PerformanceMetric metric) {
  return PerformanceCurve(rankings, test, labels, metric, true,
                          [&](std::size_t n, const FeatureSubset& s) {
                            return provider.ConditionalExpectation(test[n], s);
                          });
}

CurveBand AggregateCurves(const std::vector<Vector>& curves, std::string method) {
  if (curves.empty()) throw std::invalid_argument("no curves to aggregate");
  const Eigen::Index len = curves[0].size();
  Vector mean = Vector::Zero(len);
  for (const Vector& c : curves) {
    if (c.size() != len) throw std::invalid_argument("curves differ in length");
    mean += c;
  }
  const auto n = static_cast<double>(curves.size());
  mean /= n;
  Vector half = Vector::Zero(len);
  if (curves.size() > 1) {
    for (const Vector& c : curves) half += (c - mean).cwiseAbs2();
    half = (half / (n - 1.0) / n).cwiseSqrt() * kNormalQuantile975;
  }
  return {std::move(method), mean, mean - half, mean + half};
}

void WriteCurvesCsv(std::ostream& out, const std::vector<CurveBand>& bands) {
  out << "k,mean,lower,upper,method\n";
  for (const CurveBand& band : bands) {
    for (Eigen::Index k = 0; k < band.mean.size(); ++k) {
      out << k << ',' << FormatDouble(band.mean[k]) << ',' << FormatDouble(band.lower[k])
          << ',' << FormatDouble(band.upper[k]) << ',' << band.method << '\n';
    }
  }
}

}  // namespace semivalue
