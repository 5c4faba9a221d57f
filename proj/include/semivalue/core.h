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

#ifndef SEMIVALUE_CORE_H_
#define SEMIVALUE_CORE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Shared domain types for the attribution engine.
//
// Conventions: feature indices are 0-based in the C++ API and 1-based in
// every serialized artifact. Coalition sizes `j` are always 1-based
// (j in [1, d]) since they count features, Δ_j being the marginal contribution
// against coalitions of size j-1.
namespace semivalue {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Black-box predictor f̂. Classification predictors return P(y = 1 | x).
using PredictFn = std::function<double(const Vector&)>;

// The individual input being explained.
class Explicand {
 public:
  // Throws std::invalid_argument if d < 2 or any entry is non-finite.
  explicit Explicand(Vector x, std::optional<double> label = std::nullopt);

  const Vector& values() const { return x_; }
  double operator[](std::size_t i) const { return x_[static_cast<Eigen::Index>(i)]; }
  std::size_t dim() const { return static_cast<std::size_t>(x_.size()); }
  const std::optional<double>& label() const { return label_; }

 private:
  Vector x_;
  std::optional<double> label_;
};

// S ⊆ [d], stored as a membership mask.
class FeatureSubset {
 public:
  static FeatureSubset Empty(std::size_t d);
  static FeatureSubset Full(std::size_t d);
  // Throws std::invalid_argument on duplicates or out-of-range indices.
  static FeatureSubset FromIndices(std::size_t d, std::span<const int> indices);

  std::size_t dim() const { return mask_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool contains(std::size_t i) const { return mask_[i] != 0; }

  // Ascending member indices.
  std::vector<int> members() const;
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  void insert(std::size_t i);
  void erase(std::size_t i);
  FeatureSubset With(std::size_t i) const;
  FeatureSubset Complement() const;

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;

 private:
  explicit FeatureSubset(std::size_t d) : mask_(d, 0) {}

  std::vector<std::uint8_t> mask_;
  std::size_t size_ = 0;
};

enum class ContributionSource { kExact, kSampled, kBruteForce };

std::string ToString(ContributionSource source);

// d×d table with entry (i, j-1) = Δ_j(x_i).
class MarginalContributionMatrix {
 public:
  MarginalContributionMatrix(Matrix values, ContributionSource source);

  const Matrix& values() const { return values_; }
  std::size_t dim() const { return static_cast<std::size_t>(values_.rows()); }
  ContributionSource source() const { return source_; }

  // Δ_j(x_i) with 0-based feature i and 1-based coalition size j.
  double at(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1));
  }

 private:
  Matrix values_;
  ContributionSource source_;
};

// φ_w(x_i) for every feature, tagged with the weight label it came from.
struct AttributionVector {
  Vector phi;
  std::string weight_label;

  std::size_t dim() const { return static_cast<std::size_t>(phi.size()); }
};

// Feature indices ordered by |φ| descending; ties keep ascending index order.
std::vector<int> RankByMagnitude(const Vector& phi);
inline std::vector<int> RankByMagnitude(const AttributionVector& phi) {
  return RankByMagnitude(phi.phi);
}

// |a - b| / max(|a|, |b|), and 0 when both are 0.
double RelativeDifference(double a, double b);

// log C(n, k) via log-gamma; -inf when k < 0 or k > n.
double LogBinomial(double n, double k);

// C(n, k) as a double, evaluated in log space.
double Binomial(int n, int k);

// Round-trippable text form ("%.17g"); "inf", "-inf" and "nan" otherwise.
std::string FormatDouble(double v);

}  // namespace semivalue

#endif  // SEMIVALUE_CORE_H_
