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

#include "semivalue/core.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace semivalue {

Explicand::Explicand(Vector x, std::optional<double> label)
    : x_(std::move(x)), label_(label) {
  if (x_.size() < 2) {
    throw std::invalid_argument("explicand needs at least 2 features, got " +
                                std::to_string(x_.size()));
  }
  if (!x_.allFinite()) {
    throw std::invalid_argument("explicand has non-finite entries");
  }
}

FeatureSubset FeatureSubset::Empty(std::size_t d) { return FeatureSubset(d); }

FeatureSubset FeatureSubset::Full(std::size_t d) {
  FeatureSubset s(d);
  std::fill(s.mask_.begin(), s.mask_.end(), std::uint8_t{1});
  s.size_ = d;
  return s;
}

FeatureSubset FeatureSubset::FromIndices(std::size_t d,
                                         std::span<const int> indices) {
  FeatureSubset s(d);
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= d) {
      throw std::invalid_argument("feature index " + std::to_string(i) +
                                  " out of range for d=" + std::to_string(d));
    }
    if (s.mask_[i]) {
      throw std::invalid_argument("duplicate feature index " +
                                  std::to_string(i));
    }
    s.mask_[i] = 1;
    ++s.size_;
  }
  return s;
}

std::vector<int> FeatureSubset::members() const {
  std::vector<int> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

void FeatureSubset::insert(std::size_t i) {
  if (!mask_.at(i)) {
    mask_[i] = 1;
    ++size_;
  }
}

void FeatureSubset::erase(std::size_t i) {
  if (mask_.at(i)) {
    mask_[i] = 0;
    --size_;
  }
}

FeatureSubset FeatureSubset::With(std::size_t i) const {
  FeatureSubset s = *this;
  s.insert(i);
  return s;
}

FeatureSubset FeatureSubset::Complement() const {
  FeatureSubset s(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) s.mask_[i] = mask_[i] ? 0 : 1;
  s.size_ = mask_.size() - size_;
  return s;
}

std::string ToString(ContributionSource source) {
  switch (source) {
    case ContributionSource::kExact:
      return "exact";
    case ContributionSource::kSampled:
      return "sampled";
    case ContributionSource::kBruteForce:
      return "brute-force";
  }
  return "unknown";
}

MarginalContributionMatrix::MarginalContributionMatrix(Matrix values,
                                                       ContributionSource source)
    : values_(std::move(values)), source_(source) {
  if (values_.rows() != values_.cols()) {
    throw std::invalid_argument("marginal contribution matrix must be square");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("marginal contribution matrix has non-finite entries");
  }
}

std::vector<int> RankByMagnitude(const Vector& phi) {
  std::vector<int> order(static_cast<std::size_t>(phi.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&phi](int a, int b) {
    return std::abs(phi[a]) > std::abs(phi[b]);
  });
  return order;
}

double RelativeDifference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

double LogBinomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double Binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  // Exact while every intermediate stays below 2^53.
  if (n <= 56) {
    std::uint64_t acc = 1;
    for (int t = 1; t <= k; ++t) {
      acc = acc * static_cast<std::uint64_t>(n - k + t) / static_cast<std::uint64_t>(t);
    }
    return static_cast<double>(acc);
  }
  return std::exp(LogBinomial(n, k));
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace semivalue
