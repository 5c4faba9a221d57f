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
#include <sstream>
#include <stdexcept>
#include <utility>

namespace semivalue {

namespace {

std::string FormatParameter(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

SemivalueWeights::SemivalueWeights(Vector w, std::string label)
    : w_(std::move(w)), label_(std::move(label)) {
  if (w_.size() < 1) throw std::invalid_argument("weights must be non-empty");
  for (Eigen::Index j = 0; j < w_.size(); ++j) {
    if (!std::isfinite(w_[j]) || w_[j] < 0.0) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
  }
  const double sum = w_.sum();
  if (std::abs(sum - 1.0) > kRenormalizeGate) {
    throw std::invalid_argument("weights sum to " + FormatParameter(sum) + ", not 1");
  }
  if (sum != 1.0) w_ /= sum;
}

SemivalueWeights BetaWeights(int d, double alpha, double beta) {
  if (d < 2) throw std::invalid_argument("beta weights need d >= 2");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("beta weights need alpha > 0 and beta > 0");
  }
  const double log_norm =
      std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
  Vector w(d);
  for (int j = 1; j <= d; ++j) {
    const double a = j + beta - 1.0;
    const double b = d - j + alpha;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    w[j - 1] = std::exp(LogBinomial(d - 1, j - 1) + log_beta - log_norm);
  }
  std::string label = alpha == 1.0 && beta == 1.0
                          ? "shapley"
                          : "beta(" + FormatParameter(alpha) + "," + FormatParameter(beta) + ")";
  return SemivalueWeights(std::move(w), std::move(label));
}

SemivalueWeights UniformWeights(int d) {
  if (d < 2) throw std::invalid_argument("uniform weights need d >= 2");
  return SemivalueWeights(Vector::Constant(d, 1.0 / d), "shapley");
}

SemivalueWeights OneHotWeights(int d, int j) {
  if (d < 2 || j < 1 || j > d) throw std::invalid_argument("one-hot index out of range");
  Vector w = Vector::Zero(d);
  w[j - 1] = 1.0;
  return SemivalueWeights(std::move(w), j == d ? "delta_d" : "delta_" + std::to_string(j));
}

std::vector<SemivalueWeights> DefaultWeightSet(int d) {
  std::vector<SemivalueWeights> set{OneHotWeights(d, 1), OneHotWeights(d, d)};
  const double grid[][2] = {{16, 1}, {8, 1}, {4, 1}, {2, 1}, {1, 1},
                            {1, 2},  {1, 4}, {1, 8}, {1, 16}, {1, 32}};
  for (const auto& ab : grid) {
    // Exact 1/d so the Shapley candidate matches UniformWeights bit for bit.
    set.push_back(ab[0] == 1 && ab[1] == 1 ? UniformWeights(d) : BetaWeights(d, ab[0], ab[1]));
  }
  return set;
}

std::vector<SemivalueWeights> NamedWeightSet(const std::string& name, int d) {
  if (name == "default") return DefaultWeightSet(d);
  if (name == "shapley-only") return {UniformWeights(d)};
  throw std::invalid_argument("unknown weight set: " + name);
}

Vector ToBinomialForm(const SemivalueWeights& weights) {
  const int d = static_cast<int>(weights.dim());
  Vector out(d);
  for (int j = 1; j <= d; ++j) {
    out[j - 1] = d * weights.w()[j - 1] / Binomial(d - 1, j - 1);
  }
  return out;
}

SemivalueWeights FromBinomialForm(const Vector& binomial_form, std::string label) {
  const int d = static_cast<int>(binomial_form.size());
  if (d < 1) throw std::invalid_argument("empty weight vector");
  Vector w(d);
  double constraint = 0.0;
  for (int j = 1; j <= d; ++j) {
    const double c = Binomial(d - 1, j - 1);
    constraint += c * binomial_form[j - 1];
    w[j - 1] = c * binomial_form[j - 1] / d;
  }
  if (std::abs(constraint - d) > 1e-9 * d) {
    throw std::invalid_argument("binomial-form weights violate the normalization");
  }
  return SemivalueWeights(std::move(w), std::move(label));
}

double MeanCoalitionSize(const SemivalueWeights& weights) {
  double mean = 0.0;
  for (std::size_t j = 0; j < weights.dim(); ++j) {
    mean += static_cast<double>(j + 1) * weights.w()[static_cast<Eigen::Index>(j)];
  }
  return mean;
}

nlohmann::json ToJson(const SemivalueWeights& weights) {
  const Vector& w = weights.w();
  return {{"label", weights.label()},
          {"w", std::vector<double>(w.data(), w.data() + w.size())}};
}

SemivalueWeights WeightsFromJson(const nlohmann::json& j) {
  const auto w = j.at("w").get<std::vector<double>>();
  return SemivalueWeights(Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())),
                          j.at("label").get<std::string>());
}

}  // namespace semivalue
