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


#ifndef SEMIVALUE_WEIGHTS_H_
#define SEMIVALUE_WEIGHTS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "semivalue/core.h"

namespace semivalue {

// Weights over coalition sizes 1..d in simplex form (w_j >= 0, Σ w_j = 1).
class SemivalueWeights {
 public:
  // Throws std::invalid_argument on negative or non-finite entries, or when
  // the sum is off 1 by more than kRenormalizeGate. Smaller drift is
  // renormalized away.
  SemivalueWeights(Vector w, std::string label);

  const Vector& w() const { return w_; }
  const std::string& label() const { return label_; }
  std::size_t dim() const { return static_cast<std::size_t>(w_.size()); }

 private:
  Vector w_;
  std::string label_;
};

inline constexpr double kRenormalizeGate = 1e-8;

// (w_j) = C(d-1, j-1) B(j+β-1, d-j+α) / B(α, β), the beta-binomial pmf of
// j-1 on {0..d-1}. Evaluated in log space.
SemivalueWeights BetaWeights(int d, double alpha, double beta);

SemivalueWeights UniformWeights(int d);  // labelled "shapley"
// One-hot on coalition size j (1-based); labelled "delta_<j>", with j = d
// written as "delta_d".
SemivalueWeights OneHotWeights(int d, int j);

// Δ_1, Δ_d, and Beta(α, β) for (16,1) (8,1) (4,1) (2,1) (1,1) (1,2) (1,4)
// (1,8) (1,16) (1,32), in that order; Beta(1, 1) enters as UniformWeights.
std::vector<SemivalueWeights> DefaultWeightSet(int d);

// Resolves a named candidate set: "default" or "shapley-only".
std::vector<SemivalueWeights> NamedWeightSet(const std::string& name, int d);

// w̃_j = d · w_j / C(d-1, j-1), satisfying Σ_j C(d-1, j-1) w̃_j = d.
Vector ToBinomialForm(const SemivalueWeights& weights);
// Inverse of ToBinomialForm; throws if the constraint sum is off by > 1e-9·d.
SemivalueWeights FromBinomialForm(const Vector& binomial_form, std::string label);

// Mean coalition size Σ j w_j.
double MeanCoalitionSize(const SemivalueWeights& weights);

nlohmann::json ToJson(const SemivalueWeights& weights);
SemivalueWeights WeightsFromJson(const nlohmann::json& j);

}  // namespace semivalue

#endif  // SEMIVALUE_WEIGHTS_H_
