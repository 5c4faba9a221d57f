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


#ifndef SEMIVALUE_ATTRIBUTION_H_
#define SEMIVALUE_ATTRIBUTION_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "semivalue/coalition.h"
#include "semivalue/core.h"
#include "semivalue/weights.h"

namespace semivalue {

// φ(x_i) = Σ_j w_j Δ_j(x_i).
AttributionVector Combine(const MarginalContributionMatrix& mc,
                          const SemivalueWeights& weights);

// Larger is better for every kind:
//   neg-aup                  -Σ_k |f̂(x) - E[f̂ | X_I(k)]|
//   exclusion-aup            +Σ_k |f̂(x) - E[f̂ | X_J(k)]|
//   neg-masked-inclusion-aup -Σ_k |f̂(x) - f̂(x_I(k), μ_J(k))|
enum class UtilityKind { kNegAup, kExclusionAup, kNegMaskedInclusionAup };

std::string ToString(UtilityKind kind);
UtilityKind UtilityKindFromString(const std::string& name);

struct UtilitySpec {
  UtilityKind kind = UtilityKind::kNegAup;
  const CoalitionProvider* provider = nullptr;  // AUP kinds
  PredictFn predictor;                          // always
  Vector mu;                                    // masked inclusion

  // Throws std::invalid_argument when a binding the kind needs is missing.
  void Validate() const;
};

double EvaluateUtility(const UtilitySpec& utility, const Vector& phi, const Explicand& x);

struct UtilityEntry {
  std::string label;
  double utility = 0.0;
};

struct AttributionReport {
  AttributionVector phi;
  SemivalueWeights chosen_weight;
  std::size_t chosen_index = 0;
  std::vector<UtilityEntry> utilities;
  std::vector<int> ranking;  // 0-based
};

// Raised when a utility evaluation fails; carries the rows computed so far.
class UtilityEvaluationError : public std::runtime_error {
 public:
  UtilityEvaluationError(const std::string& what, std::vector<UtilityEntry> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<UtilityEntry>& partial_table() const { return partial_; }

 private:
  std::vector<UtilityEntry> partial_;
};

// argmax over candidates of the utility of Combine(mc, w); the first of equal
// maxima wins.
AttributionReport SelectWeight(const MarginalContributionMatrix& mc,
                               const std::vector<SemivalueWeights>& candidates,
                               const UtilitySpec& utility, const Explicand& x);

// One weight for the whole set: the candidate maximizing mean utility. Every
// report carries that weight and its own utility table.
std::vector<AttributionReport> SelectWeightDatasetLevel(
    const std::vector<MarginalContributionMatrix>& mcs,
    const std::vector<SemivalueWeights>& candidates, const UtilitySpec& utility,
    const std::vector<Explicand>& xs);

// Feature indices are written 1-based.
nlohmann::json ToJson(const AttributionReport& report);

}  // namespace semivalue

#endif  // SEMIVALUE_ATTRIBUTION_H_
