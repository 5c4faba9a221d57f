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


#include "semivalue/attribution.h"

#include <cmath>
#include <utility>

#include "semivalue/evaluation.h"

namespace semivalue {

AttributionVector Combine(const MarginalContributionMatrix& mc,
                          const SemivalueWeights& weights) {
  if (mc.dim() != weights.dim()) {
    throw std::invalid_argument("weight length does not match the contribution matrix");
  }
  return {mc.values() * weights.w(), weights.label()};
}

std::string ToString(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kNegAup:
      return "neg-aup";
    case UtilityKind::kExclusionAup:
      return "exclusion-aup";
    case UtilityKind::kNegMaskedInclusionAup:
      return "neg-masked-inclusion-aup";
  }
  return "unknown";
}

UtilityKind UtilityKindFromString(const std::string& name) {
  if (name == "neg-aup") return UtilityKind::kNegAup;
  if (name == "exclusion-aup") return UtilityKind::kExclusionAup;
  if (name == "neg-masked-inclusion-aup") return UtilityKind::kNegMaskedInclusionAup;
  throw std::invalid_argument("unknown utility: " + name);
}

void UtilitySpec::Validate() const {
  if (!predictor) throw std::invalid_argument("utility needs a predictor");
  if (kind == UtilityKind::kNegMaskedInclusionAup) {
    if (mu.size() == 0) throw std::invalid_argument("masked inclusion needs feature means");
  } else if (provider == nullptr) {
    throw std::invalid_argument("utility " + ToString(kind) + " needs a provider");
  }
}

double EvaluateUtility(const UtilitySpec& utility, const Vector& phi, const Explicand& x) {
  switch (utility.kind) {
    case UtilityKind::kNegAup:
      return -Aup(phi, x, *utility.provider, utility.predictor(x.values())).area;
    case UtilityKind::kExclusionAup:
      return ExclusionAup(phi, x, *utility.provider, utility.predictor(x.values())).area;
    case UtilityKind::kNegMaskedInclusionAup:
      return -MaskedInclusionAup(phi, x, utility.predictor, utility.mu).area;
  }
  throw std::invalid_argument("unknown utility kind");
}

namespace {

std::vector<UtilityEntry> UtilityTable(const MarginalContributionMatrix& mc,
                                       const std::vector<SemivalueWeights>& candidates,
                                       const UtilitySpec& utility, const Explicand& x) {
  std::vector<UtilityEntry> table;
  for (const SemivalueWeights& w : candidates) {
    double value;
    try {
      value = EvaluateUtility(utility, Combine(mc, w).phi, x);
    } catch (const std::exception& e) {
      throw UtilityEvaluationError("utility failed for " + w.label() + ": " + e.what(),
                                   std::move(table));
    }
    if (std::isnan(value)) {
      throw UtilityEvaluationError("utility is NaN for " + w.label(), std::move(table));
    }
    table.push_back({w.label(), value});
  }
  return table;
}

AttributionReport MakeReport(const MarginalContributionMatrix& mc,
                             const std::vector<SemivalueWeights>& candidates,
                             std::size_t chosen, std::vector<UtilityEntry> table) {
  AttributionVector phi = Combine(mc, candidates[chosen]);
  std::vector<int> ranking = RankByMagnitude(phi);
  return {std::move(phi), candidates[chosen], chosen, std::move(table), std::move(ranking)};
}

}  // namespace

AttributionReport SelectWeight(const MarginalContributionMatrix& mc,
                               const std::vector<SemivalueWeights>& candidates,
                               const UtilitySpec& utility, const Explicand& x) {
  if (candidates.empty()) throw std::invalid_argument("candidate weight set is empty");
  utility.Validate();
  std::vector<UtilityEntry> table = UtilityTable(mc, candidates, utility, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < table.size(); ++c) {
    if (table[c].utility > table[best].utility) best = c;
  }
  return MakeReport(mc, candidates, best, std::move(table));
}

std::vector<AttributionReport> SelectWeightDatasetLevel(
    const std::vector<MarginalContributionMatrix>& mcs,
    const std::vector<SemivalueWeights>& candidates, const UtilitySpec& utility,
    const std::vector<Explicand>& xs) {
  if (candidates.empty()) throw std::invalid_argument("candidate weight set is empty");
  if (mcs.size() != xs.size() || xs.empty()) {
    throw std::invalid_argument("need one contribution matrix per explicand");
  }
  utility.Validate();
  std::vector<std::vector<UtilityEntry>> tables;
  std::vector<double> mean(candidates.size(), 0.0);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    tables.push_back(UtilityTable(mcs[n], candidates, utility, xs[n]));
    for (std::size_t c = 0; c < candidates.size(); ++c) mean[c] += tables[n][c].utility;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    if (mean[c] > mean[best]) best = c;
  }
  std::vector<AttributionReport> reports;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    reports.push_back(MakeReport(mcs[n], candidates, best, std::move(tables[n])));
  }
  return reports;
}

nlohmann::json ToJson(const AttributionReport& report) {
  nlohmann::json j;
  j["phi"] = std::vector<double>(report.phi.phi.data(),
                                 report.phi.phi.data() + report.phi.phi.size());
  j["chosen_weight"] = report.chosen_weight.label();
  std::vector<int> ranking;
  for (int i : report.ranking) ranking.push_back(i + 1);
  j["ranking"] = ranking;
  nlohmann::json table = nlohmann::json::array();
  for (const UtilityEntry& e : report.utilities) {
    table.push_back({{"weight", e.label}, {"utility", e.utility}});
  }
  j["utilities"] = std::move(table);
  return j;
}

}  // namespace semivalue
