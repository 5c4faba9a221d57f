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

#include "semivalue/coalition.h"

#include <stdexcept>
#include <string>
#include <utility>

#include "semivalue/surrogate.h"

namespace semivalue {

std::string ToString(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kExactGaussian:
      return "exact-gaussian";
    case ProviderKind::kSurrogate:
      return "surrogate";
    case ProviderKind::kMeanMasked:
      return "mean-masked";
  }
  return "unknown";
}

void CoalitionProvider::CheckDim(const Explicand& x) const {
  if (x.dim() != dim()) {
    throw std::invalid_argument("explicand dimension " + std::to_string(x.dim()) +
                                " does not match provider dimension " +
                                std::to_string(dim()));
  }
}

double CoalitionProvider::Evaluate(const Explicand& x,
                                   const FeatureSubset& s) const {
  CheckDim(x);
  if (s.dim() != dim()) {
    throw std::invalid_argument("subset dimension does not match provider");
  }
  if (s.empty()) return 0.0;
  return EvaluateNonEmpty(x, s);
}

double CoalitionProvider::ConditionalExpectation(const Explicand& x,
                                                 const FeatureSubset& s) const {
  return Evaluate(x, s) + grand_mean();
}

void CoalitionProvider::EvaluateBatch(const Explicand& x,
                                      std::span<const FeatureSubset> subsets,
                                      std::span<double> out) const {
  if (out.size() != subsets.size()) {
    throw std::invalid_argument("batch output size mismatch");
  }
  for (std::size_t k = 0; k < subsets.size(); ++k) out[k] = Evaluate(x, subsets[k]);
}

void CoalitionProvider::EvaluateWalk(const Explicand& x, int i,
                                     std::span<const int> order,
                                     std::span<double> with_i,
                                     std::span<double> without_i) const {
  const std::size_t d = dim();
  CheckDim(x);
  if (order.size() + 1 != d || with_i.size() != d || without_i.size() != d) {
    throw std::invalid_argument("walk buffers must match the provider dimension");
  }
  FeatureSubset s = FeatureSubset::Empty(d);
  for (std::size_t j = 0; j < d; ++j) {
    without_i[j] = j == 0 ? 0.0 : Evaluate(x, s);
    with_i[j] = Evaluate(x, s.With(static_cast<std::size_t>(i)));
    if (j + 1 < d) s.insert(static_cast<std::size_t>(order[j]));
  }
}

void CoalitionProvider::EvaluateWalks(const Explicand& x,
                                      std::span<const std::vector<int>> orders,
                                      Matrix& with_i, Matrix& without_i) const {
  const std::size_t d = dim();
  if (orders.size() != d) throw std::invalid_argument("need one order per feature");
  with_i.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  without_i.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::vector<double> with_row(d);
  std::vector<double> without_row(d);
  for (std::size_t i = 0; i < d; ++i) {
    EvaluateWalk(x, static_cast<int>(i), orders[i], with_row, without_row);
    for (std::size_t j = 0; j < d; ++j) {
      with_i(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = with_row[j];
      without_i(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = without_row[j];
    }
  }
}

ExactGaussianProvider::ExactGaussianProvider(BlockGaussianSpec spec,
                                             LinearModel model)
    : spec_(std::move(spec)), model_(std::move(model)) {
  if (model_.dim() != spec_.dim()) {
    throw std::invalid_argument("model dimension does not match spec");
  }
}

double ExactGaussianProvider::ConditionalExpectation(const Explicand& x,
                                                     const FeatureSubset& s) const {
  return semivalue::ConditionalExpectation(spec_, model_, x, s);
}

double ExactGaussianProvider::EvaluateNonEmpty(const Explicand& x,
                                               const FeatureSubset& s) const {
  return CoalitionValue(spec_, model_, x, s);
}

SurrogateProvider::SurrogateProvider(
    std::shared_ptr<const MaskedSurrogate> surrogate, double background_mean)
    : surrogate_(std::move(surrogate)), background_mean_(background_mean) {
  if (!surrogate_) throw std::invalid_argument("surrogate must not be null");
}

std::size_t SurrogateProvider::dim() const { return surrogate_->dim(); }

double SurrogateProvider::ConditionalExpectation(const Explicand& x,
                                                 const FeatureSubset& s) const {
  CheckDim(x);
  if (s.empty()) return background_mean_;
  return surrogate_->Predict(x.values(), s);
}

double SurrogateProvider::EvaluateNonEmpty(const Explicand& x,
                                           const FeatureSubset& s) const {
  return surrogate_->Predict(x.values(), s) - background_mean_;
}

void SurrogateProvider::EvaluateWalk(const Explicand& x, int i,
                                     std::span<const int> order,
                                     std::span<double> with_i,
                                     std::span<double> without_i) const {
  CheckDim(x);
  surrogate_->EvaluateWalk(x.values(), i, order, with_i, without_i);
  for (std::size_t j = 0; j < with_i.size(); ++j) {
    with_i[j] -= background_mean_;
    without_i[j] = j == 0 ? 0.0 : without_i[j] - background_mean_;
  }
}

void SurrogateProvider::EvaluateWalks(const Explicand& x,
                                      std::span<const std::vector<int>> orders,
                                      Matrix& with_i, Matrix& without_i) const {
  CheckDim(x);
  surrogate_->EvaluateWalks(x.values(), orders, with_i, without_i);
  with_i.array() -= background_mean_;
  without_i.array() -= background_mean_;
  without_i.col(0).setZero();
}

double MeanMaskedPrediction(const PredictFn& predictor, const Explicand& x,
                            const FeatureSubset& s, const Vector& mu) {
  if (static_cast<std::size_t>(mu.size()) != x.dim() || s.dim() != x.dim()) {
    throw std::invalid_argument("mean-masked prediction dimension mismatch");
  }
  Vector masked = mu;
  for (std::size_t k = 0; k < x.dim(); ++k) {
    if (s.contains(k)) masked[static_cast<Eigen::Index>(k)] = x[k];
  }
  return predictor(masked);
}

MeanMaskedProvider::MeanMaskedProvider(PredictFn predictor, Vector mu)
    : predictor_(std::move(predictor)), mu_(std::move(mu)) {
  if (!predictor_) throw std::invalid_argument("predictor must be set");
  baseline_ = predictor_(mu_);
}

double MeanMaskedProvider::ConditionalExpectation(const Explicand& x,
                                                  const FeatureSubset& s) const {
  CheckDim(x);
  return MeanMaskedPrediction(predictor_, x, s, mu_);
}

double MeanMaskedProvider::EvaluateNonEmpty(const Explicand& x,
                                            const FeatureSubset& s) const {
  return MeanMaskedPrediction(predictor_, x, s, mu_) - baseline_;
}

}  // namespace semivalue
