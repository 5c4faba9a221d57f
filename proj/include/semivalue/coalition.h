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

#ifndef SEMIVALUE_COALITION_H_
#define SEMIVALUE_COALITION_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semivalue/core.h"
#include "semivalue/gaussian_linear.h"

namespace semivalue {

class MaskedSurrogate;

enum class ProviderKind { kExactGaussian, kSurrogate, kMeanMasked };

std::string ToString(ProviderKind kind);

// The conditional coalition function v(S) = E[f̂ | X_S = x_S] - E[f̂(X)].
//
// Every provider returns exactly 0 for S = ∅; this is enforced here rather
// than left to implementations. Providers are immutable after construction
// and Evaluate is reentrant.
class CoalitionProvider {
 public:
  virtual ~CoalitionProvider() = default;

  virtual std::size_t dim() const = 0;
  virtual ProviderKind kind() const = 0;

  // The provider's estimate of E[f̂(X)].
  virtual double grand_mean() const = 0;

  double Evaluate(const Explicand& x, const FeatureSubset& s) const;

  // E[f̂ | X_S = x_S] on the prediction scale.
  virtual double ConditionalExpectation(const Explicand& x,
                                        const FeatureSubset& s) const;

  virtual void EvaluateBatch(const Explicand& x,
                             std::span<const FeatureSubset> subsets,
                             std::span<double> out) const;

  // One permutation walk for feature `i`: with S_j the first j entries of
  // `order` (a permutation of [d] \ {i}), fills with_i[j] = v(S_j ∪ {i}) and
  // without_i[j] = v(S_j) for j = 0..d-1. without_i[0] = v(∅) = 0.
  virtual void EvaluateWalk(const Explicand& x, int i, std::span<const int> order,
                            std::span<double> with_i,
                            std::span<double> without_i) const;

  // One walk per feature: orders[i] orders [d] \ {i}. Row i of `with_i` and
  // `without_i` (both d×d) receives that walk's values.
  virtual void EvaluateWalks(const Explicand& x, std::span<const std::vector<int>> orders,
                             Matrix& with_i, Matrix& without_i) const;

 protected:
  // Called with a non-empty subset of matching dimension.
  virtual double EvaluateNonEmpty(const Explicand& x,
                                  const FeatureSubset& s) const = 0;

  void CheckDim(const Explicand& x) const;
};

class ExactGaussianProvider final : public CoalitionProvider {
 public:
  ExactGaussianProvider(BlockGaussianSpec spec, LinearModel model);

  std::size_t dim() const override { return spec_.dim(); }
  ProviderKind kind() const override { return ProviderKind::kExactGaussian; }
  double grand_mean() const override { return model_.intercept; }
  double ConditionalExpectation(const Explicand& x,
                                const FeatureSubset& s) const override;

  const BlockGaussianSpec& spec() const { return spec_; }
  const LinearModel& model() const { return model_; }

 protected:
  double EvaluateNonEmpty(const Explicand& x, const FeatureSubset& s) const override;

 private:
  BlockGaussianSpec spec_;
  LinearModel model_;
};

// v(S) = surrogate(x masked to S) - background_mean, where background_mean is
// the empirical mean of f̂ over the surrogate's training split.
class SurrogateProvider final : public CoalitionProvider {
 public:
  SurrogateProvider(std::shared_ptr<const MaskedSurrogate> surrogate,
                    double background_mean);

  std::size_t dim() const override;
  ProviderKind kind() const override { return ProviderKind::kSurrogate; }
  double grand_mean() const override { return background_mean_; }
  double ConditionalExpectation(const Explicand& x,
                                const FeatureSubset& s) const override;

  void EvaluateWalk(const Explicand& x, int i, std::span<const int> order,
                    std::span<double> with_i,
                    std::span<double> without_i) const override;
  void EvaluateWalks(const Explicand& x, std::span<const std::vector<int>> orders,
                     Matrix& with_i, Matrix& without_i) const override;

  const MaskedSurrogate& surrogate() const { return *surrogate_; }

 protected:
  double EvaluateNonEmpty(const Explicand& x, const FeatureSubset& s) const override;

 private:
  std::shared_ptr<const MaskedSurrogate> surrogate_;
  double background_mean_;
};

// f̂ applied to x on S and μ off S.
double MeanMaskedPrediction(const PredictFn& predictor, const Explicand& x,
                            const FeatureSubset& s, const Vector& mu);

// v(S) = f̂(x_S, μ_{[d]\S}) - f̂(μ).
class MeanMaskedProvider final : public CoalitionProvider {
 public:
  MeanMaskedProvider(PredictFn predictor, Vector mu);

  std::size_t dim() const override { return static_cast<std::size_t>(mu_.size()); }
  ProviderKind kind() const override { return ProviderKind::kMeanMasked; }
  double grand_mean() const override { return baseline_; }
  double ConditionalExpectation(const Explicand& x,
                                const FeatureSubset& s) const override;

 protected:
  double EvaluateNonEmpty(const Explicand& x, const FeatureSubset& s) const override;

 private:
  PredictFn predictor_;
  Vector mu_;
  double baseline_;
};

}  // namespace semivalue

#endif  // SEMIVALUE_COALITION_H_
