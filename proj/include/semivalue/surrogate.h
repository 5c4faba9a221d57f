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

#ifndef SEMIVALUE_SURROGATE_H_
#define SEMIVALUE_SURROGATE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semivalue/core.h"

// A masked-input MLP estimating E[f̂(X) | X_S = x_S] for arbitrary S.
//
// Input layout (width 2d): standardized feature values with unobserved
// entries set to 0, followed by the 0/1 observation mask. Two ELU hidden
// layers, then a scalar (regression) or a softmax over two classes
// (classification, reported as P(y = 1)).
namespace semivalue {

enum class SurrogateTask { kRegression, kClassification };

std::string ToString(SurrogateTask task);
SurrogateTask SurrogateTaskFromString(const std::string& name);

struct SurrogateConfig {
  double learning_rate = 1e-3;
  int epochs = 100;
  int batch_size = 64;
  int hidden_units = 128;
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Matrix weights;  // out × in
  Vector bias;     // out
};

class MaskedSurrogate {
 public:
  // Randomly initialized network, uniform in ±1/sqrt(fan_in).
  MaskedSurrogate(std::size_t d, SurrogateTask task, int hidden_units,
                  std::uint64_t seed);

  std::size_t dim() const { return d_; }
  SurrogateTask task() const { return task_; }
  int hidden_units() const { return static_cast<int>(layers_[0].weights.rows()); }
  std::size_t output_width() const {
    return static_cast<std::size_t>(layers_[2].weights.rows());
  }

  // Regression value, or P(y = 1) for classification.
  double Predict(const Vector& x, const FeatureSubset& s) const;

  // Class-probability vector (classification) or the single regression value.
  Vector PredictOutputs(const Vector& x, const FeatureSubset& s) const;

  // The width-2d network input for (x, S).
  Vector NetworkInput(const Vector& x, const FeatureSubset& s) const;

  // Reported output (as Predict) for a raw network input.
  double ForwardInput(const Vector& input) const;

  // Analytic gradient of ForwardInput with respect to the network input.
  Vector InputGradient(const Vector& input) const;

  // Pre-activations of both hidden layers, used to locate ELU kinks.
  std::vector<Vector> HiddenPreactivations(const Vector& input) const;

  // Batched permutation walk; see CoalitionProvider::EvaluateWalk. Returns raw
  // surrogate outputs (no background mean subtracted); entries for S = ∅ are
  // not evaluated and left untouched.
  void EvaluateWalk(const Vector& x, int i, std::span<const int> order,
                    std::span<double> with_i, std::span<double> without_i) const;

  // All d walks sharing one first-layer setup; row i holds feature i's
  // walk (see CoalitionProvider::EvaluateWalks). Column 0 of without_i is
  // set to 0.
  void EvaluateWalks(const Vector& x, std::span<const std::vector<int>> orders,
                     Matrix& with_i, Matrix& without_i) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  const Vector& feature_mean() const { return feature_mean_; }
  const Vector& feature_scale() const { return feature_scale_; }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }
  double background_mean() const { return background_mean_; }

  void SetStandardization(Vector feature_mean, Vector feature_scale,
                          double target_mean, double target_scale);
  void set_background_mean(double value) { background_mean_ = value; }

  // Self-describing JSON checkpoint: magic string, format version, layer
  // shapes and weights (64-bit), standardization statistics, background mean.
  void Save(const std::string& path) const;
  static MaskedSurrogate Load(const std::string& path);

  static constexpr const char* kCheckpointMagic = "semivalue-masked-surrogate";
  static constexpr int kCheckpointVersion = 1;

 private:
  MaskedSurrogate() = default;

  // Network outputs (pre-destandardization logits or value) for a batch of
  // inputs stored column-wise.
  Matrix ForwardBatch(const Matrix& inputs) const;
  Matrix HeadFromPreactivation(const Matrix& first_preactivation) const;
  double Report(const Eigen::Ref<const Vector>& raw_output) const;
  // Observing feature k adds column k to the first pre-activation.
  Matrix FirstLayerContributions(const Vector& x) const;
  // Fills columns [offset, offset + 2d - 1) of `pre` for one walk: first the
  // d prefixes with i, then the d - 1 non-empty prefixes without i.
  void WalkPreactivations(const Matrix& contribution, int i, std::span<const int> order,
                          Matrix& pre, Eigen::Index offset) const;

  std::size_t d_ = 0;
  SurrogateTask task_ = SurrogateTask::kRegression;
  std::vector<DenseLayer> layers_;
  Vector feature_mean_;
  Vector feature_scale_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  double background_mean_ = 0.0;
};

struct TrainingHistory {
  std::vector<double> epoch_loss;
};

// Trains on rows of `data` (n × d, the surrogate split) against f̂(x).
// Masks are drawn fresh per example per epoch: |S| uniform on {0..d}, then S
// uniform among subsets of that size. Regression uses squared error on the
// standardized target; classification uses KL(f̂ || surrogate) over the two
// classes. Throws std::invalid_argument on an empty split or non-finite
// predictor outputs.
MaskedSurrogate TrainSurrogate(const Matrix& data, const PredictFn& predictor,
                               SurrogateTask task, const SurrogateConfig& config,
                               TrainingHistory* history = nullptr);

struct GradientCheckResult {
  double max_deviation = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_near_kink = 0;
};

// Central finite differences against InputGradient over every input
// coordinate, skipping coordinates whose ±epsilon perturbation moves any
// hidden pre-activation across 0. Requires epsilon in [1e-6, 1e-3].
GradientCheckResult FiniteDifferenceGradientCheck(const MaskedSurrogate& surrogate,
                                                  const Vector& x,
                                                  const FeatureSubset& mask,
                                                  double epsilon);

}  // namespace semivalue

#endif  // SEMIVALUE_SURROGATE_H_
