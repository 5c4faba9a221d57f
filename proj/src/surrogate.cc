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

#include "semivalue/surrogate.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace semivalue {

namespace {

using Array = Eigen::ArrayXXd;

Matrix Elu(const Matrix& z) {
  return (z.array().max(0.0) + (z.array().min(0.0).exp() - 1.0)).matrix();
}

// ELU'(z) expressed through the activation a = ELU(z).
Matrix EluDerivative(const Matrix& z, const Matrix& a) {
  return (z.array() > 0.0).select(Array::Ones(z.rows(), z.cols()), a.array() + 1.0)
      .matrix();
}

// P(y = 1) from two logits, computed without overflow.
double PositiveProbability(double logit0, double logit1) {
  const double diff = logit1 - logit0;
  if (diff >= 0) return 1.0 / (1.0 + std::exp(-diff));
  const double e = std::exp(diff);
  return e / (1.0 + e);
}

DenseLayer RandomLayer(Eigen::Index out, Eigen::Index in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  DenseLayer layer{Matrix(out, in), Vector(out)};
  for (Eigen::Index c = 0; c < in; ++c) {
    for (Eigen::Index r = 0; r < out; ++r) layer.weights(r, c) = u(rng);
  }
  for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = u(rng);
  return layer;
}

nlohmann::json VectorToJson(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector VectorFromJson(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string ToString(SurrogateTask task) {
  return task == SurrogateTask::kRegression ? "regression" : "classification";
}

SurrogateTask SurrogateTaskFromString(const std::string& name) {
  if (name == "regression") return SurrogateTask::kRegression;
  if (name == "classification") return SurrogateTask::kClassification;
  throw std::invalid_argument("unknown surrogate task: " + name);
}

MaskedSurrogate::MaskedSurrogate(std::size_t d, SurrogateTask task,
                                 int hidden_units, std::uint64_t seed)
    : d_(d), task_(task) {
  if (d < 1) throw std::invalid_argument("surrogate needs d >= 1");
  if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
  std::mt19937_64 rng(seed);
  const auto in = static_cast<Eigen::Index>(2 * d);
  const Eigen::Index out = task == SurrogateTask::kRegression ? 1 : 2;
  layers_.push_back(RandomLayer(hidden_units, in, rng));
  layers_.push_back(RandomLayer(hidden_units, hidden_units, rng));
  layers_.push_back(RandomLayer(out, hidden_units, rng));
  feature_mean_ = Vector::Zero(static_cast<Eigen::Index>(d));
  feature_scale_ = Vector::Ones(static_cast<Eigen::Index>(d));
}

void MaskedSurrogate::SetStandardization(Vector feature_mean, Vector feature_scale,
                                         double target_mean, double target_scale) {
  if (static_cast<std::size_t>(feature_mean.size()) != d_ ||
      static_cast<std::size_t>(feature_scale.size()) != d_) {
    throw std::invalid_argument("standardization statistics have wrong length");
  }
  if ((feature_scale.array() <= 0.0).any() || !(target_scale > 0.0)) {
    throw std::invalid_argument("standardization scales must be positive");
  }
  feature_mean_ = std::move(feature_mean);
  feature_scale_ = std::move(feature_scale);
  target_mean_ = target_mean;
  target_scale_ = target_scale;
}

Vector MaskedSurrogate::NetworkInput(const Vector& x, const FeatureSubset& s) const {
  if (static_cast<std::size_t>(x.size()) != d_ || s.dim() != d_) {
    throw std::invalid_argument("surrogate input dimension mismatch");
  }
  const auto d = static_cast<Eigen::Index>(d_);
  Vector input = Vector::Zero(2 * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!s.contains(static_cast<std::size_t>(k))) continue;
    input[k] = (x[k] - feature_mean_[k]) / feature_scale_[k];
    input[d + k] = 1.0;
  }
  return input;
}

Matrix MaskedSurrogate::HeadFromPreactivation(const Matrix& first_preactivation) const {
  const Matrix a1 = Elu(first_preactivation);
  Matrix z2 = layers_[1].weights * a1;
  z2.colwise() += layers_[1].bias;
  Matrix out = layers_[2].weights * Elu(z2);
  out.colwise() += layers_[2].bias;
  return out;
}

Matrix MaskedSurrogate::ForwardBatch(const Matrix& inputs) const {
  Matrix z1 = layers_[0].weights * inputs;
  z1.colwise() += layers_[0].bias;
  return HeadFromPreactivation(z1);
}

double MaskedSurrogate::Report(const Eigen::Ref<const Vector>& raw_output) const {
  if (task_ == SurrogateTask::kRegression) {
    return raw_output[0] * target_scale_ + target_mean_;
  }
  return PositiveProbability(raw_output[0], raw_output[1]);
}

double MaskedSurrogate::ForwardInput(const Vector& input) const {
  const Matrix raw = ForwardBatch(input);
  return Report(raw.col(0));
}

double MaskedSurrogate::Predict(const Vector& x, const FeatureSubset& s) const {
  return ForwardInput(NetworkInput(x, s));
}

Vector MaskedSurrogate::PredictOutputs(const Vector& x, const FeatureSubset& s) const {
  const Matrix raw = ForwardBatch(NetworkInput(x, s));
  if (task_ == SurrogateTask::kRegression) {
    Vector out(1);
    out[0] = Report(raw.col(0));
    return out;
  }
  const double p1 = Report(raw.col(0));
  Vector probs(2);
  probs << 1.0 - p1, p1;
  return probs;
}

std::vector<Vector> MaskedSurrogate::HiddenPreactivations(const Vector& input) const {
  Vector z1 = layers_[0].weights * input + layers_[0].bias;
  Vector z2 = layers_[1].weights * Elu(z1) + layers_[1].bias;
  return {std::move(z1), std::move(z2)};
}

Vector MaskedSurrogate::InputGradient(const Vector& input) const {
  const Vector z1 = layers_[0].weights * input + layers_[0].bias;
  const Vector a1 = Elu(z1);
  const Vector z2 = layers_[1].weights * a1 + layers_[1].bias;
  const Vector a2 = Elu(z2);
  const Vector out = layers_[2].weights * a2 + layers_[2].bias;

  Vector d_out(out.size());
  if (task_ == SurrogateTask::kRegression) {
    d_out[0] = target_scale_;
  } else {
    const double p = PositiveProbability(out[0], out[1]);
    d_out << -p * (1.0 - p), p * (1.0 - p);
  }
  const Vector g2 =
      (layers_[2].weights.transpose() * d_out).cwiseProduct(EluDerivative(z2, a2));
  const Vector g1 =
      (layers_[1].weights.transpose() * g2).cwiseProduct(EluDerivative(z1, a1));
  return layers_[0].weights.transpose() * g1;
}

Matrix MaskedSurrogate::FirstLayerContributions(const Vector& x) const {
  const auto d = static_cast<Eigen::Index>(d_);
  if (x.size() != d) throw std::invalid_argument("surrogate input dimension mismatch");
  const Matrix& w1 = layers_[0].weights;
  Matrix contribution(w1.rows(), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double z = (x[k] - feature_mean_[k]) / feature_scale_[k];
    contribution.col(k) = w1.col(k) * z + w1.col(d + k);
  }
  return contribution;
}

void MaskedSurrogate::WalkPreactivations(const Matrix& contribution, int i,
                                         std::span<const int> order, Matrix& pre,
                                         Eigen::Index offset) const {
  const auto d = static_cast<Eigen::Index>(d_);
  if (i < 0 || i >= d || order.size() + 1 != d_) {
    throw std::invalid_argument("walk order must list the other d - 1 features");
  }
  const Vector& bias = layers_[0].bias;
  Vector prefix = bias;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j == d - 1) {
      // [d] \ {i} summed in index order, so v([d] \ {i}) and v([d]) do not
      // depend on the sampled order.
      prefix = bias;
      for (Eigen::Index k = 0; k < d; ++k) {
        if (k != i) prefix += contribution.col(k);
      }
    }
    if (j > 0) pre.col(offset + d + j - 1) = prefix;
    pre.col(offset + j) = prefix + contribution.col(i);
    if (j + 1 < d) prefix += contribution.col(order[static_cast<std::size_t>(j)]);
  }
}

void MaskedSurrogate::EvaluateWalk(const Vector& x, int i, std::span<const int> order,
                                   std::span<double> with_i,
                                   std::span<double> without_i) const {
  const auto d = static_cast<Eigen::Index>(d_);
  if (with_i.size() != d_ || without_i.size() != d_) {
    throw std::invalid_argument("walk buffers must match the surrogate dimension");
  }
  Matrix pre(layers_[0].weights.rows(), 2 * d - 1);
  WalkPreactivations(FirstLayerContributions(x), i, order, pre, 0);
  const Matrix raw = HeadFromPreactivation(pre);
  for (Eigen::Index j = 0; j < d; ++j) {
    with_i[static_cast<std::size_t>(j)] = Report(raw.col(j));
    if (j > 0) without_i[static_cast<std::size_t>(j)] = Report(raw.col(d + j - 1));
  }
}

void MaskedSurrogate::EvaluateWalks(const Vector& x, std::span<const std::vector<int>> orders,
                                    Matrix& with_i, Matrix& without_i) const {
  const auto d = static_cast<Eigen::Index>(d_);
  if (orders.size() != d_) throw std::invalid_argument("need one order per feature");
  const Matrix contribution = FirstLayerContributions(x);
  const Eigen::Index width = 2 * d - 1;
  with_i.resize(d, d);
  without_i.resize(d, d);
  // One forward pass per walk; wider batches measured slower (cache).
  Matrix pre(layers_[0].weights.rows(), width);
  for (Eigen::Index i = 0; i < d; ++i) {
    WalkPreactivations(contribution, static_cast<int>(i), orders[static_cast<std::size_t>(i)],
                       pre, 0);
    const Matrix raw = HeadFromPreactivation(pre);
    for (Eigen::Index j = 0; j < d; ++j) with_i(i, j) = Report(raw.col(j));
    without_i(i, 0) = 0.0;
    for (Eigen::Index j = 1; j < d; ++j) without_i(i, j) = Report(raw.col(d + j - 1));
  }
}

void MaskedSurrogate::Save(const std::string& path) const {
  nlohmann::json j;
  j["magic"] = kCheckpointMagic;
  j["version"] = kCheckpointVersion;
  j["task"] = ToString(task_);
  j["d"] = d_;
  j["hidden_units"] = hidden_units();
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : layers_) {
    const std::vector<double> w(layer.weights.data(),
                                layer.weights.data() + layer.weights.size());
    layers.push_back({{"rows", layer.weights.rows()},
                      {"cols", layer.weights.cols()},
                      {"weights_column_major", w},
                      {"bias", VectorToJson(layer.bias)}});
  }
  j["layers"] = std::move(layers);
  j["feature_mean"] = VectorToJson(feature_mean_);
  j["feature_scale"] = VectorToJson(feature_scale_);
  j["target_mean"] = target_mean_;
  j["target_scale"] = target_scale_;
  j["background_mean"] = background_mean_;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write surrogate checkpoint: " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing surrogate checkpoint: " + path);
}

MaskedSurrogate MaskedSurrogate::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read surrogate checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed surrogate checkpoint " + path + ": " + e.what());
  }
  if (j.value("magic", std::string()) != kCheckpointMagic) {
    throw std::runtime_error("not a surrogate checkpoint: " + path);
  }
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported surrogate checkpoint version in " + path);
  }
  MaskedSurrogate s;
  s.d_ = j.at("d").get<std::size_t>();
  s.task_ = SurrogateTaskFromString(j.at("task").get<std::string>());
  for (const auto& layer : j.at("layers")) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("weights_column_major").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols) {
      throw std::runtime_error("layer shape does not match its weights in " + path);
    }
    DenseLayer dense{Eigen::Map<const Matrix>(w.data(), rows, cols),
                     VectorFromJson(layer.at("bias"))};
    s.layers_.push_back(std::move(dense));
  }
  const auto expected_in = static_cast<Eigen::Index>(2 * s.d_);
  if (s.layers_.size() != 3 || s.layers_[0].weights.cols() != expected_in) {
    throw std::runtime_error("unexpected network layout in " + path);
  }
  s.feature_mean_ = VectorFromJson(j.at("feature_mean"));
  s.feature_scale_ = VectorFromJson(j.at("feature_scale"));
  s.target_mean_ = j.at("target_mean").get<double>();
  s.target_scale_ = j.at("target_scale").get<double>();
  s.background_mean_ = j.at("background_mean").get<double>();
  return s;
}

namespace {

struct AdamState {
  Matrix m_w, v_w;
  Vector m_b, v_b;
};

// Draws |S| uniform on {0..d}, then a uniform subset of that size.
void SampleMask(std::size_t d, std::mt19937_64& rng, std::vector<int>& scratch,
                Eigen::Ref<Vector> mask) {
  std::uniform_int_distribution<std::size_t> size_dist(0, d);
  const std::size_t size = size_dist(rng);
  std::iota(scratch.begin(), scratch.end(), 0);
  mask.setZero();
  for (std::size_t k = 0; k < size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, d - 1);
    std::swap(scratch[k], scratch[pick(rng)]);
    mask[scratch[k]] = 1.0;
  }
}

}  // namespace

MaskedSurrogate TrainSurrogate(const Matrix& data, const PredictFn& predictor,
                               SurrogateTask task, const SurrogateConfig& config,
                               TrainingHistory* history) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("surrogate training split is empty");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.learning_rate > 0)) {
    throw std::invalid_argument("invalid surrogate training configuration");
  }

  Vector targets(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    targets[r] = predictor(data.row(r).transpose());
    if (!std::isfinite(targets[r])) {
      throw std::invalid_argument("predictor returned a non-finite value on row " +
                                  std::to_string(r));
    }
    if (task == SurrogateTask::kClassification &&
        (targets[r] < 0.0 || targets[r] > 1.0)) {
      throw std::invalid_argument("classification predictor must return probabilities");
    }
  }

  MaskedSurrogate surrogate(static_cast<std::size_t>(d), task, config.hidden_units,
                            config.seed);
  const Vector mean = data.colwise().mean().transpose();
  Vector scale = ((data.rowwise() - mean.transpose()).array().square().colwise().sum() /
                  static_cast<double>(n))
                     .sqrt()
                     .matrix()
                     .transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(scale[k] > 1e-12)) scale[k] = 1.0;
  }
  double target_mean = 0.0;
  double target_scale = 1.0;
  if (task == SurrogateTask::kRegression) {
    target_mean = targets.mean();
    const double sd = std::sqrt((targets.array() - target_mean).square().mean());
    target_scale = sd > 1e-12 ? sd : 1.0;
  }
  surrogate.SetStandardization(mean, scale, target_mean, target_scale);
  surrogate.set_background_mean(targets.mean());

  const Matrix standardized =
      ((data.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
          .matrix();
  const Vector scaled_targets = (targets.array() - target_mean) / target_scale;

  std::vector<DenseLayer>& layers = surrogate.mutable_layers();
  std::vector<AdamState> adam;
  for (const DenseLayer& layer : layers) {
    adam.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                    Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                    Vector::Zero(layer.bias.size()), Vector::Zero(layer.bias.size())});
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  long step = 0;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> row_order(static_cast<std::size_t>(n));
  std::iota(row_order.begin(), row_order.end(), 0);
  std::vector<int> scratch(static_cast<std::size_t>(d));
  Vector mask(d);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(row_order.begin(), row_order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index begin = 0; begin < n; begin += config.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - begin);
      Matrix input(2 * d, b);
      for (Eigen::Index c = 0; c < b; ++c) {
        const Eigen::Index row = row_order[static_cast<std::size_t>(begin + c)];
        SampleMask(static_cast<std::size_t>(d), rng, scratch, mask);
        input.col(c).head(d) = standardized.row(row).transpose().cwiseProduct(mask);
        input.col(c).tail(d) = mask;
      }

      Matrix z1 = layers[0].weights * input;
      z1.colwise() += layers[0].bias;
      const Matrix a1 = Elu(z1);
      Matrix z2 = layers[1].weights * a1;
      z2.colwise() += layers[1].bias;
      const Matrix a2 = Elu(z2);
      Matrix out = layers[2].weights * a2;
      out.colwise() += layers[2].bias;

      Matrix d_out(out.rows(), b);
      double loss = 0.0;
      for (Eigen::Index c = 0; c < b; ++c) {
        const Eigen::Index row = row_order[static_cast<std::size_t>(begin + c)];
        if (task == SurrogateTask::kRegression) {
          const double err = out(0, c) - scaled_targets[row];
          loss += err * err;
          d_out(0, c) = 2.0 * err / static_cast<double>(b);
        } else {
          const double p1 = targets[row];
          const double q1 = PositiveProbability(out(0, c), out(1, c));
          const double q0 = 1.0 - q1;
          const double p0 = 1.0 - p1;
          auto kl = [](double p, double q) {
            return p > 0.0 ? p * (std::log(p) - std::log(std::max(q, 1e-300))) : 0.0;
          };
          loss += kl(p0, q0) + kl(p1, q1);
          d_out(0, c) = (q0 - p0) / static_cast<double>(b);
          d_out(1, c) = (q1 - p1) / static_cast<double>(b);
        }
      }
      epoch_loss += loss;

      const Matrix g2 = (layers[2].weights.transpose() * d_out).cwiseProduct(EluDerivative(z2, a2));
      const Matrix g1 = (layers[1].weights.transpose() * g2).cwiseProduct(EluDerivative(z1, a1));
      const Matrix grads_w[3] = {g1 * input.transpose(), g2 * a1.transpose(),
                                 d_out * a2.transpose()};
      const Vector grads_b[3] = {g1.rowwise().sum(), g2.rowwise().sum(),
                                 d_out.rowwise().sum()};

      ++step;
      const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      const double lr = config.learning_rate;
      for (std::size_t l = 0; l < 3; ++l) {
        AdamState& st = adam[l];
        st.m_w = kBeta1 * st.m_w + (1.0 - kBeta1) * grads_w[l];
        st.v_w = kBeta2 * st.v_w + (1.0 - kBeta2) * grads_w[l].cwiseAbs2();
        st.m_b = kBeta1 * st.m_b + (1.0 - kBeta1) * grads_b[l];
        st.v_b = kBeta2 * st.v_b + (1.0 - kBeta2) * grads_b[l].cwiseAbs2();
        layers[l].weights.array() -=
            lr * (st.m_w.array() / correction1) /
            ((st.v_w.array() / correction2).sqrt() + kAdamEps);
        layers[l].bias.array() -=
            lr * (st.m_b.array() / correction1) /
            ((st.v_b.array() / correction2).sqrt() + kAdamEps);
      }
    }
    if (history) history->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return surrogate;
}

GradientCheckResult FiniteDifferenceGradientCheck(const MaskedSurrogate& surrogate,
                                                  const Vector& x,
                                                  const FeatureSubset& mask,
                                                  double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw std::invalid_argument("epsilon must lie in [1e-6, 1e-3]");
  }
  const Vector input = surrogate.NetworkInput(x, mask);
  const Vector analytic = surrogate.InputGradient(input);

  auto crosses_kink = [&](const Vector& lo, const Vector& hi) {
    const auto pre_lo = surrogate.HiddenPreactivations(lo);
    const auto pre_hi = surrogate.HiddenPreactivations(hi);
    for (std::size_t l = 0; l < pre_lo.size(); ++l) {
      if (((pre_lo[l].array() > 0.0) != (pre_hi[l].array() > 0.0)).any()) return true;
    }
    return false;
  };

  GradientCheckResult result;
  for (Eigen::Index c = 0; c < input.size(); ++c) {
    Vector plus = input;
    Vector minus = input;
    plus[c] += epsilon;
    minus[c] -= epsilon;
    if (crosses_kink(minus, plus)) {
      ++result.skipped_near_kink;
      continue;
    }
    const double numeric =
        (surrogate.ForwardInput(plus) - surrogate.ForwardInput(minus)) / (2.0 * epsilon);
    result.max_deviation = std::max(result.max_deviation, std::abs(numeric - analytic[c]));
    ++result.checked;
  }
  return result;
}

}  // namespace semivalue
