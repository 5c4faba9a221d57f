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


#include "semivalue/models.h"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace semivalue {

namespace {

Matrix WithInterceptColumn(const Matrix& x) {
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

void CheckShapes(const Matrix& x, const Vector& y) {
  if (x.rows() == 0 || x.rows() != y.size()) {
    throw std::invalid_argument("design matrix and targets disagree in length");
  }
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite training data");
}

}  // namespace

LinearModel FitLeastSquares(const Matrix& x, const Vector& y) {
  CheckShapes(x, y);
  const Vector coef = WithInterceptColumn(x).colPivHouseholderQr().solve(y);
  return {coef[0], coef.tail(x.cols())};
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticModel::Predict(const Vector& x) const { return Sigmoid(Logit(x)); }

LogisticModel FitLogistic(const Matrix& x, const Vector& y, double l2, int max_iterations) {
  CheckShapes(x, y);
  for (Eigen::Index n = 0; n < y.size(); ++n) {
    if (y[n] != 0.0 && y[n] != 1.0) throw std::invalid_argument("logistic labels must be 0/1");
  }
  const Matrix design = WithInterceptColumn(x);
  const Eigen::Index p = design.cols();
  Vector coef = Vector::Zero(p);
  Vector ridge = Vector::Constant(p, l2 * static_cast<double>(x.rows()));
  ridge[0] = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector eta = design * coef;
    Vector prob(eta.size());
    Vector weight(eta.size());
    for (Eigen::Index n = 0; n < eta.size(); ++n) {
      prob[n] = Sigmoid(eta[n]);
      weight[n] = std::max(prob[n] * (1.0 - prob[n]), 1e-12);
    }
    const Vector grad = design.transpose() * (y - prob) - ridge.cwiseProduct(coef);
    Matrix hessian = design.transpose() * weight.asDiagonal() * design;
    hessian.diagonal() += ridge;
    const Vector step = hessian.ldlt().solve(grad);
    coef += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  return {coef[0], coef.tail(x.cols())};
}

PredictFn FittedModel::Predictor() const {
  if (kind == "linear") {
    const LinearModel m{intercept, coefficients};
    return [m](const Vector& v) { return m.Predict(v); };
  }
  if (kind == "logistic") {
    const LogisticModel m{intercept, coefficients};
    return [m](const Vector& v) { return m.Predict(v); };
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

nlohmann::json ToJson(const FittedModel& model) {
  return {{"kind", model.kind},
          {"intercept", model.intercept},
          {"coefficients", std::vector<double>(model.coefficients.data(),
                                               model.coefficients.data() +
                                                   model.coefficients.size())}};
}

FittedModel FittedModelFromJson(const nlohmann::json& j) {
  const auto c = j.at("coefficients").get<std::vector<double>>();
  FittedModel m{j.at("kind").get<std::string>(), j.at("intercept").get<double>(),
                Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()))};
  if (m.kind != "linear" && m.kind != "logistic") {
    throw std::invalid_argument("unknown model kind: " + m.kind);
  }
  return m;
}

}  // namespace semivalue
