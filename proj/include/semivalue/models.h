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


#ifndef SEMIVALUE_MODELS_H_
#define SEMIVALUE_MODELS_H_

#include <string>

#include "json.hpp"
#include "semivalue/core.h"
#include "semivalue/gaussian_linear.h"

// Built-in predictors f̂: least squares and logistic regression.
namespace semivalue {

// Ordinary least squares with intercept, solved by column-pivoting QR.
LinearModel FitLeastSquares(const Matrix& x, const Vector& y);

// P(y = 1 | x) = σ(β₀ + xᵀβ).
struct LogisticModel {
  double intercept = 0.0;
  Vector coefficients;

  double Logit(const Vector& x) const { return intercept + x.dot(coefficients); }
  double Predict(const Vector& x) const;
};

// Overflow-safe logistic function.
double Sigmoid(double z);

// Newton-Raphson (IRLS) on the log-likelihood with a small ridge term
// `l2` on the slopes for separable data. Throws on non-0/1 labels.
LogisticModel FitLogistic(const Matrix& x, const Vector& y, double l2 = 1e-6,
                          int max_iterations = 100);

// A fitted model of either kind, serializable to JSON.
struct FittedModel {
  std::string kind;  // "linear" or "logistic"
  double intercept = 0.0;
  Vector coefficients;

  PredictFn Predictor() const;
  LinearModel AsLinear() const { return {intercept, coefficients}; }
};

nlohmann::json ToJson(const FittedModel& model);
FittedModel FittedModelFromJson(const nlohmann::json& j);

}  // namespace semivalue

#endif  // SEMIVALUE_MODELS_H_
