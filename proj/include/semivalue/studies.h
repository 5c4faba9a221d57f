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


#ifndef SEMIVALUE_STUDIES_H_
#define SEMIVALUE_STUDIES_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "semivalue/attribution.h"
#include "semivalue/datagen.h"
#include "semivalue/gaussian_linear.h"
#include "semivalue/mc_estimator.h"
#include "semivalue/surrogate.h"

// End-to-end experiments on exchangeable Gaussian data with a fitted linear
// predictor, shared by the CLI recipes and the acceptance suite.
namespace semivalue {

// f̂ = 1.5 x₁ + x₂.
LinearModel TwoFeatureExampleModel();

struct DisagreementStudy {
  double rho = 0.0;
  std::vector<Vector> grid;
  DisagreementRegion region;
};

DisagreementStudy RunDisagreementGrid(double rho, const LinearModel& model, double lo,
                                      double hi, double step);

struct GaussianStudyParams {
  int d = 100;
  double rho = 0.6;
  std::size_t n = 10000;
  std::size_t n_explicands = 100;
  // "default": (1.00, 0.99, ..., 0.81, 0, ...); "unit-variance": the same
  // direction scaled so Var(Xᵀβ*) = 1.
  std::string beta = "default";
  double noise_sd = 2.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

Vector StudyBeta(const GaussianStudyParams& params);

// Generated data, least-squares f̂ fitted on the training split, and the first
// n_explicands test rows.
struct GaussianStudyData {
  Dataset data;
  BlockGaussianSpec spec;
  LinearModel model;
  std::vector<std::size_t> explicand_rows;
  std::vector<Explicand> explicands;
};

GaussianStudyData PrepareGaussianStudy(const GaussianStudyParams& params);

// Per-explicand AUPs and recovery curves (k = 0..d) of one attribution method.
struct MethodCurves {
  std::string method;
  std::vector<double> aup;
  std::vector<Vector> curves;
  double MeanAup() const;
  double StandardError() const;
};

struct ExactCurvesStudy {
  std::vector<MethodCurves> methods;  // shapley, delta_d, weightedshap
  std::vector<std::string> chosen_weights;
  // Share of k in 1..d-1 where Δ_d's mean curve is strictly below Shapley's.
  double delta_d_below_shapley_fraction = 0.0;
};

// Exact contributions and the exact provider throughout.
ExactCurvesStudy RunExactCurvesStudy(const GaussianStudyData& study,
                                     const std::string& weight_set, int workers);

struct SampledStudyParams {
  GaussianStudyParams gaussian;
  SurrogateConfig surrogate;
  ConvergenceConfig convergence;
  std::string weight_set = "default";
};

struct SampledStudy {
  // AUPs under the surrogate conditional expectation (the utility used for
  // weight selection) and under the exact one.
  std::vector<MethodCurves> surrogate_eval;
  std::vector<MethodCurves> exact_eval;
  std::vector<std::string> chosen_weights;
  // Mean over features of RelativeDifference(Δ̂_j(x_i), Δ_j(x_i)); one row
  // per explicand, one column per j.
  Matrix relative_error;
  Vector mean_relative_error;
  std::vector<McDiagnostics> diagnostics;
  std::size_t non_converged = 0;
  std::vector<double> training_loss;
  double surrogate_seconds = 0.0;
  double sampling_seconds = 0.0;
};

// Masked surrogate trained on the surrogate split, sampled contributions from
// it, WeightedSHAP with neg-AUP on the surrogate.
SampledStudy RunSampledStudy(const GaussianStudyData& study, const SampledStudyParams& params);

}  // namespace semivalue

#endif  // SEMIVALUE_STUDIES_H_
