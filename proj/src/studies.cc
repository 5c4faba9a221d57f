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


#include "semivalue/studies.h"

#include <array>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "semivalue/coalition.h"
#include "semivalue/evaluation.h"
#include "semivalue/models.h"
#include "semivalue/parallel.h"
#include "semivalue/weights.h"

namespace semivalue {

namespace {

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<MethodCurves> EmptyMethods(std::size_t n) {
  std::vector<MethodCurves> methods(3);
  methods[0].method = "shapley";
  methods[1].method = "delta_d";
  methods[2].method = "weightedshap";
  for (MethodCurves& m : methods) {
    m.aup.resize(n);
    m.curves.resize(n);
  }
  return methods;
}

// Fills slot `n` of each method from the three attributions.
void RecordCurves(std::vector<MethodCurves>& methods, std::size_t n,
                  const std::array<Vector, 3>& phis, const Explicand& x,
                  const CoalitionProvider& provider, double full_prediction) {
  for (std::size_t m = 0; m < 3; ++m) {
    CurveResult r = Aup(phis[m], x, provider, full_prediction);
    methods[m].aup[n] = r.area;
    methods[m].curves[n] = std::move(r.curve.points);
  }
}

}  // namespace

LinearModel TwoFeatureExampleModel() {
  Vector beta(2);
  beta << 1.5, 1.0;
  return {0.0, beta};
}

DisagreementStudy RunDisagreementGrid(double rho, const LinearModel& model, double lo,
                                      double hi, double step) {
  DisagreementStudy study;
  study.rho = rho;
  study.grid = SquareGrid(lo, hi, step);
  study.region =
      ShapleyDisagreementRegion(BlockGaussianSpec::Exchangeable(2, rho), model, study.grid);
  return study;
}

Vector StudyBeta(const GaussianStudyParams& params) {
  Vector beta = DefaultRegressionBeta(params.d);
  if (params.beta == "default") return beta;
  if (params.beta == "unit-variance") {
    return beta / std::sqrt(ExchangeableLinearVariance(beta, params.rho));
  }
  throw std::invalid_argument("unknown beta spec: " + params.beta);
}

GaussianStudyData PrepareGaussianStudy(const GaussianStudyParams& params) {
  Dataset data = GenerateExchangeableRegression(params.n, params.d, params.rho,
                                                StudyBeta(params), params.noise_sd,
                                                params.seed);
  data.parameters["beta"] = params.beta;
  LinearModel model = FitLeastSquares(data.Rows(Split::kTrain), data.Labels(Split::kTrain));
  std::vector<std::size_t> rows = data.Indices(Split::kTest);
  if (rows.size() < params.n_explicands) {
    throw std::invalid_argument("test split has fewer rows than requested explicands");
  }
  rows.resize(params.n_explicands);
  std::vector<Explicand> explicands;
  for (std::size_t r : rows) {
    explicands.emplace_back(data.x.row(static_cast<Eigen::Index>(r)).transpose(),
                            data.y[static_cast<Eigen::Index>(r)]);
  }
  return {std::move(data), BlockGaussianSpec::Exchangeable(params.d, params.rho),
          std::move(model), std::move(rows), std::move(explicands)};
}

double MethodCurves::MeanAup() const {
  double total = 0.0;
  for (double a : aup) total += a;
  return aup.empty() ? 0.0 : total / static_cast<double>(aup.size());
}

double MethodCurves::StandardError() const {
  if (aup.size() < 2) return 0.0;
  const double mean = MeanAup();
  double ss = 0.0;
  for (double a : aup) ss += (a - mean) * (a - mean);
  const auto n = static_cast<double>(aup.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

ExactCurvesStudy RunExactCurvesStudy(const GaussianStudyData& study,
                                     const std::string& weight_set, int workers) {
  const int d = static_cast<int>(study.spec.dim());
  const ExactContributionEngine engine(study.spec, study.model);
  const ExactGaussianProvider provider(study.spec, study.model);
  const std::vector<SemivalueWeights> candidates = NamedWeightSet(weight_set, d);
  const SemivalueWeights shapley = UniformWeights(d);
  const SemivalueWeights delta_d = OneHotWeights(d, d);
  const LinearModel model = study.model;
  UtilitySpec utility;
  utility.kind = UtilityKind::kNegAup;
  utility.provider = &provider;
  utility.predictor = [model](const Vector& v) { return model.Predict(v); };

  const std::size_t n = study.explicands.size();
  ExactCurvesStudy out;
  out.methods = EmptyMethods(n);
  out.chosen_weights.resize(n);
  ParallelFor(n, workers, [&](std::size_t k) {
    const Explicand& x = study.explicands[k];
    const MarginalContributionMatrix mc = engine.Compute(x);
    const AttributionReport report = SelectWeight(mc, candidates, utility, x);
    out.chosen_weights[k] = report.chosen_weight.label();
    RecordCurves(out.methods, k,
                 {Combine(mc, shapley).phi, Combine(mc, delta_d).phi, report.phi.phi}, x,
                 provider, model.Predict(x.values()));
  });

  const CurveBand shap = AggregateCurves(out.methods[0].curves, "shapley");
  const CurveBand dd = AggregateCurves(out.methods[1].curves, "delta_d");
  int below = 0;
  for (int k = 1; k < d; ++k) below += dd.mean[k] < shap.mean[k] ? 1 : 0;
  out.delta_d_below_shapley_fraction = static_cast<double>(below) / (d - 1);
  return out;
}

SampledStudy RunSampledStudy(const GaussianStudyData& study,
                             const SampledStudyParams& params) {
  const int d = static_cast<int>(study.spec.dim());
  const LinearModel model = study.model;
  const PredictFn predictor = [model](const Vector& v) { return model.Predict(v); };

  SampledStudy out;
  auto start = std::chrono::steady_clock::now();
  TrainingHistory history;
  auto surrogate = std::make_shared<const MaskedSurrogate>(
      TrainSurrogate(study.data.Rows(Split::kSurrogate), predictor,
                     SurrogateTask::kRegression, params.surrogate, &history));
  out.training_loss = history.epoch_loss;
  out.surrogate_seconds = Seconds(start);

  const SurrogateProvider sampled_provider(surrogate, surrogate->background_mean());
  const ExactGaussianProvider exact_provider(study.spec, study.model);
  const ExactContributionEngine engine(study.spec, study.model);
  const std::vector<SemivalueWeights> candidates = NamedWeightSet(params.weight_set, d);
  const SemivalueWeights shapley = UniformWeights(d);
  const SemivalueWeights delta_d = OneHotWeights(d, d);
  UtilitySpec utility;
  utility.kind = UtilityKind::kNegAup;
  utility.provider = &sampled_provider;
  utility.predictor = predictor;

  const std::size_t n = study.explicands.size();
  out.surrogate_eval = EmptyMethods(n);
  out.exact_eval = EmptyMethods(n);
  out.chosen_weights.resize(n);
  out.relative_error.resize(static_cast<Eigen::Index>(n), d);
  out.diagnostics.resize(n);

  start = std::chrono::steady_clock::now();
  ParallelFor(n, params.gaussian.workers, [&](std::size_t k) {
    const Explicand& x = study.explicands[k];
    ConvergenceConfig convergence = params.convergence;
    convergence.seed = params.convergence.seed + k;
    McResult mc = SampleMarginalContributions(sampled_provider, x, convergence);
    out.diagnostics[k] = mc.diagnostics;

    const MarginalContributionMatrix exact = engine.Compute(x);
    for (int j = 0; j < d; ++j) {
      double total = 0.0;
      for (int i = 0; i < d; ++i) {
        total += RelativeDifference(mc.estimate.values()(i, j), exact.values()(i, j));
      }
      out.relative_error(static_cast<Eigen::Index>(k), j) = total / d;
    }

    const AttributionReport report = SelectWeight(mc.estimate, candidates, utility, x);
    out.chosen_weights[k] = report.chosen_weight.label();
    const std::array<Vector, 3> phis = {Combine(mc.estimate, shapley).phi,
                                        Combine(mc.estimate, delta_d).phi, report.phi.phi};
    const double full = predictor(x.values());
    RecordCurves(out.surrogate_eval, k, phis, x, sampled_provider, full);
    RecordCurves(out.exact_eval, k, phis, x, exact_provider, full);
  });
  out.sampling_seconds = Seconds(start);
  out.mean_relative_error = out.relative_error.colwise().mean().transpose();
  for (const McDiagnostics& diag : out.diagnostics) out.non_converged += diag.converged ? 0 : 1;
  return out;
}

}  // namespace semivalue
