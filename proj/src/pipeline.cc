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


#include "semivalue/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <utility>

#include "semivalue/attribution.h"
#include "semivalue/coalition.h"
#include "semivalue/datagen.h"
#include "semivalue/evaluation.h"
#include "semivalue/gaussian_linear.h"
#include "semivalue/mc_estimator.h"
#include "semivalue/models.h"
#include "semivalue/parallel.h"
#include "semivalue/studies.h"
#include "semivalue/surrogate.h"
#include "semivalue/svg_plot.h"
#include "semivalue/weights.h"

namespace semivalue {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr int kBootstrapResamples = 200;
const std::array<std::string, 3> kMethods = {"shapley", "delta_d", "weightedshap"};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// ---- files ----------------------------------------------------------------

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir + ": " + ec.message());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::vector<double> ToStd(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector FromStd(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---- config access ----------------------------------------------------------

std::uint64_t Seed(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

std::string Str(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }

double Num(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(key) + " must be finite");
  return x;
}

long long Int(const json& cfg, const char* key, long long lo) {
  const json& v = cfg.at(key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string(key) + " must be an integer");
  }
  const long long x = v.get<long long>();
  if (x < lo) {
    throw std::invalid_argument(std::string(key) + " must be >= " + std::to_string(lo));
  }
  return x;
}

ConvergenceConfig Convergence(const json& cfg) {
  ConvergenceConfig c;
  c.n_chains = static_cast<int>(Int(cfg, "n_chains", 2));
  c.threshold = Num(cfg, "threshold");
  c.min_iterations = static_cast<int>(Int(cfg, "min_iterations", 1));
  c.max_iterations = static_cast<int>(Int(cfg, "max_iterations", 1));
  c.seed = Seed(cfg);
  c.Validate();
  return c;
}

SurrogateConfig SurrogateSettings(const json& cfg) {
  SurrogateConfig s;
  s.hidden_units = static_cast<int>(Int(cfg, "hidden_units", 1));
  s.epochs = static_cast<int>(Int(cfg, "epochs", 1));
  s.batch_size = static_cast<int>(Int(cfg, "batch_size", 1));
  s.learning_rate = Num(cfg, "learning_rate");
  if (!(s.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  s.seed = Seed(cfg);
  return s;
}

json RunRecord(const std::string& command, const json& cfg, const RunOptions& options) {
  return {{"format_version", kFormatVersion},
          {"command", command},
          {"config", cfg},
          {"manifest_hash", ManifestHash(command, cfg)},
          {"record_timing", options.record_timing}};
}

void Log(const RunOptions& options, const std::string& line) {
  if (options.log) *options.log << "[semivalue] " << line << "\n";
}

// ---- dataset and model loading --------------------------------------------

struct DatasetFiles {
  fs::path csv;
  fs::path manifest;
};

DatasetFiles LocateDataset(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("a dataset (--data) is required");
  const fs::path p(path);
  if (fs::is_directory(p)) return {p / "data.csv", p / "dataset.json"};
  return {p, p.parent_path() / "dataset.json"};
}

Dataset LoadDataset(const std::string& path) {
  const DatasetFiles files = LocateDataset(path);
  if (!fs::exists(files.csv)) throw IoError("dataset file not found: " + files.csv.string());
  Dataset data = ReadDatasetCsv(files.csv.string());
  const json manifest = ReadJsonFile(files.manifest);
  data.task = manifest.at("task").get<std::string>();
  data.parameters = manifest.value("parameters", json::object());
  data.standardized = manifest.value("standardized", false);
  if (data.standardized) {
    data.feature_mean = FromStd(manifest.at("feature_mean").get<std::vector<double>>());
    data.feature_scale = FromStd(manifest.at("feature_scale").get<std::vector<double>>());
  }
  if (data.task != "regression" && data.task != "classification") {
    throw std::invalid_argument("dataset task must be regression or classification");
  }
  return data;
}

void SaveDataset(const Dataset& data, const fs::path& dir) {
  WriteDatasetCsv(data, (dir / "data.csv").string());
  WriteJson(dir / "dataset.json", DatasetManifest(data));
}

FittedModel FitModel(const Dataset& data, std::string kind) {
  if (kind == "auto") kind = data.task == "classification" ? "logistic" : "linear";
  const Matrix x = data.Rows(Split::kTrain);
  const Vector y = data.Labels(Split::kTrain);
  if (kind == "linear") {
    LinearModel m = FitLeastSquares(x, y);
    return {"linear", m.intercept, m.coefficients};
  }
  if (kind == "logistic") {
    if (data.task != "classification") {
      throw std::invalid_argument("a logistic model needs a classification dataset");
    }
    LogisticModel m = FitLogistic(x, y);
    return {"logistic", m.intercept, m.coefficients};
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

Vector TrainingMeans(const Dataset& data) {
  return data.Rows(Split::kTrain).colwise().mean().transpose();
}

// Everything an attribution or evaluation run needs, rebuilt from config.
struct Setup {
  Dataset data;
  FittedModel model;
  PredictFn predictor;
  std::unique_ptr<CoalitionProvider> provider;
  std::string provider_name;
  Vector mu;
};

std::unique_ptr<CoalitionProvider> MakeProvider(const std::string& kind, const Dataset& data,
                                                const FittedModel& model,
                                                const std::string& model_dir, const Vector& mu) {
  const int d = static_cast<int>(data.dim());
  if (kind == "exact") {
    const json& p = data.parameters;
    if (p.value("kind", std::string()) != "exchangeable-regression" ||
        p.value("augmented", false) || data.standardized) {
      throw std::invalid_argument(
          "the exact provider needs unaugmented generated exchangeable-regression data");
    }
    if (model.kind != "linear") {
      throw std::invalid_argument("the exact provider needs a linear model");
    }
    return std::make_unique<ExactGaussianProvider>(
        BlockGaussianSpec::Exchangeable(d, p.at("rho").get<double>()), model.AsLinear());
  }
  if (kind == "surrogate") {
    if (model_dir.empty()) {
      throw std::invalid_argument("the surrogate provider needs --model <train-surrogate dir>");
    }
    const fs::path path = fs::path(model_dir) / "surrogate.json";
    if (!fs::exists(path)) throw IoError("surrogate checkpoint not found: " + path.string());
    auto surrogate =
        std::make_shared<const MaskedSurrogate>(MaskedSurrogate::Load(path.string()));
    if (static_cast<int>(surrogate->dim()) != d) {
      throw std::invalid_argument("surrogate dimension does not match the dataset");
    }
    return std::make_unique<SurrogateProvider>(surrogate, surrogate->background_mean());
  }
  if (kind == "mean-masked") return std::make_unique<MeanMaskedProvider>(model.Predictor(), mu);
  throw std::invalid_argument("unknown provider: " + kind);
}

Setup BuildSetup(const json& cfg) {
  Setup s;
  s.data = LoadDataset(Str(cfg, "data"));
  const std::string model_dir = Str(cfg, "model");
  if (model_dir.empty()) {
    s.model = FitModel(s.data, "auto");
  } else {
    s.model = FittedModelFromJson(ReadJsonFile(fs::path(model_dir) / "model.json"));
    if (s.model.coefficients.size() != static_cast<Eigen::Index>(s.data.dim())) {
      throw std::invalid_argument("model dimension does not match the dataset");
    }
  }
  s.predictor = s.model.Predictor();
  s.mu = TrainingMeans(s.data);
  s.provider_name = Str(cfg, "provider");
  s.provider = MakeProvider(s.provider_name, s.data, s.model, model_dir, s.mu);
  return s;
}

std::vector<std::size_t> ExplicandRows(const Dataset& data, const json& cfg) {
  const auto n = static_cast<std::size_t>(Int(cfg, "n_explicands", 1));
  std::vector<std::size_t> rows = data.Indices(Split::kTest);
  if (rows.size() < n) {
    throw std::invalid_argument("test split has " + std::to_string(rows.size()) +
                                " rows, fewer than n_explicands");
  }
  rows.resize(n);
  return rows;
}

Explicand RowExplicand(const Dataset& data, std::size_t r) {
  const auto i = static_cast<Eigen::Index>(r);
  return Explicand(data.x.row(i).transpose(), data.y[i]);
}

// ---- curves -----------------------------------------------------------------

std::string CsvBands(const std::vector<CurveBand>& bands) {
  std::ostringstream out;
  WriteCurvesCsv(out, bands);
  return out.str();
}

json BandsJson(const std::vector<CurveBand>& bands) {
  json arr = json::array();
  for (const CurveBand& b : bands) {
    arr.push_back({{"method", b.method},
                   {"mean", ToStd(b.mean)},
                   {"lower", ToStd(b.lower)},
                   {"upper", ToStd(b.upper)}});
  }
  return arr;
}

json AupSummary(const std::vector<MethodCurves>& methods) {
  json j = json::object();
  for (const MethodCurves& m : methods) {
    j[m.method] = {{"mean", m.MeanAup()}, {"standard_error", m.StandardError()}};
  }
  return j;
}

std::vector<CurveBand> MethodBands(const std::vector<MethodCurves>& methods) {
  std::vector<CurveBand> bands;
  for (const MethodCurves& m : methods) bands.push_back(AggregateCurves(m.curves, m.method));
  return bands;
}

json Histogram(const std::vector<std::string>& labels) {
  std::map<std::string, int> counts;
  for (const std::string& l : labels) ++counts[l];
  return counts;
}

// Scores of every row (rows of the result) at every k = 0..d (columns).
using RowScore = std::function<double(const Explicand&, const FeatureSubset&)>;

Matrix ScoreMatrix(const std::vector<std::vector<int>>& rankings,
                   const std::vector<Explicand>& rows, bool exclusion, const RowScore& score,
                   int workers) {
  const std::size_t d = rows.front().dim();
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d + 1));
  ParallelFor(rows.size(), workers, [&](std::size_t n) {
    const std::vector<int>& order = rankings[n];
    for (std::size_t k = 0; k <= d; ++k) {
      FeatureSubset s = FeatureSubset::Empty(d);
      if (exclusion) {
        for (std::size_t m = k; m < d; ++m) s.insert(static_cast<std::size_t>(order[m]));
      } else {
        for (std::size_t m = 0; m < k; ++m) s.insert(static_cast<std::size_t>(order[m]));
      }
      out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = score(rows[n], s);
    }
  });
  return out;
}

double ColumnMetric(const Matrix& scores, Eigen::Index k, const std::vector<double>& labels,
                    const std::vector<std::size_t>& pick, PerformanceMetric metric) {
  std::vector<double> s(pick.size()), y(pick.size());
  for (std::size_t m = 0; m < pick.size(); ++m) {
    s[m] = scores(static_cast<Eigen::Index>(pick[m]), k);
    y[m] = labels[pick[m]];
  }
  if (metric == PerformanceMetric::kAuc) return RocAuc(s, y);
  double total = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) total += (s[m] - y[m]) * (s[m] - y[m]);
  return total / static_cast<double>(s.size());
}

bool HasBothClasses(const std::vector<double>& labels, const std::vector<std::size_t>& pick) {
  bool zero = false, one = false;
  for (std::size_t p : pick) (labels[p] == 0.0 ? zero : one) = true;
  return zero && one;
}

// Point curve on all rows; percentile band from a seeded row bootstrap.
CurveBand PerformanceBand(const Matrix& scores, const std::vector<double>& labels,
                          PerformanceMetric metric, const std::string& method,
                          std::uint64_t seed) {
  const std::size_t n = labels.size();
  const Eigen::Index cols = scores.cols();
  std::vector<std::size_t> all(n);
  for (std::size_t m = 0; m < n; ++m) all[m] = m;
  CurveBand band{method, Vector(cols), Vector(cols), Vector(cols)};
  for (Eigen::Index k = 0; k < cols; ++k) band.mean[k] = ColumnMetric(scores, k, labels, all, metric);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_row(0, n - 1);
  std::vector<std::vector<double>> draws(static_cast<std::size_t>(cols));
  std::vector<std::size_t> pick(n);
  for (int b = 0; b < kBootstrapResamples; ++b) {
    for (int attempt = 0;; ++attempt) {
      for (std::size_t& p : pick) p = pick_row(rng);
      if (metric != PerformanceMetric::kAuc || HasBothClasses(labels, pick)) break;
      if (attempt > 100) throw std::invalid_argument("bootstrap cannot draw both classes");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      draws[static_cast<std::size_t>(k)].push_back(ColumnMetric(scores, k, labels, pick, metric));
    }
  }
  for (Eigen::Index k = 0; k < cols; ++k) {
    std::vector<double>& v = draws[static_cast<std::size_t>(k)];
    std::sort(v.begin(), v.end());
    const auto at = [&](double q) {
      return v[static_cast<std::size_t>(std::lround(q * static_cast<double>(v.size() - 1)))];
    };
    band.lower[k] = at(0.025);
    band.upper[k] = at(0.975);
  }
  return band;
}

// ---- commands ---------------------------------------------------------------

int Generate(const json& cfg, const RunOptions& options) {
  const std::string kind = Str(cfg, "kind");
  const bool classification = kind == "exchangeable-classification";
  if (!classification && kind != "exchangeable-regression") {
    throw std::invalid_argument("unknown generator kind: " + kind);
  }
  const int d = cfg.at("d").is_null() ? (classification ? 30 : 100)
                                      : static_cast<int>(Int(cfg, "d", 2));
  const double rho = cfg.at("rho").is_null() ? (classification ? 0.25 : 0.6) : Num(cfg, "rho");
  const auto n = static_cast<std::size_t>(Int(cfg, "n", 1));
  const std::string beta_spec = Str(cfg, "beta");
  if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("rho must lie in [0, 1)");

  Vector beta = classification ? DefaultClassificationBeta(d) : DefaultRegressionBeta(d);
  if (beta_spec == "unit-variance") {
    beta /= std::sqrt(ExchangeableLinearVariance(beta, rho));
  } else if (beta_spec != "default") {
    throw std::invalid_argument("beta must be default or unit-variance");
  }
  Dataset data = classification
                     ? GenerateExchangeableClassification(n, d, rho, beta, Seed(cfg))
                     : GenerateExchangeableRegression(n, d, rho, beta, Num(cfg, "noise_sd"),
                                                      Seed(cfg));
  data.parameters["beta"] = beta_spec;
  if (cfg.at("augment_spurious").get<bool>()) {
    data.x = AugmentSpurious(data.x, Seed(cfg));
    data.feature_names.clear();
    for (Eigen::Index k = 0; k < data.x.cols(); ++k) {
      data.feature_names.push_back("x" + std::to_string(k + 1));
    }
    data.parameters["augmented"] = true;
  }
  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  SaveDataset(data, dir);
  WriteJson(dir / "run.json", RunRecord("generate", cfg, options));
  Log(options, "generated " + std::to_string(data.rows()) + " rows, d = " +
                   std::to_string(data.dim()) + " in " + dir.string());
  return kExitOk;
}

int Ingest(const json& cfg, const RunOptions& options) {
  IngestConfig ic;
  ic.max_rows = static_cast<std::size_t>(Int(cfg, "max_rows", 1));
  ic.seed = Seed(cfg);
  ic.task = Str(cfg, "task");
  const std::string input = Str(cfg, "input");
  if (input.empty()) throw std::invalid_argument("--input is required");
  if (!fs::exists(input)) throw IoError("input not found: " + input);
  const Dataset data = IngestCsv(input, Str(cfg, "target"), ic);
  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  SaveDataset(data, dir);
  WriteJson(dir / "run.json", RunRecord("ingest", cfg, options));
  for (const std::string& w : data.warnings) Log(options, "warning: " + w);
  Log(options, "ingested " + std::to_string(data.rows()) + " rows into " + dir.string());
  return kExitOk;
}

int TrainSurrogateCommand(const json& cfg, const RunOptions& options) {
  const Dataset data = LoadDataset(Str(cfg, "data"));
  const FittedModel model = FitModel(data, Str(cfg, "model_kind"));
  const SurrogateConfig sc = SurrogateSettings(cfg);
  const SurrogateTask task = data.task == "classification" ? SurrogateTask::kClassification
                                                           : SurrogateTask::kRegression;
  const auto start = Clock::now();
  TrainingHistory history;
  const MaskedSurrogate surrogate =
      TrainSurrogate(data.Rows(Split::kSurrogate), model.Predictor(), task, sc, &history);
  const double seconds = Seconds(start);

  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  WriteJson(dir / "model.json", ToJson(model));
  surrogate.Save((dir / "surrogate.json").string());
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
    csv << e + 1 << "," << FormatDouble(history.epoch_loss[e]) << "\n";
  }
  WriteText(dir / "training.csv", csv.str());
  json run = RunRecord("train-surrogate", cfg, options);
  if (options.record_timing) run["timing"] = {{"training_seconds", seconds}};
  WriteJson(dir / "run.json", run);
  Log(options, "trained surrogate (final loss " +
                   FormatDouble(history.epoch_loss.empty() ? 0.0 : history.epoch_loss.back()) +
                   ") in " + dir.string());
  return kExitOk;
}

json DiagnosticsJson(const McDiagnostics& d, bool timing) {
  json j = {{"iterations", d.iterations},
            {"max_rhat", d.max_rhat},
            {"converged", d.converged},
            {"samples_per_entry", d.samples_per_entry},
            {"max_path_residual", d.max_path_residual},
            {"endpoint_mismatches", d.endpoint_mismatches},
            {"walks", d.walks}};
  if (timing) j["wall_time_seconds"] = d.wall_time_seconds;
  return j;
}

int Attribute(const json& cfg, const RunOptions& options) {
  const Setup s = BuildSetup(cfg);
  const int d = static_cast<int>(s.data.dim());
  const std::vector<std::size_t> rows = ExplicandRows(s.data, cfg);
  std::vector<Explicand> xs;
  for (std::size_t r : rows) xs.push_back(RowExplicand(s.data, r));
  const std::size_t n = xs.size();

  std::string contributions = Str(cfg, "contributions");
  if (contributions == "auto") contributions = s.provider_name == "exact" ? "exact" : "sampled";
  const bool exact_provider = s.provider_name == "exact";
  if ((contributions == "exact" || contributions == "brute-force") && !exact_provider) {
    throw std::invalid_argument(contributions + " contributions need the exact provider");
  }
  if (contributions != "exact" && contributions != "brute-force" && contributions != "sampled") {
    throw std::invalid_argument("unknown contributions source: " + contributions);
  }
  const ConvergenceConfig convergence = Convergence(cfg);
  const std::vector<SemivalueWeights> candidates = NamedWeightSet(Str(cfg, "weights"), d);
  UtilitySpec utility;
  utility.kind = UtilityKindFromString(Str(cfg, "utility"));
  utility.provider = s.provider.get();
  utility.predictor = s.predictor;
  utility.mu = s.mu;
  utility.Validate();
  const std::string selection = Str(cfg, "selection");
  if (selection != "per-explicand" && selection != "dataset") {
    throw std::invalid_argument("selection must be per-explicand or dataset");
  }

  const auto start = Clock::now();
  std::vector<std::optional<MarginalContributionMatrix>> mcs(n);
  std::vector<McDiagnostics> diagnostics(n);
  std::unique_ptr<ExactContributionEngine> engine;
  if (contributions == "exact") {
    const auto& p = dynamic_cast<const ExactGaussianProvider&>(*s.provider);
    engine = std::make_unique<ExactContributionEngine>(p.spec(), p.model());
  }
  ParallelFor(n, options.workers, [&](std::size_t k) {
    if (contributions == "exact") {
      mcs[k] = engine->Compute(xs[k]);
    } else if (contributions == "brute-force") {
      const auto& p = dynamic_cast<const ExactGaussianProvider&>(*s.provider);
      mcs[k] = BruteForceMarginalContributions(p.spec(), p.model(), xs[k]);
    } else {
      ConvergenceConfig c = convergence;
      c.seed = convergence.seed + k;
      McResult r = SampleMarginalContributions(*s.provider, xs[k], c);
      mcs[k] = std::move(r.estimate);
      diagnostics[k] = r.diagnostics;
    }
  });
  const double estimation_seconds = Seconds(start);

  std::vector<MarginalContributionMatrix> mc_list;
  for (auto& m : mcs) mc_list.push_back(std::move(*m));
  std::vector<AttributionReport> reports;
  if (selection == "dataset") {
    reports = SelectWeightDatasetLevel(mc_list, candidates, utility, xs);
  } else {
    std::vector<std::optional<AttributionReport>> slots(n);
    ParallelFor(n, options.workers, [&](std::size_t k) {
      slots[k] = SelectWeight(mc_list[k], candidates, utility, xs[k]);
    });
    for (auto& r : slots) reports.push_back(std::move(*r));
  }

  const SemivalueWeights shapley = UniformWeights(d);
  const SemivalueWeights delta_d = OneHotWeights(d, d);
  std::vector<MethodCurves> methods(3);
  for (std::size_t m = 0; m < 3; ++m) {
    methods[m].method = kMethods[m];
    methods[m].aup.resize(n);
    methods[m].curves.resize(n);
  }
  std::vector<std::array<Vector, 3>> phis(n);
  ParallelFor(n, options.workers, [&](std::size_t k) {
    phis[k] = {Combine(mc_list[k], shapley).phi, Combine(mc_list[k], delta_d).phi,
               reports[k].phi.phi};
    const double full = s.predictor(xs[k].values());
    for (std::size_t m = 0; m < 3; ++m) {
      CurveResult r = Aup(phis[k][m], xs[k], *s.provider, full);
      methods[m].aup[k] = r.area;
      methods[m].curves[k] = std::move(r.curve.points);
    }
  });

  const std::string hash = ManifestHash("attribute", cfg);
  const bool sampled = contributions == "sampled";
  json entries = json::array();
  std::size_t non_converged = 0;
  std::vector<std::string> chosen;
  for (std::size_t k = 0; k < n; ++k) {
    json e = {{"row", rows[k] + 1},
              {"label", *xs[k].label()},
              {"prediction", s.predictor(xs[k].values())},
              {"report", ToJson(reports[k])}};
    json attributions = json::object();
    for (std::size_t m = 0; m < 3; ++m) attributions[kMethods[m]] = ToStd(phis[k][m]);
    e["attributions"] = std::move(attributions);
    if (sampled) {
      e["diagnostics"] = DiagnosticsJson(diagnostics[k], options.record_timing);
      non_converged += diagnostics[k].converged ? 0 : 1;
    }
    chosen.push_back(reports[k].chosen_weight.label());
    entries.push_back(std::move(e));
  }

  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  WriteJson(dir / "reports.json", {{"manifest_hash", hash},
                                   {"methods", kMethods},
                                   {"contributions", contributions},
                                   {"explicands", std::move(entries)}});
  const std::vector<CurveBand> bands = MethodBands(methods);
  WriteText(dir / "recovery_curves.csv", CsvBands(bands));
  json summary = {{"manifest_hash", hash},
                  {"n_explicands", n},
                  {"d", d},
                  {"provider", s.provider_name},
                  {"contributions", contributions},
                  {"utility", Str(cfg, "utility")},
                  {"selection", selection},
                  {"aup", AupSummary(methods)},
                  {"chosen_weights", Histogram(chosen)},
                  {"non_converged", non_converged}};
  if (options.record_timing) summary["timing"] = {{"estimation_seconds", estimation_seconds}};
  WriteJson(dir / "summary.json", summary);
  if (cfg.at("svg").get<bool>()) {
    WriteText(dir / "recovery_curves.svg",
              LineChartSvg("Prediction recovery error", "features added", "|f(x) - E[f | X_I]|",
                           bands));
  }
  WriteJson(dir / "run.json", RunRecord("attribute", cfg, options));
  Log(options, "attributed " + std::to_string(n) + " explicands (" + contributions +
                   ", " + s.provider_name + ") into " + dir.string());
  if (non_converged > 0) {
    Log(options, std::to_string(non_converged) + " explicand(s) did not converge");
    return kExitNonConverged;
  }
  return kExitOk;
}

int Evaluate(const json& cfg, const RunOptions& options) {
  const std::string reports_dir = Str(cfg, "reports");
  if (reports_dir.empty()) throw std::invalid_argument("--reports <attribute dir> is required");
  const json attribute_run = ReadJsonFile(fs::path(reports_dir) / "run.json");
  if (attribute_run.value("command", std::string()) != "attribute") {
    throw std::invalid_argument(reports_dir + " does not hold attribute output");
  }
  const json reports = ReadJsonFile(fs::path(reports_dir) / "reports.json");
  const Setup s = BuildSetup(attribute_run.at("config"));
  const int d = static_cast<int>(s.data.dim());

  std::string metric_name = Str(cfg, "metric");
  if (metric_name == "auto") metric_name = s.data.task == "classification" ? "auc" : "mse";
  const PerformanceMetric metric = PerformanceMetricFromString(metric_name);
  if (metric == PerformanceMetric::kAuc && s.data.task != "classification") {
    throw std::invalid_argument("AUC needs a classification dataset");
  }

  std::vector<Explicand> xs;
  std::vector<double> labels;
  std::array<std::vector<std::vector<int>>, 3> rankings;
  std::array<std::vector<Vector>, 3> phis;
  for (const json& e : reports.at("explicands")) {
    const auto row = e.at("row").get<std::size_t>();
    if (row < 1 || row > s.data.rows()) throw std::invalid_argument("report row out of range");
    xs.push_back(RowExplicand(s.data, row - 1));
    labels.push_back(*xs.back().label());
    for (std::size_t m = 0; m < 3; ++m) {
      Vector phi = FromStd(e.at("attributions").at(kMethods[m]).get<std::vector<double>>());
      if (phi.size() != d) throw std::invalid_argument("attribution length mismatch");
      rankings[m].push_back(RankByMagnitude(phi));
      phis[m].push_back(std::move(phi));
    }
  }
  if (xs.empty()) throw std::invalid_argument("reports hold no explicands");

  const CoalitionProvider& provider = *s.provider;
  const RowScore conditional = [&](const Explicand& x, const FeatureSubset& sub) {
    return provider.ConditionalExpectation(x, sub);
  };
  const RowScore masked = [&](const Explicand& x, const FeatureSubset& sub) {
    return MeanMaskedPrediction(s.predictor, x, sub, s.mu);
  };

  std::vector<CurveBand> recovery, inclusion, exclusion, masked_inclusion;
  for (std::size_t m = 0; m < 3; ++m) {
    std::vector<Vector> curves(xs.size());
    ParallelFor(xs.size(), options.workers, [&](std::size_t k) {
      curves[k] = Aup(phis[m][k], xs[k], provider, s.predictor(xs[k].values())).curve.points;
    });
    recovery.push_back(AggregateCurves(curves, kMethods[m]));
    const std::uint64_t seed = Seed(cfg) + m;
    inclusion.push_back(PerformanceBand(
        ScoreMatrix(rankings[m], xs, false, conditional, options.workers), labels, metric,
        kMethods[m], seed));
    exclusion.push_back(PerformanceBand(
        ScoreMatrix(rankings[m], xs, true, conditional, options.workers), labels, metric,
        kMethods[m], seed));
    masked_inclusion.push_back(PerformanceBand(
        ScoreMatrix(rankings[m], xs, false, masked, options.workers), labels, metric,
        kMethods[m], seed));
  }

  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  const std::string hash = ManifestHash("evaluate", cfg);
  const std::vector<std::pair<std::string, const std::vector<CurveBand>*>> sets = {
      {"recovery", &recovery},
      {"inclusion", &inclusion},
      {"exclusion", &exclusion},
      {"masked_inclusion", &masked_inclusion}};
  json curves = {{"manifest_hash", hash},
                 {"attribute_manifest_hash", reports.at("manifest_hash")},
                 {"metric", ToString(metric)},
                 {"provider", s.provider_name}};
  for (const auto& [name, bands] : sets) {
    WriteText(dir / (name + "_curves.csv"), CsvBands(*bands));
    curves[name] = BandsJson(*bands);
    if (cfg.at("svg").get<bool>()) {
      const std::string y = name == "recovery" ? "recovery error" : ToString(metric);
      WriteText(dir / (name + "_curves.svg"), LineChartSvg(name, "features", y, *bands));
    }
  }
  WriteJson(dir / "curves.json", curves);
  WriteJson(dir / "run.json", RunRecord("evaluate", cfg, options));
  Log(options, "evaluated " + std::to_string(xs.size()) + " explicands (" + ToString(metric) +
                   ") into " + dir.string());
  return kExitOk;
}

// ---- figure recipes -----------------------------------------------------------

const char* FlagName(DisagreementFlag f) {
  switch (f) {
    case DisagreementFlag::kAgree: return "agree";
    case DisagreementFlag::kDisagree: return "disagree";
    case DisagreementFlag::kTie: return "tie";
  }
  return "agree";
}

int Fig1aGrid(const json& cfg, const RunOptions& options, const fs::path& dir,
              json& summary) {
  std::vector<double> rhos = {0.2, 0.6};
  if (!cfg.at("rho").is_null()) rhos = {Num(cfg, "rho")};
  const double lo = Num(cfg, "lo"), hi = Num(cfg, "hi"), step = Num(cfg, "step");
  const LinearModel model = TwoFeatureExampleModel();
  std::ostringstream csv;
  csv << "rho,x1,x2,e1_minus_e2,optimal_first,shapley_first,flag\n";
  json per_rho = json::array();
  for (double rho : rhos) {
    const DisagreementStudy study = RunDisagreementGrid(rho, model, lo, hi, step);
    const DisagreementRegion& r = study.region;
    std::vector<int> flags;
    std::size_t disagreements = 0;
    for (std::size_t g = 0; g < study.grid.size(); ++g) {
      csv << FormatDouble(rho) << "," << FormatDouble(study.grid[g][0]) << ","
          << FormatDouble(study.grid[g][1]) << "," << FormatDouble(r.e1_minus_e2[g]) << ","
          << r.optimal_first[g] + 1 << "," << r.shapley_first[g] + 1 << ","
          << FlagName(r.flags[g]) << "\n";
      flags.push_back(static_cast<int>(r.flags[g]));
      disagreements += r.flags[g] == DisagreementFlag::kDisagree ? 1 : 0;
    }
    per_rho.push_back({{"rho", rho},
                       {"fraction", r.fraction},
                       {"counted", r.counted},
                       {"disagreements", disagreements},
                       {"grid_points", study.grid.size()}});
    if (cfg.at("svg").get<bool>()) {
      const int side = static_cast<int>(std::lround(std::sqrt(study.grid.size())));
      std::vector<int> cells(flags.size());
      for (std::size_t g = 0; g < flags.size(); ++g) {
        cells[g] = flags[g] == static_cast<int>(DisagreementFlag::kDisagree) ? 1
                   : flags[g] == static_cast<int>(DisagreementFlag::kTie)    ? 2
                                                                             : 0;
      }
      char label[32];
      std::snprintf(label, sizeof label, "%g", rho);
      WriteText(dir / ("fig1a_rho" + std::string(label) + ".svg"),
                BinaryGridSvg("Shapley order differs from optimal, rho = " + std::string(label),
                              side, cells));
    }
  }
  WriteText(dir / "fig1a_grid.csv", csv.str());
  summary["disagreement"] = per_rho;
  (void)options;
  return kExitOk;
}

GaussianStudyParams StudyParams(const json& cfg, const RunOptions& options) {
  GaussianStudyParams p;
  p.d = cfg.at("d").is_null() ? 100 : static_cast<int>(Int(cfg, "d", 2));
  p.rho = cfg.at("rho").is_null() ? 0.6 : Num(cfg, "rho");
  p.n = static_cast<std::size_t>(Int(cfg, "n", 1));
  p.n_explicands = static_cast<std::size_t>(Int(cfg, "n_explicands", 1));
  p.beta = Str(cfg, "beta");
  p.noise_sd = Num(cfg, "noise_sd");
  p.seed = Seed(cfg);
  p.workers = options.workers;
  return p;
}

void WriteRecoveryOutputs(const fs::path& dir, const std::string& stem,
                          const std::vector<MethodCurves>& methods, bool svg,
                          const std::string& title) {
  const std::vector<CurveBand> bands = MethodBands(methods);
  WriteText(dir / (stem + ".csv"), CsvBands(bands));
  if (svg) {
    WriteText(dir / (stem + ".svg"),
              LineChartSvg(title, "features added", "prediction recovery error", bands));
  }
}

int Fig1bCurves(const json& cfg, const RunOptions& options, const fs::path& dir,
                json& summary) {
  const GaussianStudyData study = PrepareGaussianStudy(StudyParams(cfg, options));
  const ExactCurvesStudy result = RunExactCurvesStudy(study, Str(cfg, "weights"),
                                                      options.workers);
  WriteRecoveryOutputs(dir, "fig1b_curves", result.methods, cfg.at("svg").get<bool>(),
                       "Prediction recovery error, exact contributions");
  summary["aup"] = AupSummary(result.methods);
  summary["chosen_weights"] = Histogram(result.chosen_weights);
  summary["delta_d_below_shapley_fraction"] = result.delta_d_below_shapley_fraction;
  return kExitOk;
}

int SampledRecipe(const json& cfg, const RunOptions& options, const fs::path& dir,
                  json& summary, bool error_figure) {
  SampledStudyParams params;
  params.gaussian = StudyParams(cfg, options);
  params.surrogate = SurrogateSettings(cfg);
  params.convergence = Convergence(cfg);
  params.weight_set = Str(cfg, "weights");
  const GaussianStudyData study = PrepareGaussianStudy(params.gaussian);
  const SampledStudy result = RunSampledStudy(study, params);
  const bool svg = cfg.at("svg").get<bool>();

  if (error_figure) {
    const CurveBand band = AggregateCurves(
        [&] {
          std::vector<Vector> rows;
          for (Eigen::Index k = 0; k < result.relative_error.rows(); ++k) {
            rows.push_back(result.relative_error.row(k).transpose());
          }
          return rows;
        }(),
        "relative_error");
    std::ostringstream csv;
    csv << "j,mean,lower,upper\n";
    for (Eigen::Index j = 0; j < band.mean.size(); ++j) {
      csv << j + 1 << "," << FormatDouble(band.mean[j]) << "," << FormatDouble(band.lower[j])
          << "," << FormatDouble(band.upper[j]) << "\n";
    }
    WriteText(dir / "fig3_relative_error.csv", csv.str());
    if (svg) {
      WriteText(dir / "fig3_relative_error.svg",
                LineChartSvg("Relative estimation error by coalition size",
                             "coalition size j - 1", "relative difference", {band}));
    }
    summary["mean_relative_error"] = ToStd(result.mean_relative_error);
  } else {
    WriteRecoveryOutputs(dir, "sec4_curves_surrogate", result.surrogate_eval, svg,
                         "Prediction recovery error, surrogate conditional expectation");
    WriteRecoveryOutputs(dir, "sec4_curves_exact", result.exact_eval, svg,
                         "Prediction recovery error, exact conditional expectation");
    summary["aup_surrogate"] = AupSummary(result.surrogate_eval);
    summary["aup_exact"] = AupSummary(result.exact_eval);
    summary["chosen_weights"] = Histogram(result.chosen_weights);
  }
  json diag = json::array();
  for (const McDiagnostics& dg : result.diagnostics) {
    diag.push_back(DiagnosticsJson(dg, options.record_timing));
  }
  summary["diagnostics"] = diag;
  summary["non_converged"] = result.non_converged;
  summary["surrogate_training_loss"] = result.training_loss;
  if (options.record_timing) {
    summary["timing"] = {{"surrogate_seconds", result.surrogate_seconds},
                         {"sampling_seconds", result.sampling_seconds}};
  }
  return result.non_converged > 0 ? kExitNonConverged : kExitOk;
}

int ReproduceFigure(const json& cfg, const RunOptions& options) {
  const std::string recipe = Str(cfg, "recipe");
  if (std::find(RecipeNames().begin(), RecipeNames().end(), recipe) == RecipeNames().end()) {
    throw std::invalid_argument("unknown recipe: " + recipe);
  }
  EnsureDir(options.output_dir);
  const fs::path dir(options.output_dir);
  json summary = {{"manifest_hash", ManifestHash("reproduce-figure", cfg)}, {"recipe", recipe}};
  int code = kExitOk;
  if (recipe == "fig1a-grid") {
    code = Fig1aGrid(cfg, options, dir, summary);
  } else if (recipe == "fig1b-curves") {
    code = Fig1bCurves(cfg, options, dir, summary);
  } else {
    code = SampledRecipe(cfg, options, dir, summary, recipe == "fig3-estimation-error");
  }
  std::string stem = recipe;
  std::replace(stem.begin(), stem.end(), '-', '_');
  WriteJson(dir / (stem + "_summary.json"), summary);
  WriteJson(dir / "run.json", RunRecord("reproduce-figure", cfg, options));
  Log(options, "recipe " + recipe + " written to " + dir.string());
  if (code == kExitNonConverged) Log(options, "some explicands did not converge");
  return code;
}

json ConvergenceDefaults() {
  return {{"n_chains", 10}, {"threshold", 1.005}, {"min_iterations", 20},
          {"max_iterations", 5000}};
}

json SurrogateDefaults() {
  return {{"hidden_units", 128}, {"epochs", 100}, {"batch_size", 64}, {"learning_rate", 1e-3}};
}

// Converts one override to the type of its default.
json Coerce(const std::string& key, const json& def, const json& value, bool from_flag) {
  const auto bad = [&](const std::string& want) {
    return std::invalid_argument("config key " + key + " expects " + want);
  };
  if (!from_flag) {
    if (def.is_null()) {
      if (!value.is_null() && !value.is_number()) throw bad("a number or null");
      return value;
    }
    if (def.is_number_float()) {
      if (!value.is_number()) throw bad("a number");
      return value.get<double>();
    }
    if (def.is_number_integer()) {
      if (!value.is_number_integer()) throw bad("an integer");
      return value;
    }
    if (def.is_boolean() && !value.is_boolean()) throw bad("true or false");
    if (def.is_string() && !value.is_string()) throw bad("a string");
    return value;
  }
  const std::string text = value.get<std::string>();
  if (def.is_string()) return text;
  if (def.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw bad("true or false");
  }
  if (def.is_number_integer() || def.is_null()) {
    long long v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && end == text.data() + text.size()) return v;
    if (def.is_number_integer()) throw bad("an integer");
  }
  if (def.is_null() && text == "null") return nullptr;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) throw bad("a number");
  return v;
}

}  // namespace

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names = {"generate", "ingest",   "train-surrogate",
                                                 "attribute", "evaluate", "reproduce-figure"};
  return names;
}

const std::vector<std::string>& RecipeNames() {
  static const std::vector<std::string> names = {"fig1a-grid", "fig1b-curves",
                                                 "fig3-estimation-error", "example-sec4"};
  return names;
}

json DefaultConfig(const std::string& command) {
  json c;
  if (command == "generate") {
    c = {{"kind", "exchangeable-regression"}, {"n", 10000}, {"d", nullptr},
         {"rho", nullptr}, {"beta", "default"}, {"noise_sd", 2.0},
         {"augment_spurious", false}};
  } else if (command == "ingest") {
    c = {{"input", ""}, {"target", ""}, {"task", "regression"}, {"max_rows", 10000}};
  } else if (command == "train-surrogate") {
    c = SurrogateDefaults();
    c["data"] = "";
    c["model_kind"] = "auto";
  } else if (command == "attribute") {
    c = ConvergenceDefaults();
    c.update({{"data", ""}, {"model", ""}, {"provider", "exact"},
              {"contributions", "auto"}, {"weights", "default"}, {"utility", "neg-aup"},
              {"selection", "per-explicand"}, {"n_explicands", 100}, {"svg", false}});
  } else if (command == "evaluate") {
    c = {{"reports", ""}, {"metric", "auto"}, {"svg", false}};
  } else if (command == "reproduce-figure") {
    c = ConvergenceDefaults();
    c.update(SurrogateDefaults());
    c.update({{"recipe", "fig1a-grid"}, {"rho", nullptr}, {"lo", -2.0}, {"hi", 2.0},
              {"step", 0.05}, {"d", nullptr}, {"n", 10000}, {"n_explicands", 100},
              {"beta", "default"}, {"noise_sd", 2.0}, {"weights", "default"},
              {"svg", false}});
  } else {
    throw std::invalid_argument("unknown command: " + command);
  }
  c["seed"] = 0;
  return c;
}

json MergeConfig(const json& defaults, const json& manifest, const json& flags) {
  json merged = defaults;
  const auto layer = [&](const json& overrides, bool from_flag) {
    if (overrides.is_null()) return;
    if (!overrides.is_object()) throw std::invalid_argument("config overrides must be an object");
    for (const auto& [key, value] : overrides.items()) {
      if (!defaults.contains(key)) throw std::invalid_argument("unknown config key: " + key);
      merged[key] = Coerce(key, defaults.at(key), value, from_flag);
    }
  };
  layer(manifest, false);
  layer(flags, true);
  return merged;
}

json ReadManifest(const std::string& path) {
  const json j = ReadJsonFile(path);
  if (!j.is_object()) throw std::invalid_argument(path + ": manifest must be a JSON object");
  if (j.contains("config")) return j.at("config");
  json flat = j;
  flat.erase("command");
  return flat;
}

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string ManifestHash(const std::string& command, const json& config) {
  return Sha256Hex(json{{"command", command}, {"config", config}}.dump());
}

std::string ResolveOutputDir(const std::string& flag, const std::string& command) {
  fs::path p = flag.empty() ? fs::path("out") / command : fs::path(flag);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  }
  return p.lexically_normal().string();
}

int RunCommand(const std::string& command, const json& config, const RunOptions& options) {
  const auto report = [&](const char* kind, const std::string& what) {
    if (options.log) *options.log << "[semivalue] " << kind << ": " << what << "\n";
  };
  try {
    if (command == "generate") return Generate(config, options);
    if (command == "ingest") return Ingest(config, options);
    if (command == "train-surrogate") return TrainSurrogateCommand(config, options);
    if (command == "attribute") return Attribute(config, options);
    if (command == "evaluate") return Evaluate(config, options);
    if (command == "reproduce-figure") return ReproduceFigure(config, options);
    report("invalid input", "unknown command " + command);
    return kExitInvalidInput;
  } catch (const IoError& e) {
    report("I/O error", e.what());
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    report("invalid input", e.what());
    return kExitInvalidInput;
  } catch (const std::out_of_range& e) {
    report("invalid input", e.what());
    return kExitInvalidInput;
  } catch (const json::exception& e) {
    report("invalid input", e.what());
    return kExitInvalidInput;
  } catch (const std::bad_cast& e) {
    report("invalid input", e.what());
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    report("I/O error", e.what());
    return kExitIoError;
  }
}

}  // namespace semivalue
