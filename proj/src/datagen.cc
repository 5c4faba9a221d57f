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


#include "semivalue/datagen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace semivalue {

namespace {

constexpr std::array<const char*, 4> kSplitNames = {"train", "validation", "surrogate",
                                                     "test"};

void CheckRho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Comma split honouring double quotes.
std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(Trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(Trim(cell));
  return cells;
}

bool IsMissing(const std::string& cell) {
  std::string lower = cell;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.empty() || lower == "na" || lower == "nan" || lower == "?" ||
         lower == "null";
}

bool ParseDouble(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::vector<std::string>> ReadCsvRows(const std::string& path,
                                                  std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + " has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  header = SplitCsvLine(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument(path + ": row " + std::to_string(rows.size() + 2) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (in.bad()) throw std::runtime_error("failed reading " + path);
  return rows;
}

std::vector<std::string> DefaultFeatureNames(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= d; ++k) names.push_back("x" + std::to_string(k));
  return names;
}

}  // namespace

std::string ToString(Split split) { return kSplitNames[static_cast<int>(split)]; }

Split SplitFromString(const std::string& name) {
  for (int k = 0; k < 4; ++k) {
    if (name == kSplitNames[k]) return static_cast<Split>(k);
  }
  throw std::invalid_argument("unknown split: " + name);
}

SplitSizes ComputeSplitSizes(std::size_t n) {
  const double nd = static_cast<double>(n);
  SplitSizes s;
  s.train = static_cast<std::size_t>(std::llround(0.7 * nd));
  s.test = std::max<std::size_t>(static_cast<std::size_t>(std::llround(0.1 * nd)), 100);
  if (s.train + s.test >= n) {
    throw std::invalid_argument("n = " + std::to_string(n) +
                                " leaves no rows for the validation and surrogate splits");
  }
  const std::size_t rest = n - s.train - s.test;
  s.validation = rest / 2;
  s.surrogate = rest - s.validation;
  if (s.validation == 0 || s.surrogate == 0) {
    throw std::invalid_argument("n = " + std::to_string(n) +
                                " leaves an empty validation or surrogate split");
  }
  return s;
}

std::vector<Split> AssignSplits(std::size_t n, std::uint64_t seed) {
  const SplitSizes sizes = ComputeSplitSizes(n);
  std::vector<Split> labels;
  labels.reserve(n);
  labels.insert(labels.end(), sizes.train, Split::kTrain);
  labels.insert(labels.end(), sizes.validation, Split::kValidation);
  labels.insert(labels.end(), sizes.surrogate, Split::kSurrogate);
  labels.insert(labels.end(), sizes.test, Split::kTest);
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

std::vector<std::size_t> Dataset::Indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < split.size(); ++r) {
    if (split[r] == s) out.push_back(r);
  }
  return out;
}

Matrix Dataset::Rows(Split s) const {
  const auto idx = Indices(s);
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

Vector Dataset::Labels(Split s) const {
  const auto idx = Indices(s);
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out[static_cast<Eigen::Index>(r)] = y[static_cast<Eigen::Index>(idx[r])];
  }
  return out;
}

void StandardizeFromTraining(Dataset& data) {
  const Matrix train = data.Rows(Split::kTrain);
  if (train.rows() == 0) throw std::invalid_argument("training split is empty");
  const Vector mean = train.colwise().mean().transpose();
  const Vector sd = ((train.rowwise() - mean.transpose()).array().square().colwise().mean())
                        .sqrt()
                        .matrix()
                        .transpose();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < sd.size(); ++k) {
    if (sd[k] > 0.0) {
      keep.push_back(k);
    } else {
      data.warnings.push_back("dropped constant feature " +
                              data.feature_names[static_cast<std::size_t>(k)]);
    }
  }
  if (keep.empty()) throw std::invalid_argument("every feature is constant");
  Matrix x(data.x.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> names;
  data.feature_mean.resize(static_cast<Eigen::Index>(keep.size()));
  data.feature_scale.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Eigen::Index k = keep[c];
    const auto cc = static_cast<Eigen::Index>(c);
    x.col(cc) = (data.x.col(k).array() - mean[k]) / sd[k];
    data.feature_mean[cc] = mean[k];
    data.feature_scale[cc] = sd[k];
    names.push_back(data.feature_names[static_cast<std::size_t>(k)]);
  }
  data.x = std::move(x);
  data.feature_names = std::move(names);
  data.standardized = true;
}

Vector DefaultRegressionBeta(int d) {
  Vector beta = Vector::Zero(d);
  for (int k = 0; k < std::min(d, 20); ++k) beta[k] = 1.0 - 0.01 * k;
  return beta;
}

Vector DefaultClassificationBeta(int d) {
  Vector beta = Vector::Zero(d);
  for (int k = 0; k < std::min(d, 10); ++k) beta[k] = 1.0 - 0.02 * k;
  return beta;
}

double ExchangeableLinearVariance(const Vector& beta, double rho) {
  const double sum = beta.sum();
  return (1.0 - rho) * beta.squaredNorm() + rho * sum * sum;
}

Matrix SampleExchangeableGaussian(std::size_t n, int d, double rho, std::mt19937_64& rng) {
  CheckRho(rho);
  if (d < 1) throw std::invalid_argument("d must be positive");
  std::normal_distribution<double> normal;
  const double shared = std::sqrt(rho);
  const double own = std::sqrt(1.0 - rho);
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double z = normal(rng);
    for (int k = 0; k < d; ++k) x(r, k) = shared * z + own * normal(rng);
  }
  return x;
}

Dataset GenerateExchangeableRegression(std::size_t n, int d, double rho,
                                       const Vector& beta_star, double noise_sd,
                                       std::uint64_t seed) {
  CheckRho(rho);
  if (beta_star.size() != d) throw std::invalid_argument("beta_star length must equal d");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be nonnegative");
  std::mt19937_64 rng(seed);
  Dataset data;
  data.task = "regression";
  data.x = SampleExchangeableGaussian(n, d, rho, rng);
  std::normal_distribution<double> normal;
  data.y = data.x * beta_star;
  for (Eigen::Index r = 0; r < data.y.size(); ++r) data.y[r] += noise_sd * normal(rng);
  data.split = AssignSplits(n, seed);
  data.feature_names = DefaultFeatureNames(static_cast<std::size_t>(d));
  data.parameters = {{"kind", "exchangeable-regression"},
                     {"n", n},
                     {"d", d},
                     {"rho", rho},
                     {"noise_sd", noise_sd},
                     {"seed", seed},
                     {"beta_star", std::vector<double>(beta_star.data(),
                                                       beta_star.data() + beta_star.size())}};
  return data;
}

Dataset GenerateExchangeableClassification(std::size_t n, int d, double rho,
                                           const Vector& beta_star, std::uint64_t seed) {
  CheckRho(rho);
  if (beta_star.size() != d) throw std::invalid_argument("beta_star length must equal d");
  std::mt19937_64 rng(seed);
  Dataset data;
  data.task = "classification";
  data.x = SampleExchangeableGaussian(n, d, rho, rng);
  const Vector logit = data.x * beta_star;
  data.y.resize(logit.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index r = 0; r < logit.size(); ++r) {
    const double z = logit[r];
    const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    data.y[r] = unit(rng) < p ? 1.0 : 0.0;
  }
  data.split = AssignSplits(n, seed);
  data.feature_names = DefaultFeatureNames(static_cast<std::size_t>(d));
  data.parameters = {{"kind", "exchangeable-classification"},
                     {"n", n},
                     {"d", d},
                     {"rho", rho},
                     {"seed", seed},
                     {"beta_star", std::vector<double>(beta_star.data(),
                                                       beta_star.data() + beta_star.size())}};
  return data;
}

double MeanOffDiagonalCorrelation(const Matrix& x) {
  const Eigen::Index p = x.cols();
  if (p < 2 || x.rows() < 2) return 0.0;
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  const Vector sd = cov.diagonal().cwiseSqrt();
  double total = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      if (a == b) continue;
      if (sd[a] > 0.0 && sd[b] > 0.0) total += cov(a, b) / (sd[a] * sd[b]);
    }
  }
  return total / static_cast<double>(p * (p - 1));
}

Matrix AugmentSpurious(const Matrix& x, std::uint64_t seed) {
  const Eigen::Index p0 = x.cols();
  if (p0 < 1) throw std::invalid_argument("augmentation needs at least one column");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix out(x.rows(), 3 * p0);
  out.leftCols(p0) = x;
  for (Eigen::Index p = p0; p < 3 * p0; ++p) {
    const auto current = out.leftCols(p);
    const double rho = MeanOffDiagonalCorrelation(current);
    const double pd = static_cast<double>(p);
    const double denom = 1.0 + rho * (pd - 1.0);
    const double load = rho / denom;
    const double noise = std::sqrt(std::max(0.0, 1.0 - rho * rho * pd / denom));
    const Vector row_sum = current.rowwise().sum();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out(r, p) = load * row_sum[r] + noise * normal(rng);
    }
  }
  return out;
}

Dataset IngestCsv(const std::string& path, const std::string& target_column,
                  const IngestConfig& config) {
  if (config.task != "regression" && config.task != "classification") {
    throw std::invalid_argument("unknown task: " + config.task);
  }
  std::vector<std::string> header;
  const auto rows = ReadCsvRows(path, header);
  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    throw std::invalid_argument("target column '" + target_column + "' not found");
  }
  const auto target = static_cast<std::size_t>(target_it - header.begin());

  // A column is numeric when every present cell parses.
  std::vector<bool> numeric(header.size(), true);
  double scratch;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (numeric[c] && !IsMissing(row[c]) && !ParseDouble(row[c], scratch)) {
        numeric[c] = false;
      }
    }
  }
  if (!numeric[target]) throw std::invalid_argument("target column is not numeric");

  Dataset data;
  data.task = config.task;
  std::vector<std::size_t> features;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == target) continue;
    if (numeric[c]) {
      features.push_back(c);
      data.feature_names.push_back(header[c]);
    } else {
      data.warnings.push_back("dropped non-numeric column " + header[c]);
    }
  }
  if (features.empty()) throw std::invalid_argument("no numeric feature columns");

  std::vector<std::size_t> complete;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool ok = !IsMissing(rows[r][target]);
    for (std::size_t c : features) ok = ok && !IsMissing(rows[r][c]);
    if (ok) complete.push_back(r);
  }
  if (complete.empty()) throw std::invalid_argument("no complete rows after filtering");
  const std::size_t dropped = rows.size() - complete.size();
  if (dropped > 0) {
    data.warnings.push_back("excluded " + std::to_string(dropped) +
                            " rows with missing values");
  }
  if (complete.size() > config.max_rows) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(complete.begin(), complete.end(), rng);
    complete.resize(config.max_rows);
    std::sort(complete.begin(), complete.end());
  }

  const std::size_t n = complete.size();
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features.size()));
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[complete[r]];
    for (std::size_t c = 0; c < features.size(); ++c) {
      ParseDouble(row[features[c]], scratch);
      data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scratch;
    }
    ParseDouble(row[target], scratch);
    if (config.task == "classification" && scratch != 0.0 && scratch != 1.0) {
      throw std::invalid_argument("classification target must be 0/1");
    }
    data.y[static_cast<Eigen::Index>(r)] = scratch;
  }
  data.split = AssignSplits(n, config.seed);
  data.parameters = {{"kind", "ingest"},
                     {"path", path},
                     {"target", target_column},
                     {"max_rows", config.max_rows},
                     {"seed", config.seed},
                     {"task", config.task}};
  StandardizeFromTraining(data);
  return data;
}

void WriteDatasetCsv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const std::string& name : data.feature_names) out << name << ',';
  out << "y,split\n";
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << FormatDouble(data.x(r, c)) << ',';
    out << FormatDouble(data.y[r]) << ',' << ToString(data.split[static_cast<std::size_t>(r)])
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

Dataset ReadDatasetCsv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = ReadCsvRows(path, header);
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "split") {
    throw std::invalid_argument(path + " is not a dataset file (expected ...,y,split)");
  }
  const std::size_t d = header.size() - 2;
  Dataset data;
  data.feature_names.assign(header.begin(), header.begin() + static_cast<long>(d));
  data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double v;
    for (std::size_t c = 0; c <= d; ++c) {
      if (!ParseDouble(rows[r][c], v)) {
        throw std::invalid_argument(path + ": bad number at row " + std::to_string(r + 2));
      }
      if (c < d) {
        data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      } else {
        data.y[static_cast<Eigen::Index>(r)] = v;
      }
    }
    data.split.push_back(SplitFromString(rows[r][d + 1]));
  }
  return data;
}

nlohmann::json DatasetManifest(const Dataset& data) {
  nlohmann::json j;
  j["task"] = data.task;
  j["parameters"] = data.parameters;
  j["rows"] = data.rows();
  j["features"] = data.feature_names;
  nlohmann::json splits;
  for (int s = 0; s < 4; ++s) {
    std::vector<std::size_t> idx = data.Indices(static_cast<Split>(s));
    for (auto& i : idx) ++i;
    splits[kSplitNames[s]] = idx;
  }
  j["splits"] = std::move(splits);
  j["standardized"] = data.standardized;
  if (data.standardized) {
    j["feature_mean"] = std::vector<double>(data.feature_mean.data(),
                                            data.feature_mean.data() + data.feature_mean.size());
    j["feature_scale"] = std::vector<double>(
        data.feature_scale.data(), data.feature_scale.data() + data.feature_scale.size());
  }
  j["warnings"] = data.warnings;
  return j;
}

}  // namespace semivalue
