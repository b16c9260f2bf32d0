#include "polygrid/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "polygrid/error.hpp"
#include "polygrid/serialize.hpp"

namespace polygrid::data {

void prepare(Dataset& ds, double epsilon) {
  const Eigen::MatrixXd& R = ds.X_raw;
  if (R.rows() == 0 || R.cols() == 0) throw InvalidInput("dataset has no scores");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    for (Eigen::Index k = 0; k < R.cols(); ++k)
      if (!std::isfinite(R(i, k)) || R(i, k) < 0.0)
        throw InvalidInput("score at row " + std::to_string(i) + ", column " + std::to_string(k) +
                           " must be finite and nonnegative");

  ds.manifest.epsilon = epsilon;
  ds.manifest.epsilon_shifted = 0;
  ds.manifest.scaling_maxima.assign(R.cols(), 0.0);
  ds.X.resize(R.rows(), R.cols());
  for (Eigen::Index k = 0; k < R.cols(); ++k) {
    const double top = R.col(k).maxCoeff();
    if (!(top > 0.0)) throw InvalidInput("column " + std::to_string(k) + " is all zero");
    ds.manifest.scaling_maxima[k] = top;
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
      double v = R(i, k) / top;
      if (v == 0.0) {
        v = epsilon;
        ++ds.manifest.epsilon_shifted;
      }
      ds.X(i, k) = v;
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string where(const std::string& path, std::size_t line, const std::string& column) {
  return path + ":" + std::to_string(line) + " column '" + column + "'";
}

}  // namespace

Dataset load_csv(const std::string& path, std::optional<Task> task) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
  const auto header = split_csv_line(line);

  std::vector<std::size_t> domain_cols, label_cols;
  std::vector<std::pair<int, std::size_t>> rank_cols;
  Dataset ds;
  ds.name = path;
  ds.manifest.source = path;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string h = trim(header[c]);
    if (h.rfind("domain:", 0) == 0) {
      domain_cols.push_back(c);
      ds.domain_names.push_back(h.substr(7));
    } else if (h.rfind("label:", 0) == 0) {
      label_cols.push_back(c);
      ds.label_names.push_back(h.substr(6));
    } else if (h.rfind("rank:", 0) == 0) {
      double pos = 0;
      if (!parse_double(h.substr(5), pos)) throw InvalidInput(path + ": bad rank column header '" + h + "'");
      rank_cols.emplace_back(static_cast<int>(pos), c);
    }
  }
  if (domain_cols.size() < 3) throw InvalidInput(path + ": need at least 3 'domain:' columns");
  if (!label_cols.empty() && !rank_cols.empty()) throw InvalidInput(path + ": mix of 'label:' and 'rank:' columns");
  std::sort(rank_cols.begin(), rank_cols.end());

  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  std::vector<std::size_t> linenos;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidInput(path + ":" + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(header.size()));
    rows.push_back(std::move(cells));
    linenos.push_back(lineno);
  }
  if (rows.empty()) throw InvalidInput(path + " has no data rows");
  const auto m = static_cast<Eigen::Index>(rows.size());

  ds.X_raw.resize(m, static_cast<Eigen::Index>(domain_cols.size()));
  for (Eigen::Index i = 0; i < m; ++i)
    for (std::size_t k = 0; k < domain_cols.size(); ++k) {
      const std::string& cell = rows[i][domain_cols[k]];
      const std::string at = where(path, linenos[i], trim(header[domain_cols[k]]));
      if (trim(cell).empty()) throw InvalidInput(at + ": missing value");
      double v = 0;
      if (!parse_double(cell, v)) throw InvalidInput(at + ": not a number: '" + cell + "'");
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput(at + ": score must be finite and nonnegative, got " + trim(cell));
      ds.X_raw(i, static_cast<Eigen::Index>(k)) = v;
    }

  if (!rank_cols.empty()) {
    if (task && *task != Task::LabelRanking) throw InvalidInput(path + ": rank columns need the ranking task");
    ds.task = Task::LabelRanking;
    const auto n = static_cast<Eigen::Index>(rank_cols.size());
    ds.ranks.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index p = 0; p < n; ++p) {
        double v = 0;
        const std::string& cell = rows[i][rank_cols[p].second];
        if (!parse_double(cell, v) || v != std::floor(v))
          throw InvalidInput(where(path, linenos[i], trim(header[rank_cols[p].second])) + ": not a label index: '" + cell + "'");
        ds.ranks(i, p) = static_cast<int>(v);
      }
    try {
      ds.Y = downgrade(ds.ranks);
    } catch (const InvalidInput& e) {
      throw InvalidInput(path + ": " + e.what());
    }
    for (Eigen::Index j = 0; j < n; ++j) ds.label_names.push_back("label" + std::to_string(j));
  } else if (!label_cols.empty()) {
    bool binary = true;
    for (const auto& r : rows)
      for (auto c : label_cols) {
        const auto v = trim(r[c]);
        binary = binary && (v == "0" || v == "1");
      }
    const bool multiclass = task ? *task == Task::Multiclass : (label_cols.size() == 1 && !binary);
    if (task && *task == Task::LabelRanking) throw InvalidInput(path + ": ranking task needs 'rank:' columns");
    if (multiclass) {
      if (label_cols.size() != 1) throw InvalidInput(path + ": multiclass data needs exactly one 'label:' column");
      std::vector<std::string> classes;
      for (const auto& r : rows) {
        const auto v = trim(r[label_cols[0]]);
        if (std::find(classes.begin(), classes.end(), v) == classes.end()) classes.push_back(v);
      }
      ds.task = Task::Multiclass;
      ds.label_names = classes;
      ds.Y = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(classes.size()));
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto v = trim(rows[i][label_cols[0]]);
        if (v.empty()) throw InvalidInput(where(path, linenos[i], trim(header[label_cols[0]])) + ": missing label");
        ds.Y(i, std::find(classes.begin(), classes.end(), v) - classes.begin()) = 1.0;
      }
    } else {
      ds.task = Task::Multilabel;
      ds.Y.resize(m, static_cast<Eigen::Index>(label_cols.size()));
      for (Eigen::Index i = 0; i < m; ++i)
        for (std::size_t j = 0; j < label_cols.size(); ++j) {
          const auto v = trim(rows[i][label_cols[j]]);
          if (v != "0" && v != "1")
            throw InvalidInput(where(path, linenos[i], trim(header[label_cols[j]])) + ": label must be 0 or 1, got '" + v + "'");
          ds.Y(i, static_cast<Eigen::Index>(j)) = v == "1" ? 1.0 : 0.0;
        }
    }
  } else {
    ds.Y.resize(m, 0);
  }
  prepare(ds);
  return ds;
}

nlohmann::json dataset_to_json(const Dataset& ds) {
  nlohmann::json j;
  j["format"] = "polygrid-dataset";
  j["name"] = ds.name;
  j["task"] = to_string(ds.task);
  j["domain_names"] = ds.domain_names;
  j["label_names"] = ds.label_names;
  j["X_raw"] = matrix_to_json(ds.X_raw);
  j["X"] = matrix_to_json(ds.X);
  j["Y"] = matrix_to_json(ds.Y);
  if (ds.task == Task::LabelRanking) j["ranks"] = matrix_to_json(ds.ranks.cast<double>());
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& [lo, hi] : ds.ranges) ranges.push_back({lo, hi});
  j["ranges"] = ranges;
  j["manifest"] = {{"source", ds.manifest.source},
                   {"epsilon", ds.manifest.epsilon},
                   {"epsilon_shifted", ds.manifest.epsilon_shifted},
                   {"scaling_maxima", ds.manifest.scaling_maxima},
                   {"synthesis", ds.manifest.synthesis}};
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "polygrid-dataset") throw InvalidInput("not a polygrid dataset document");
    Dataset ds;
    ds.name = j.at("name").get<std::string>();
    ds.task = parse_task(j.at("task").get<std::string>());
    ds.domain_names = j.at("domain_names").get<std::vector<std::string>>();
    ds.label_names = j.at("label_names").get<std::vector<std::string>>();
    ds.X_raw = matrix_from_json(j.at("X_raw"), "X_raw");
    ds.X = matrix_from_json(j.at("X"), "X");
    ds.Y = matrix_from_json(j.at("Y"), "Y");
    if (ds.Y.rows() == 0) ds.Y.resize(ds.X_raw.rows(), 0);
    if (j.contains("ranks")) ds.ranks = matrix_from_json(j.at("ranks"), "ranks").cast<int>();
    for (const auto& r : j.at("ranges")) ds.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    const auto& mf = j.at("manifest");
    ds.manifest.source = mf.at("source").get<std::string>();
    ds.manifest.epsilon = mf.at("epsilon").get<double>();
    ds.manifest.epsilon_shifted = mf.at("epsilon_shifted").get<int>();
    ds.manifest.scaling_maxima = mf.at("scaling_maxima").get<std::vector<double>>();
    ds.manifest.synthesis = mf.at("synthesis");
    if (ds.X.rows() != ds.X_raw.rows() || ds.X.cols() != ds.X_raw.cols())
      throw InvalidInput("X and X_raw differ in shape");
    if (ds.Y.rows() != ds.X.rows()) throw InvalidInput("Y and X differ in rows");
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed dataset document: ") + e.what());
  }
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << dataset_to_json(ds).dump(1) << '\n';
}

Dataset load_dataset(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return load_csv(path);
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  try {
    return dataset_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

nlohmann::json to_json(const CongenericSpec& s) {
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& [lo, hi] : s.ranges) ranges.push_back({lo, hi});
  return {{"d", s.d},
          {"m", s.m},
          {"loadings", s.loadings},
          {"eta_mean", s.eta_mean},
          {"eta_sd", s.eta_sd},
          {"error_variances", s.error_variances},
          {"ranges", ranges}};
}

CongenericSpec congeneric_from_json(const nlohmann::json& j) {
  CongenericSpec s;
  try {
    s.d = j.value("d", s.d);
    s.m = j.value("m", s.m);
    s.loadings = j.value("loadings", s.loadings);
    s.eta_mean = j.value("eta_mean", s.eta_mean);
    s.eta_sd = j.value("eta_sd", s.eta_sd);
    s.error_variances = j.value("error_variances", s.error_variances);
    if (j.contains("ranges")) {
      s.ranges.clear();
      for (const auto& r : j.at("ranges")) s.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed congeneric spec: ") + e.what());
  }
  return s;
}

Dataset synth_congeneric(const CongenericSpec& spec, std::uint64_t seed) {
  const int d = spec.d;
  if (d < 3) throw InvalidInput("congeneric data needs d >= 3");
  if (spec.m < 1) throw InvalidInput("congeneric data needs m >= 1");
  if (static_cast<int>(spec.loadings.size()) != d || static_cast<int>(spec.error_variances.size()) != d ||
      static_cast<int>(spec.ranges.size()) != d)
    throw DimensionMismatch("loadings, error variances and ranges need d entries each");
  for (int k = 0; k < d; ++k) {
    if (!(spec.loadings[k] > 0.0)) throw InvalidInput("loading " + std::to_string(k) + " must be positive");
    if (spec.error_variances[k] < 0.0) throw InvalidInput("error variance " + std::to_string(k) + " is negative");
    if (!(spec.ranges[k].first < spec.ranges[k].second)) throw InvalidInput("range " + std::to_string(k) + " is empty");
  }
  if (!(spec.eta_sd >= 0.0)) throw InvalidInput("eta_sd must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eta_dist(spec.eta_mean, spec.eta_sd);
  std::normal_distribution<double> unit(0.0, 1.0);
  Dataset ds;
  ds.name = "congeneric";
  ds.X_raw.resize(spec.m, d);
  for (int i = 0; i < spec.m; ++i) {
    double eta = eta_dist(rng);
    for (int tries = 0; eta <= 0.0; ++tries) {
      if (tries > 10000) throw InvalidInput("eta distribution has almost no positive mass");
      eta = eta_dist(rng);
    }
    for (int k = 0; k < d; ++k) {
      const double noise = std::sqrt(spec.error_variances[k]) * unit(rng);
      ds.X_raw(i, k) = std::clamp(spec.loadings[k] * eta + noise, spec.ranges[k].first, spec.ranges[k].second);
    }
  }
  for (int k = 0; k < d; ++k) ds.domain_names.push_back("domain" + std::to_string(k));
  ds.ranges = spec.ranges;
  ds.Y.resize(spec.m, 0);
  ds.manifest.source = "synthetic";
  ds.manifest.synthesis["congeneric"] = to_json(spec);
  ds.manifest.synthesis["seed"] = seed;
  prepare(ds);
  return ds;
}

double mcdonald_omega(const std::vector<double>& loadings, const std::vector<double>& error_variances) {
  if (loadings.size() != error_variances.size()) throw DimensionMismatch("loadings and error variances differ in length");
  double lambda = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < loadings.size(); ++k) {
    if (loadings[k] < 0.0) throw InvalidInput("loadings must be nonnegative");
    if (error_variances[k] < 0.0) throw InvalidInput("error variances must be nonnegative");
    lambda += loadings[k];
    theta += error_variances[k];
  }
  if (!(lambda > 0.0)) throw InvalidInput("omega needs at least one positive loading");
  return lambda * lambda / (lambda * lambda + theta);
}

std::string to_string(AssignMode m) {
  switch (m) {
    case AssignMode::SumscoreCutoff: return "sumscore-cutoff";
    case AssignMode::FuzzyMultilabel: return "fuzzy-multilabel";
    case AssignMode::FuzzyRanking: return "fuzzy-ranking";
  }
  return "?";
}

AssignMode parse_assign_mode(const std::string& s) {
  if (s == "sumscore-cutoff") return AssignMode::SumscoreCutoff;
  if (s == "fuzzy-multilabel") return AssignMode::FuzzyMultilabel;
  if (s == "fuzzy-ranking") return AssignMode::FuzzyRanking;
  throw InvalidInput("unknown assignment mode '" + s + "'");
}

nlohmann::json to_json(const AssignmentSynthSpec& s) {
  return {{"mode", to_string(s.mode)},
          {"cutoff", s.cutoff},
          {"n_labels", s.n_labels},
          {"target_cardinality", s.target_cardinality},
          {"top_k", s.top_k},
          {"fuzzifier", s.fuzzifier},
          {"max_iter", s.max_iter},
          {"tol", s.tol},
          {"cardinality_tolerance", s.cardinality_tolerance},
          {"seed", s.seed}};
}

AssignmentSynthSpec assignment_from_json(const nlohmann::json& j) {
  AssignmentSynthSpec s;
  try {
    if (j.contains("mode")) s.mode = parse_assign_mode(j.at("mode").get<std::string>());
    s.cutoff = j.value("cutoff", s.cutoff);
    s.n_labels = j.value("n_labels", s.n_labels);
    s.target_cardinality = j.value("target_cardinality", s.target_cardinality);
    s.top_k = j.value("top_k", s.top_k);
    s.fuzzifier = j.value("fuzzifier", s.fuzzifier);
    s.max_iter = j.value("max_iter", s.max_iter);
    s.tol = j.value("tol", s.tol);
    s.cardinality_tolerance = j.value("cardinality_tolerance", s.cardinality_tolerance);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed assignment spec: ") + e.what());
  }
  return s;
}

FuzzyClustering fuzzy_cmeans(const Eigen::MatrixXd& X, int clusters, double fuzzifier, int max_iter, double tol,
                             std::uint64_t seed) {
  const Eigen::Index m = X.rows();
  if (clusters < 1 || clusters > m) throw InvalidInput("cluster count must lie in [1, rows]");
  if (!(fuzzifier > 1.0)) throw InvalidInput("fuzzifier must exceed 1");

  std::mt19937_64 rng(seed);
  std::vector<int> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);

  FuzzyClustering fc;
  fc.centroids.resize(clusters, X.cols());
  for (int c = 0; c < clusters; ++c) fc.centroids.row(c) = X.row(pick[c]);
  fc.memberships = Eigen::MatrixXd::Zero(m, clusters);
  const double power = 2.0 / (fuzzifier - 1.0);

  Eigen::MatrixXd dist(m, clusters);
  for (int it = 0; it < max_iter; ++it) {
    fc.iterations = it + 1;
    for (Eigen::Index i = 0; i < m; ++i)
      for (int c = 0; c < clusters; ++c) dist(i, c) = (X.row(i) - fc.centroids.row(c)).norm();

    Eigen::MatrixXd U(m, clusters);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int zeros = static_cast<int>((dist.row(i).array() == 0.0).count());
      if (zeros > 0) {
        for (int c = 0; c < clusters; ++c) U(i, c) = dist(i, c) == 0.0 ? 1.0 / zeros : 0.0;
        continue;
      }
      for (int c = 0; c < clusters; ++c) {
        double acc = 0.0;
        for (int o = 0; o < clusters; ++o) acc += std::pow(dist(i, c) / dist(i, o), power);
        U(i, c) = 1.0 / acc;
      }
    }
    const double change = (U - fc.memberships).cwiseAbs().maxCoeff();
    fc.memberships = U;

    const Eigen::MatrixXd Um = U.array().pow(fuzzifier).matrix();
    for (int c = 0; c < clusters; ++c) {
      const double w = Um.col(c).sum();
      if (w > 0.0) fc.centroids.row(c) = (Um.col(c).transpose() * X) / w;
    }
    if (change < tol) break;
  }
  return fc;
}

Eigen::MatrixXd lambda_cut(const Eigen::MatrixXd& U, double lambda) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(U.rows(), U.cols());
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    Eigen::Index best = 0;
    U.row(i).maxCoeff(&best);
    Y(i, best) = 1.0;
    for (Eigen::Index c = 0; c < U.cols(); ++c)
      if (U(i, c) >= lambda) Y(i, c) = 1.0;
  }
  return Y;
}

namespace {

double mean_cardinality(const Eigen::MatrixXd& Y) { return Y.rows() ? Y.sum() / Y.rows() : 0.0; }

}  // namespace

AssignmentResult synth_assignment(const Dataset& ds, const AssignmentSynthSpec& spec) {
  AssignmentResult out;
  const Eigen::Index m = ds.rows();
  if (m == 0) throw InvalidInput("dataset has no rows");

  if (spec.mode == AssignMode::SumscoreCutoff) {
    out.task = Task::Multiclass;
    out.label_names = {"good", "poor"};
    out.Y = Eigen::MatrixXd::Zero(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) out.Y(i, ds.X_raw.row(i).sum() >= spec.cutoff ? 0 : 1) = 1.0;
    out.cardinality = 1.0;
    return out;
  }

  const int n = spec.n_labels;
  if (n < 1) throw InvalidInput("n_labels must be >= 1");
  if (spec.target_cardinality < 1.0 || spec.target_cardinality > n)
    throw InvalidInput("target_cardinality must lie in [1, n_labels]");
  const auto fc = fuzzy_cmeans(ds.X, n, spec.fuzzifier, spec.max_iter, spec.tol, spec.seed);
  out.memberships = fc.memberships;
  for (int j = 0; j < n; ++j) out.label_names.push_back("cluster" + std::to_string(j));

  // Cardinality falls as lambda rises; bisect on [0, 1].
  double lo = 0.0, hi = 1.0;
  double lambda = 0.5;
  Eigen::MatrixXd Y = lambda_cut(fc.memberships, lambda);
  double card = mean_cardinality(Y);
  for (int it = 0; it < 200 && std::abs(card - spec.target_cardinality) > spec.cardinality_tolerance; ++it) {
    if (card > spec.target_cardinality)
      lo = lambda;
    else
      hi = lambda;
    lambda = 0.5 * (lo + hi);
    Y = lambda_cut(fc.memberships, lambda);
    card = mean_cardinality(Y);
  }
  if (std::abs(card - spec.target_cardinality) > spec.cardinality_tolerance) {
    std::ostringstream msg;
    msg << "cardinality target " << spec.target_cardinality << " unreachable: achieved "
        << mean_cardinality(lambda_cut(fc.memberships, hi)) << " to " << mean_cardinality(lambda_cut(fc.memberships, lo))
        << " around lambda " << lambda;
    throw InvalidInput(msg.str());
  }
  out.lambda = lambda;
  out.cardinality = card;

  if (spec.mode == AssignMode::FuzzyMultilabel) {
    out.task = Task::Multilabel;
    out.Y = Y;
    return out;
  }

  out.task = Task::LabelRanking;
  out.ranks = RankMatrix::Constant(m, n, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<int> present;
    for (int j = 0; j < n; ++j)
      if (Y(i, j) > 0.5) present.push_back(j);
    std::stable_sort(present.begin(), present.end(),
                     [&](int a, int b) { return fc.memberships(i, a) > fc.memberships(i, b); });
    if (spec.top_k > 0 && static_cast<int>(present.size()) > spec.top_k) present.resize(spec.top_k);
    for (std::size_t p = 0; p < present.size(); ++p) out.ranks(i, static_cast<Eigen::Index>(p)) = present[p];
  }
  out.Y = downgrade(out.ranks);
  out.cardinality = mean_cardinality(out.Y);
  return out;
}

void attach_assignment(Dataset& ds, const AssignmentResult& a, const AssignmentSynthSpec& spec) {
  ds.task = a.task;
  ds.Y = a.Y;
  ds.ranks = a.ranks;
  ds.label_names = a.label_names;
  ds.manifest.synthesis["assignment"] = to_json(spec);
  ds.manifest.synthesis["lambda"] = a.lambda;
  ds.manifest.synthesis["cardinality"] = a.cardinality;
}

DatasetStats dataset_stats(const Eigen::MatrixXd& Y, int features) {
  DatasetStats s;
  s.instances = static_cast<int>(Y.rows());
  s.features = features;
  s.labels = static_cast<int>(Y.cols());
  if (Y.rows() == 0 || Y.cols() == 0) return s;
  s.cardinality = Y.sum() / Y.rows();
  s.density = s.cardinality / Y.cols();
  const Eigen::VectorXd counts = Y.colwise().sum().transpose();
  const double top = counts.maxCoeff();
  s.imbalance = top > 0.0 ? 1.0 - counts.minCoeff() / top : 0.0;
  std::map<std::vector<int>, int> sets;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    std::vector<int> key(Y.cols());
    for (Eigen::Index j = 0; j < Y.cols(); ++j) key[j] = Y(i, j) > 0.5;
    ++sets[key];
    s.max_labels = std::max(s.max_labels, static_cast<int>(std::accumulate(key.begin(), key.end(), 0)));
  }
  s.labelsets = static_cast<int>(sets.size());
  for (const auto& [key, count] : sets) s.single_labelsets += count == 1;
  return s;
}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"instances", s.instances},   {"features", s.features},   {"labels", s.labels},
          {"cardinality", s.cardinality}, {"density", s.density},     {"imbalance", s.imbalance},
          {"labelsets", s.labelsets},   {"single_labelsets", s.single_labelsets}, {"max_labels", s.max_labels}};
}

bool sum_area_violation(double sum_a, double sum_b, double area_a, double area_b) {
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  return sign(area_a - area_b) != sign(sum_a - sum_b);
}

ViolationReport sum_area_violation_test(const Eigen::MatrixXd& X, int max_arrangements, std::uint64_t seed) {
  const auto d = static_cast<int>(X.cols());
  const auto m = static_cast<long long>(X.rows());
  auto arrangements = cyclic_arrangements(d);
  if (max_arrangements > 0 && static_cast<int>(arrangements.size()) > max_arrangements) {
    std::mt19937_64 rng(seed);
    std::shuffle(arrangements.begin(), arrangements.end(), rng);
    arrangements.resize(max_arrangements);
    std::sort(arrangements.begin(), arrangements.end());
  }
  const double nu = std::sin(2.0 * M_PI / d) / 2.0;
  const Eigen::VectorXd sums = X.rowwise().sum();

  ViolationReport report;
  Eigen::VectorXd areas(m);
  for (const auto& arr : arrangements) {
    for (long long i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) acc += X(i, arr[k]) * X(i, arr[(k + 1) % d]);
      areas(i) = nu * acc;
    }
    long long pairs = 0, discarded = 0, violations = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : pairs, discarded, violations)
    for (long long a = 0; a < m; ++a)
      for (long long b = a + 1; b < m; ++b) {
        if (sums(a) == sums(b)) {
          ++discarded;
          continue;
        }
        ++pairs;
        violations += sum_area_violation(sums(a), sums(b), areas(a), areas(b));
      }
    report.arrangements.push_back({arr, pairs, discarded, violations});
    report.pairs += pairs;
    report.violations += violations;
  }
  report.weighted_rate = report.pairs ? static_cast<double>(report.violations) / report.pairs : 0.0;
  return report;
}

nlohmann::json to_json(const ViolationReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : r.arrangements)
    arr.push_back({{"arrangement", a.arrangement},
                   {"pairs", a.pairs},
                   {"discarded", a.discarded},
                   {"violations", a.violations},
                   {"rate", a.rate()}});
  return {{"arrangements", arr}, {"pairs", r.pairs}, {"violations", r.violations}, {"weighted_rate", r.weighted_rate}};
}

std::pair<std::vector<double>, std::vector<double>> one_factor_estimate(const Eigen::MatrixXd& X) {
  const Eigen::Index d = X.cols();
  if (d < 3 || X.rows() < 2) throw InvalidInput("one-factor estimate needs d >= 3 and m >= 2");
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
  std::vector<double> loadings(d), errors(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double acc = 0.0;
    int used = 0;
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = a + 1; b < d; ++b) {
        if (a == k || b == k || cov(a, b) == 0.0) continue;
        const double sq = cov(k, a) * cov(k, b) / cov(a, b);
        if (sq > 0.0) {
          acc += std::sqrt(sq);
          ++used;
        }
      }
    loadings[k] = used ? acc / used : 0.0;
    errors[k] = std::max(0.0, cov(k, k) - loadings[k] * loadings[k]);
  }
  return {loadings, errors};
}

nlohmann::json validate(const Dataset& ds, int max_arrangements, std::uint64_t seed) {
  nlohmann::json j;
  std::vector<double> loadings, errors;
  const auto& syn = ds.manifest.synthesis;
  if (syn.contains("congeneric")) {
    loadings = syn["congeneric"]["loadings"].get<std::vector<double>>();
    errors = syn["congeneric"]["error_variances"].get<std::vector<double>>();
    j["omega_source"] = "generating model";
  } else {
    std::tie(loadings, errors) = one_factor_estimate(ds.X_raw);
    j["omega_source"] = "one-factor estimate";
  }
  j["loadings"] = loadings;
  j["error_variances"] = errors;
  j["omega"] = mcdonald_omega(loadings, errors);

  const Eigen::MatrixXd centered = ds.X_raw.rowwise() - ds.X_raw.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, ds.rows() - 1.0);
  bool positive = true;
  for (Eigen::Index a = 0; a < cov.rows(); ++a)
    for (Eigen::Index b = a + 1; b < cov.cols(); ++b) positive = positive && cov(a, b) > 0.0;
  j["covariance"] = matrix_to_json(cov);
  j["covariances_positive"] = positive;
  j["sum_area"] = to_json(sum_area_violation_test(ds.X, max_arrangements, seed));
  return j;
}

PolygridInstance fit_dataset(const Dataset& ds, const PolygridConfig& cfg) {
  PolygridInstance inst = ds.task == Task::LabelRanking ? fit_labelranking(ds.X, ds.ranks, cfg)
                                                        : fit_multilabel(ds.X, ds.Y, cfg, ds.task);
  if (!ds.domain_names.empty()) inst.domain_names = ds.domain_names;
  if (!ds.label_names.empty()) inst.label_names = ds.label_names;
  inst.scale_maxima = ds.manifest.scaling_maxima;
  return inst;
}

}  // namespace polygrid::data
