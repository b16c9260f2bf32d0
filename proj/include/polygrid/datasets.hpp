#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polygrid/config.hpp"
#include "polygrid/model.hpp"

namespace polygrid::data {

struct Manifest {
  std::string source;
  double epsilon = 1e-6;
  /// Unit-scaled cells that were exactly 0 and got replaced by epsilon.
  int epsilon_shifted = 0;
  std::vector<double> scaling_maxima;
  nlohmann::json synthesis = nlohmann::json::object();
};

struct Dataset {
  std::string name;
  Eigen::MatrixXd X_raw;
  Eigen::MatrixXd X;  // unit-scaled
  Task task = Task::Multilabel;
  Eigen::MatrixXd Y;  // 0/1; one-hot for multiclass, downgraded for ranking
  RankMatrix ranks;   // ranking task only
  std::vector<std::string> domain_names;
  std::vector<std::string> label_names;
  /// Instrument score range per domain; empty when unknown.
  std::vector<std::pair<double, double>> ranges;
  Manifest manifest;

  int rows() const { return static_cast<int>(X_raw.rows()); }
  int domains() const { return static_cast<int>(X_raw.cols()); }
  int labels() const { return static_cast<int>(Y.cols()); }
};

/// Divides each column by its maximum and replaces exact zeros by epsilon.
/// Rejects negative and non-finite scores, and all-zero columns.
void prepare(Dataset& ds, double epsilon = 1e-6);

/// One CSV record split on commas; double quotes group and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

/// Header columns `domain:NAME` hold scores. Labels come from `label:NAME`
/// columns (0/1 each, or a single column of class names for multiclass) or from
/// `rank:POS` columns of label indices padded with -1. Other columns are ignored.
/// `task` nullopt infers: rank columns -> ranking, a single non-0/1 label
/// column -> multiclass, otherwise multilabel.
Dataset load_csv(const std::string& path, std::optional<Task> task = std::nullopt);

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

struct CongenericSpec {
  int d = 4;
  int m = 100;
  std::vector<double> loadings{0.84, 1.0, 0.85, 0.77};
  double eta_mean = 14.0;
  double eta_sd = 2.5;
  std::vector<double> error_variances{1.0, 1.0, 1.0, 1.0};
  std::vector<std::pair<double, double>> ranges{{4, 20}, {4, 20}, {4, 20}, {4, 20}};
};

nlohmann::json to_json(const CongenericSpec& s);
CongenericSpec congeneric_from_json(const nlohmann::json& j);

/// Raw score = loading * eta + noise, clipped to the domain range; eta is
/// normal, redrawn until positive. Returns assessments only (no labels).
Dataset synth_congeneric(const CongenericSpec& spec, std::uint64_t seed);

double mcdonald_omega(const std::vector<double>& loadings, const std::vector<double>& error_variances);

enum class AssignMode { SumscoreCutoff, FuzzyMultilabel, FuzzyRanking };
std::string to_string(AssignMode m);
AssignMode parse_assign_mode(const std::string& s);

struct AssignmentSynthSpec {
  AssignMode mode = AssignMode::SumscoreCutoff;
  double cutoff = 60.0;
  int n_labels = 2;
  double target_cardinality = 1.0;
  int top_k = 0;  // ranking mode; 0 keeps every label that passes the cut
  double fuzzifier = 2.0;
  int max_iter = 300;
  double tol = 1e-6;
  double cardinality_tolerance = 0.02;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const AssignmentSynthSpec& s);
AssignmentSynthSpec assignment_from_json(const nlohmann::json& j);

struct FuzzyClustering {
  Eigen::MatrixXd centroids;    // c x d
  Eigen::MatrixXd memberships;  // m x c, rows sum to 1
  int iterations = 0;
};

FuzzyClustering fuzzy_cmeans(const Eigen::MatrixXd& X, int clusters, double fuzzifier, int max_iter, double tol,
                             std::uint64_t seed);

/// Each row keeps its best cluster plus every cluster with membership >= lambda.
Eigen::MatrixXd lambda_cut(const Eigen::MatrixXd& memberships, double lambda);

struct AssignmentResult {
  Eigen::MatrixXd Y;
  RankMatrix ranks;  // ranking mode only
  std::vector<std::string> label_names;
  Task task = Task::Multilabel;
  double lambda = 0.0;
  double cardinality = 0.0;
  Eigen::MatrixXd memberships;
};

/// Sum-score mode labels rows "good" (sum >= cutoff) / "poor". Fuzzy modes
/// bisect lambda until the mean label count is within tolerance of target.
AssignmentResult synth_assignment(const Dataset& ds, const AssignmentSynthSpec& spec);

/// Writes the assignment into `ds` and records the spec in its manifest.
void attach_assignment(Dataset& ds, const AssignmentResult& a, const AssignmentSynthSpec& spec);

struct DatasetStats {
  int instances = 0;
  int features = 0;
  int labels = 0;
  double cardinality = 0.0;
  double density = 0.0;
  double imbalance = 0.0;  // 1 - min(label count) / max(label count)
  int labelsets = 0;
  int single_labelsets = 0;  // labelsets seen exactly once
  int max_labels = 0;
};

DatasetStats dataset_stats(const Eigen::MatrixXd& Y, int features);
nlohmann::json to_json(const DatasetStats& s);

struct ArrangementViolations {
  std::vector<int> arrangement;
  long long pairs = 0;      // pairs with distinct sums
  long long discarded = 0;  // pairs with equal sums
  long long violations = 0;
  double rate() const { return pairs ? static_cast<double>(violations) / pairs : 0.0; }
};

struct ViolationReport {
  std::vector<ArrangementViolations> arrangements;
  long long pairs = 0;
  long long violations = 0;
  double weighted_rate = 0.0;
};

/// True when the area ordering of a pair disagrees with its sum ordering.
bool sum_area_violation(double sum_a, double sum_b, double area_a, double area_b);

/// Checks every pair of rows of a unit-scaled matrix under each cyclic
/// arrangement of its columns. `max_arrangements` > 0 samples that many.
ViolationReport sum_area_violation_test(const Eigen::MatrixXd& X, int max_arrangements = 0,
                                        std::uint64_t seed = 0);
nlohmann::json to_json(const ViolationReport& r);

/// Loadings and error variances implied by a one-factor model, from the
/// sample covariance (triad estimates averaged over column pairs).
std::pair<std::vector<double>, std::vector<double>> one_factor_estimate(const Eigen::MatrixXd& X);

/// Fits on every row of `ds` and carries over its names and scaling maxima.
PolygridInstance fit_dataset(const Dataset& ds, const PolygridConfig& cfg);

/// Reliability, covariance sign check and violation report for a dataset.
nlohmann::json validate(const Dataset& ds, int max_arrangements = 0, std::uint64_t seed = 0);

}  // namespace polygrid::data
