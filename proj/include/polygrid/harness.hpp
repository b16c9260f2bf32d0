#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polygrid/baselines.hpp"
#include "polygrid/config.hpp"
#include "polygrid/datasets.hpp"

namespace polygrid::eval {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
  bool degenerate = false;  // fewer than two values: zero width by convention
};

/// Two-sided Student-t interval around the sample mean.
Interval t_interval(const std::vector<double>& sample, double alpha = 0.05);
double mean(const std::vector<double>& sample);

struct Split {
  std::vector<int> train;
  std::vector<int> test;
  int redraws = 0;  // attempts discarded because a label was missing from train
};

/// Shuffled train/test split, seeded by (seed, repetition, attempt). Redraws
/// while some label has no positive training row.
Split make_split(const data::Dataset& ds, double train_ratio, std::uint64_t seed, int repetition);

struct ModelSpec {
  std::string id;  // "polygrid" or a baseline name
  bool is_polygrid = true;
  PolygridConfig config{};
  baselines::Variant variant = baselines::Variant::Linear;
  int target = 0;  // weight budget for baselines
  double ridge_lambda = 1.0;

  static ModelSpec polygrid(const PolygridConfig& cfg, std::string id = "polygrid");
  static ModelSpec baseline(baselines::Variant v, int target, double ridge_lambda = 1.0);
};

struct RunResult {
  std::string dataset;
  std::string model;
  std::string config;
  std::string metric;
  std::vector<double> sample;
  double estimate = 0.0;
  Interval ci;
  double size = 0.0;  // mean model size over repetitions
  int redraws = 0;
};

struct ExperimentOptions {
  int ss = 50;
  double train_ratio = 0.8;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics;  // empty: every metric of the task
  bool parallel = true;
};

std::vector<std::string> metrics_for(Task task);

/// One RunResult per metric. Deterministic in (data, spec, options).
std::vector<RunResult> run_experiment(const data::Dataset& ds, const ModelSpec& spec, const ExperimentOptions& opt);

struct GridEntry {
  std::size_t index = 0;
  PolygridConfig config;
  std::vector<RunResult> results;  // one per metric, in options order
  std::string error;               // non-empty when the config could not be fitted
};

struct GridOutcome {
  std::vector<GridEntry> entries;
  std::map<std::string, std::size_t> best;  // metric -> entry position
};

/// Evaluates every config; per metric the best estimate wins, ties going to the
/// smaller model and then the lower index.
GridOutcome grid_search(const data::Dataset& ds, const GridSpec& grid, const ExperimentOptions& opt);

/// Stage 2: the best config per metric against every baseline at that config's size.
std::vector<RunResult> compare_models(const data::Dataset& ds, const GridOutcome& grid,
                                      const std::vector<baselines::Variant>& variants, const ExperimentOptions& opt);

struct DominanceMatrix {
  std::string metric;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<std::vector<int>> counts;  // counts[a][b]: datasets where a beats b with disjoint CIs
};

struct Echelon {
  std::string leader;
  std::vector<std::string> members;  // leader first
};

struct Ranking {
  DominanceMatrix dominance;
  std::vector<double> average_ranks;  // aligned with dominance.models
  std::vector<Echelon> echelons;
};

/// Results must cover every (model, dataset) pair for the metric.
Ranking dominance_and_echelons(const std::vector<RunResult>& results, const std::string& metric);

/// Leader-hiring over given ranks and counts.
std::vector<Echelon> form_echelons(const std::vector<std::string>& models, const std::vector<double>& average_ranks,
                                   const std::vector<std::vector<int>>& counts);

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results);
std::vector<RunResult> read_results_csv(std::istream& in);
nlohmann::json to_json(const Ranking& r);

}  // namespace polygrid::eval
