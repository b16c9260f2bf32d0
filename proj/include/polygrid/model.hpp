#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polygrid/config.hpp"
#include "polygrid/geometry.hpp"

namespace polygrid {

/// Ranking rows hold label indices best-first, padded with -1.
using RankMatrix = Eigen::MatrixXi;

/// Binary presence of every label listed in each ranking row.
Eigen::MatrixXd downgrade(const RankMatrix& ranks);

/// Row-stochastic membership: position p of a row gets 2^(n-1-p) before
/// normalisation, absent labels get 0.
Eigen::MatrixXd logranks(const RankMatrix& ranks);

/// Throws on out-of-range labels, duplicates, or labels after a filler.
void check_ranking(const RankMatrix& ranks, int n_labels);

/// Cyclic arrangements of 0..d-1 up to rotation and reflection: 0 first,
/// second entry below the last, lexicographic order. (d-1)!/2 of them for d >= 3.
std::vector<std::vector<int>> cyclic_arrangements(int d);

/// Permutation `order` where polygon vertex k takes column order[k].
std::vector<int> order_vertices(const Eigen::MatrixXd& X, VertexOrder vorder);

struct Prediction {
  Eigen::VectorXd scores;  // yhat per label
  std::vector<int> labels;
  std::optional<std::vector<int>> ranking;
  std::optional<Eigen::VectorXd> membership;
  /// contributions(j, r) = W(j, r) * features(r); row sums plus intercept give scores.
  Eigen::MatrixXd contributions;
  Eigen::VectorXd coverage;  // area of the polygon inside each cell
  Eigen::VectorXd features;  // coverage as the solver sees it
  double area = 0.0;
};

struct PolygridInstance {
  PolygridConfig config;
  Task task = Task::Multilabel;
  int domains = 0;
  std::vector<int> vertex_order;
  geom::DiscPartition partition;
  Eigen::MatrixXd W;  // labels x cells
  std::optional<Eigen::VectorXd> intercepts;
  bool intercepts_fitted = false;
  /// One per label; every entry is the shared value under the single scheme
  /// except for labels flagged below.
  Eigen::VectorXd thresholds;
  /// Labels with no positive (threshold +inf) or no negative (-inf) training row.
  std::vector<int> degenerate_labels;
  Eigen::MatrixXd prototypes;  // labels x domains, dataset column order
  std::vector<std::string> label_names;
  std::vector<std::string> domain_names;
  std::optional<Eigen::MatrixXd> membership_W;
  std::optional<Eigen::VectorXd> membership_intercepts;
  bool membership_intercepts_fitted = false;
  /// Column maxima of the raw data, when known; lets callers submit raw scores.
  std::vector<double> scale_maxima;

  int labels() const { return static_cast<int>(W.rows()); }
  int cells() const { return static_cast<int>(W.cols()); }
  /// Dense weights, counting fitted intercepts, doubled for ranking instances.
  int size() const;

  geom::RootsOfUnity roots() const { return geom::RootsOfUnity(domains); }
  /// Assessment polygon of a unit-scaled row given in dataset column order.
  geom::Polygon polygon(std::span<const double> x) const;

  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict_batch(const Eigen::MatrixXd& X) const;
  /// Just the 0/1 decisions, one row per input row.
  Eigen::MatrixXd decide_batch(const Eigen::MatrixXd& X) const;
  /// Ranking rows with -1 filler (label-ranking instances only).
  RankMatrix rank_batch(const Eigen::MatrixXd& X) const;
};

/// Y is binary (multiclass as one-hot). X must be unit-scaled.
PolygridInstance fit_multilabel(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                const PolygridConfig& cfg, Task task = Task::Multilabel);

/// Label count is ranks.cols().
PolygridInstance fit_labelranking(const Eigen::MatrixXd& X, const RankMatrix& ranks, const PolygridConfig& cfg);

/// Annulus boundaries learnt from a shallow regression tree; may return fewer
/// than n_a - 1 values when the tree finds fewer well-separated thresholds.
std::vector<double> tree_radii(const Eigen::MatrixXd& X, const Eigen::VectorXd& target, int n_a);

struct ThresholdChoice {
  Eigen::VectorXd thresholds;
  std::vector<int> degenerate_labels;
};

/// Threshold search on training reconstructions Yhat against Y.
ThresholdChoice select_thresholds(const Eigen::MatrixXd& Yhat, const Eigen::MatrixXd& Y,
                                  CutoffScheme scheme, int granularity, Task task);

/// Label decisions for one score row: yhat_j >= t_j, with argmax fallback for
/// multiclass rows that would otherwise be empty.
std::vector<int> decide(std::span<const double> yhat, const Eigen::VectorXd& thresholds, Task task);

/// Sorts the present labels by descending membership, ties by index.
std::vector<int> rank_present(std::span<const int> labels, std::span<const double> membership);

}  // namespace polygrid
