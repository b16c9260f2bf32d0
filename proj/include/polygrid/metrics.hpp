#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polygrid/model.hpp"

namespace polygrid::eval {

enum class Direction { HigherBetter, LowerBetter };

Direction direction(const std::string& metric);
bool is_ranking_metric(const std::string& metric);
/// accuracy, hammingl, f1.micro, f1.macro, f1.weigh, jaccsim
const std::vector<std::string>& multilabel_metrics();
/// ktau, lracc, lrloss
const std::vector<std::string>& ranking_metrics();
/// True when `a` is strictly better than `b` under the metric's direction.
bool better(const std::string& metric, double a, double b);

// Label matrices are 0/1 with one row per instance.
double accuracy(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P);
double hamming_loss(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P);
/// Per-label F1 scores count as 1 when the label has no positives in either matrix.
double f1_micro(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P);
double f1_macro(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P);
double f1_weighted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P);

/// Overlap of the score ranges of negative and positive rows, per label,
/// as intersection length over union length, averaged over labels.
double jaccsim(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& scores);
/// The same overlap for two score samples.
double interval_jaccard(const std::vector<double>& negatives, const std::vector<double>& positives);

/// Rank correlation over label pairs ordered by the true ranking; pairs with a
/// label missing from the prediction count as discordant. Rows with one true
/// label score +1 iff it is predicted first; rows with none score +1 iff the
/// prediction is empty.
double kendall_tau(const RankMatrix& truth, const RankMatrix& predicted);
double lr_accuracy(const RankMatrix& truth, const RankMatrix& predicted);
double lr_loss(const RankMatrix& truth, const RankMatrix& predicted);

struct Outcome {
  Eigen::MatrixXd Y;       // truth, 0/1
  Eigen::MatrixXd P;       // predicted, 0/1
  Eigen::MatrixXd scores;  // continuous per-label scores (for jaccsim)
  RankMatrix truth_ranks;
  RankMatrix predicted_ranks;
};

double metric(const std::string& name, const Outcome& o);

}  // namespace polygrid::eval
