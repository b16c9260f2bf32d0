#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polygrid/config.hpp"
#include "polygrid/model.hpp"

namespace polygrid::baselines {

enum class Variant { Linear, Ridge, Random, DT, BRDT, RF, BRRF, MLP };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
const std::vector<Variant>& all_variants();

/// Hidden-layer widths whose weight counts h(d+1) + n(h+1) track `target`
/// across repetitions: each step aims at the deficit left by the previous
/// ones, rounding up on even steps and down on odd steps, never below 1.
std::vector<int> mlp_size_schedule(int target, int d, int n, int repetitions);
int mlp_size(int hidden, int d, int n);

/// Total split counts for an ensemble of `trees` trees (each tree holding at
/// least one split) whose weight counts 3s + trees track `target`.
std::vector<int> tree_split_schedule(int target, int trees, int repetitions);

struct Output {
  Eigen::MatrixXd scores;  // continuous per-label scores
  Eigen::MatrixXd labels;  // 0/1
  RankMatrix ranks;        // label-ranking task only
};

class Model {
 public:
  virtual ~Model() = default;
  virtual Output predict(const Eigen::MatrixXd& X) const = 0;
  virtual int size() const = 0;
};

struct FitRequest {
  Variant variant = Variant::Linear;
  Task task = Task::Multilabel;
  /// Weight budget (for tree models and the MLP) at this repetition.
  int target = 0;
  /// Repetition index; selects the entry of the budget schedule.
  int repetition = 0;
  /// Schedule length used when planning the budget.
  int repetitions = 1;
  double ridge_lambda = 1.0;
  int mlp_epochs = 2000;
  double mlp_learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// X unit-scaled; Y 0/1 (one-hot for multiclass). For label ranking pass the
/// ranking matrix as well; Y is then ignored.
std::unique_ptr<Model> fit_baseline(const FitRequest& req, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const RankMatrix* ranks = nullptr);

}  // namespace polygrid::baselines
