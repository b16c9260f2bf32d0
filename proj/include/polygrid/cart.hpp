#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polygrid::cart {

struct TreeParams {
  int max_depth = -1;     // < 0: unlimited
  int max_splits = -1;    // < 0: unlimited
  int max_features = 0;   // features tried per node; 0 = all
  int min_leaf = 1;
};

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  Eigen::VectorXd value;  // mean target of the rows reaching this node
};

/// A split the tree actually made, in the order it was made (largest gain first).
struct SplitRecord {
  int feature;
  double threshold;
  double gain;
};

/// Multi-output regression tree grown best-first on squared-error reduction.
class RegressionTree {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<SplitRecord>& splits() const { return splits_; }
  int split_count() const { return static_cast<int>(splits_.size()); }
  int leaf_count() const { return split_count() + (nodes_.empty() ? 0 : 1); }
  /// Two weights per split (feature, threshold) plus one per leaf.
  int size() const { return 2 * split_count() + leaf_count(); }
  int outputs() const { return nodes_.empty() ? 0 : static_cast<int>(nodes_[0].value.size()); }

  Eigen::VectorXd predict(std::span<const double> x) const;

  friend RegressionTree fit_tree(const Eigen::MatrixXd&, const Eigen::MatrixXd&, const TreeParams&,
                                 std::span<const int>, std::mt19937_64*);

 private:
  std::vector<Node> nodes_;
  std::vector<SplitRecord> splits_;
};

/// Fits on the given row indices (all rows when empty; duplicates allowed for
/// bootstrap samples). `rng` is needed only when max_features subsamples.
RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const TreeParams& params,
                        std::span<const int> rows = {}, std::mt19937_64* rng = nullptr);

/// Largest split count whose tree still fits a weight budget: 2s + (s + 1) <= budget.
int splits_for_budget(int budget);

}  // namespace polygrid::cart
