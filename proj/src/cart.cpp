#include "polygrid/cart.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "polygrid/error.hpp"

namespace polygrid::cart {

Eigen::VectorXd RegressionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw InvalidInput("predict on an unfitted tree");
  int at = 0;
  while (nodes_[at].feature >= 0) {
    const Node& n = nodes_[at];
    if (static_cast<std::size_t>(n.feature) >= x.size()) throw DimensionMismatch("tree input too short");
    at = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[at].value;
}

int splits_for_budget(int budget) { return std::max(0, (budget - 1) / 3); }

namespace {

struct Candidate {
  int node = -1;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::vector<int> left_rows, right_rows;
};

struct Grower {
  const Eigen::MatrixXd& X;
  const Eigen::MatrixXd& Y;
  const TreeParams& params;
  std::mt19937_64* rng;

  Eigen::VectorXd mean_of(const std::vector<int>& rows) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(Y.cols());
    for (int r : rows) acc += Y.row(r).transpose();
    return acc / static_cast<double>(rows.size());
  }

  std::vector<int> features_to_try() {
    std::vector<int> feats(X.cols());
    std::iota(feats.begin(), feats.end(), 0);
    const int k = params.max_features;
    if (k > 0 && k < X.cols()) {
      if (!rng) throw InvalidInput("feature subsampling needs a random generator");
      std::shuffle(feats.begin(), feats.end(), *rng);
      feats.resize(k);
      std::sort(feats.begin(), feats.end());
    }
    return feats;
  }

  // Best variance-reduction split of `rows`; gain stays 0 if none is valid.
  Candidate best_split(int node, const std::vector<int>& rows) {
    Candidate best;
    best.node = node;
    const auto n = static_cast<int>(rows.size());
    if (n < 2 * params.min_leaf) return best;
    const Eigen::Index q = Y.cols();
    Eigen::VectorXd total = Eigen::VectorXd::Zero(q);
    for (int r : rows) total += Y.row(r).transpose();
    const double parent = total.squaredNorm() / n;

    std::vector<int> order(rows);
    Eigen::VectorXd left(q);
    for (int f : features_to_try()) {
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
      left.setZero();
      for (int i = 0; i + 1 < n; ++i) {
        left += Y.row(order[i]).transpose();
        const double here = X(order[i], f);
        const double next = X(order[i + 1], f);
        const int nl = i + 1;
        const int nr = n - nl;
        if (here == next || nl < params.min_leaf || nr < params.min_leaf) continue;
        const double gain = left.squaredNorm() / nl + (total - left).squaredNorm() / nr - parent;
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = f;
          best.threshold = 0.5 * (here + next);
        }
      }
    }
    if (best.feature >= 0) {
      for (int r : rows) (X(r, best.feature) <= best.threshold ? best.left_rows : best.right_rows).push_back(r);
    }
    return best;
  }
};

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const TreeParams& params,
                        std::span<const int> rows, std::mt19937_64* rng) {
  if (X.rows() != Y.rows()) throw DimensionMismatch("tree inputs and targets differ in rows");
  if (X.rows() == 0 || Y.cols() == 0) throw InvalidInput("tree needs at least one row and one target");
  std::vector<int> all;
  if (rows.empty()) {
    all.resize(X.rows());
    std::iota(all.begin(), all.end(), 0);
  } else {
    all.assign(rows.begin(), rows.end());
  }

  Grower g{X, Y, params, rng};
  RegressionTree tree;
  tree.nodes_.push_back(Node{-1, 0.0, -1, -1, 0, g.mean_of(all)});

  auto worse = [](const Candidate& a, const Candidate& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);
  auto consider = [&](int node, const std::vector<int>& node_rows) {
    if (params.max_depth >= 0 && tree.nodes_[node].depth >= params.max_depth) return;
    Candidate c = g.best_split(node, node_rows);
    if (c.feature >= 0) frontier.push(std::move(c));
  };
  consider(0, all);

  while (!frontier.empty()) {
    if (params.max_splits >= 0 && tree.split_count() >= params.max_splits) break;
    Candidate c = frontier.top();
    frontier.pop();
    const int depth = tree.nodes_[c.node].depth + 1;
    const int li = static_cast<int>(tree.nodes_.size());
    tree.nodes_.push_back(Node{-1, 0.0, -1, -1, depth, g.mean_of(c.left_rows)});
    tree.nodes_.push_back(Node{-1, 0.0, -1, -1, depth, g.mean_of(c.right_rows)});
    Node& parent = tree.nodes_[c.node];
    parent.feature = c.feature;
    parent.threshold = c.threshold;
    parent.left = li;
    parent.right = li + 1;
    tree.splits_.push_back({c.feature, c.threshold, c.gain});
    consider(li, c.left_rows);
    consider(li + 1, c.right_rows);
  }
  return tree;
}

}  // namespace polygrid::cart
