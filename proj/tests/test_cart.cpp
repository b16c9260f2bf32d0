#include <doctest.h>

#include <random>

#include "polygrid/cart.hpp"

using namespace polygrid::cart;

namespace {

double sse(const Eigen::MatrixXd& Y, const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(Y.cols());
  for (int r : rows) mu += Y.row(r);
  mu /= static_cast<double>(rows.size());
  double s = 0.0;
  for (int r : rows) s += (Y.row(r) - mu).squaredNorm();
  return s;
}

}  // namespace

TEST_CASE("a single split picks the exhaustive best cut") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd X(40, 3), Y(40, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
    for (int i = 0; i < 40; ++i) {
      Y(i, 0) = X(i, 1) > 0.4 ? 1.0 : 0.0;
      Y(i, 1) = X(i, 2) + 0.1 * u(rng);
    }
    TreeParams p;
    p.max_splits = 1;
    const auto tree = fit_tree(X, Y, p);
    REQUIRE(tree.split_count() == 1);

    std::vector<int> all(40);
    for (int i = 0; i < 40; ++i) all[i] = i;
    const double base = sse(Y, all);
    double best = 0.0;
    for (int f = 0; f < 3; ++f)
      for (int c = 0; c < 40; ++c) {
        std::vector<int> l, r;
        for (int i = 0; i < 40; ++i) (X(i, f) <= X(c, f) ? l : r).push_back(i);
        if (l.empty() || r.empty()) continue;
        best = std::max(best, base - sse(Y, l) - sse(Y, r));
      }
    CHECK(tree.splits()[0].gain == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("unbounded trees interpolate distinct training rows") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd X(30, 2), Y(30, 1);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  for (int i = 0; i < 30; ++i) Y(i, 0) = u(rng);
  const auto tree = fit_tree(X, Y, {});
  for (int i = 0; i < 30; ++i) {
    std::vector<double> x{X(i, 0), X(i, 1)};
    CHECK(tree.predict(x)(0) == doctest::Approx(Y(i, 0)));
  }
  CHECK(tree.leaf_count() == 30);
  CHECK(tree.size() == 2 * 29 + 30);
}

TEST_CASE("split and depth limits hold") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd X(100, 4), Y(100, 1);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  for (int i = 0; i < 100; ++i) Y(i, 0) = X(i, 0) * X(i, 1) + u(rng) * 0.1;
  TreeParams p;
  p.max_splits = 7;
  const auto t = fit_tree(X, Y, p);
  CHECK(t.split_count() == 7);
  for (const auto& s : t.splits()) CHECK(s.gain > 0.0);

  TreeParams q;
  q.max_depth = 2;
  const auto u2 = fit_tree(X, Y, q);
  CHECK(u2.split_count() <= 3);
  for (const auto& n : u2.nodes()) CHECK(n.depth <= 2);
}

TEST_CASE("budget arithmetic") {
  CHECK(splits_for_budget(1) == 0);
  CHECK(splits_for_budget(4) == 1);
  CHECK(splits_for_budget(6) == 1);
  CHECK(splits_for_budget(7) == 2);
  for (int b = 1; b < 200; ++b) {
    const int s = splits_for_budget(b);
    CHECK(3 * s + 1 <= b);
    CHECK(3 * (s + 1) + 1 > b);
  }
}

TEST_CASE("constant targets never split") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 3);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(20, 1, 0.7);
  const auto t = fit_tree(X, Y, {});
  CHECK(t.split_count() == 0);
  CHECK(t.size() == 1);
}
