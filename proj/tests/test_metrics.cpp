#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "polygrid/error.hpp"
#include "polygrid/metrics.hpp"

using namespace polygrid;
using namespace polygrid::eval;

namespace {

Eigen::MatrixXd M(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd out(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

}  // namespace

TEST_CASE("label-wise metrics on a hand-worked example") {
  const auto Y = M({{1, 0, 1}, {0, 1, 0}, {1, 1, 0}, {0, 0, 1}});
  const auto P = M({{1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 0, 1}});
  CHECK(accuracy(Y, P) == doctest::Approx(0.25));
  CHECK(hamming_loss(Y, P) == doctest::Approx(3.0 / 12.0));
  // label 0: tp2 fp1 fn0; label 1: tp1 fp0 fn1; label 2: tp1 fp0 fn1
  const double f0 = 4.0 / 5.0, f1 = 2.0 / 3.0, f2 = 2.0 / 3.0;
  CHECK(f1_micro(Y, P) == doctest::Approx(2.0 * 4 / (2.0 * 4 + 1 + 2)));
  CHECK(f1_macro(Y, P) == doctest::Approx((f0 + f1 + f2) / 3));
  CHECK(f1_weighted(Y, P) == doctest::Approx((2 * f0 + 2 * f1 + 2 * f2) / 6));
}

TEST_CASE("F1 conventions for empty labels") {
  const auto Y = M({{0, 1}, {0, 0}});
  const auto P = M({{0, 1}, {0, 0}});
  CHECK(f1_macro(Y, P) == 1.0);
  CHECK(f1_micro(Y, P) == 1.0);
  const auto Z = M({{0, 0}, {0, 0}});
  CHECK(f1_micro(Z, Z) == 1.0);
  CHECK(f1_weighted(Z, Z) == 1.0);  // no support anywhere: falls back to the macro mean
  CHECK(f1_macro(Z, M({{1, 0}, {0, 0}})) == 0.5);
}

TEST_CASE("interval overlap") {
  CHECK(interval_jaccard({0, 1}, {2, 3}) == 0.0);
  CHECK(interval_jaccard({0, 2}, {1, 3}) == doctest::Approx(1.0 / 3.0));
  CHECK(interval_jaccard({0, 2}, {0, 2}) == 1.0);
  CHECK(interval_jaccard({1, 1}, {1, 1}) == 1.0);
  CHECK(interval_jaccard({1}, {2}) == 0.0);
  CHECK(interval_jaccard({}, {1, 2}) == 0.0);
  const auto Y = M({{1, 0}, {0, 1}, {1, 1}, {0, 0}});
  const auto S = M({{0.9, 0.1}, {0.2, 0.8}, {0.8, 0.3}, {0.1, 0.5}});
  // label 0: neg [0.1,0.2], pos [0.8,0.9] -> 0; label 1: neg [0.1,0.5], pos [0.3,0.8] -> 0.2/0.7
  CHECK(jaccsim(Y, S) == doctest::Approx((0.0 + 0.2 / 0.7) / 2));
}

TEST_CASE("kendall tau on complete rankings equals the textbook coefficient") {
  std::mt19937_64 rng(3);
  const int n = 6;
  RankMatrix T(50, n), P(50, n);
  double want = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::vector<int> a(n), b(n);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    std::vector<int> ra(n), rb(n);
    for (int p = 0; p < n; ++p) ra[a[p]] = p, rb[b[p]] = p, T(i, p) = a[p], P(i, p) = b[p];
    int c = 0, d = 0;
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) ((ra[x] - ra[y]) * (rb[x] - rb[y]) > 0 ? c : d)++;
    want += static_cast<double>(c - d) / (n * (n - 1) / 2);
  }
  CHECK(kendall_tau(T, P) == doctest::Approx(want / 50));
}

TEST_CASE("kendall tau conventions for partial rankings") {
  RankMatrix T(4, 3), P(4, 3);
  T << 0, 1, 2, /**/ 2, -1, -1, /**/ -1, -1, -1, /**/ 1, 0, -1;
  P << 0, 2, -1, /**/ 2, 0, -1, /**/ -1, -1, -1, /**/ 0, 1, -1;
  // row 0: (0,1) discordant (1 missing), (0,2) concordant, (1,2) discordant -> -1/3
  // row 1: single true label predicted first -> 1; row 2: both empty -> 1; row 3: reversed -> -1
  CHECK(kendall_tau(T, P) == doctest::Approx((-1.0 / 3 + 1 + 1 - 1) / 4));
  CHECK(lr_accuracy(T, P) == doctest::Approx(0.25));
  // differing cells per row: 2, 1, 0, 2
  CHECK(lr_loss(T, P) == doctest::Approx(5.0 / 12));
}

TEST_CASE("metric registry") {
  CHECK(direction("hammingl") == Direction::LowerBetter);
  CHECK(direction("jaccsim") == Direction::LowerBetter);
  CHECK(direction("lrloss") == Direction::LowerBetter);
  CHECK(direction("f1.micro") == Direction::HigherBetter);
  CHECK(better("hammingl", 0.1, 0.2));
  CHECK_FALSE(better("accuracy", 0.5, 0.5));
  CHECK(is_ranking_metric("ktau"));
  CHECK_FALSE(is_ranking_metric("accuracy"));
  CHECK(multilabel_metrics().size() == 6u);
  CHECK(ranking_metrics().size() == 3u);
  Outcome o;
  CHECK_THROWS_AS(metric("auc", o), InvalidInput);
  CHECK_THROWS_AS(accuracy(M({{1, 0}}), M({{1, 0}, {0, 1}})), DimensionMismatch);
}
