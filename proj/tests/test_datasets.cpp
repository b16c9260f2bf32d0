#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <tuple>
#include <random>

#include "oracles.hpp"
#include "polygrid/datasets.hpp"
#include "polygrid/error.hpp"

using namespace polygrid;
using namespace polygrid::data;

namespace {

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& text) : path(name) { std::ofstream(path) << text; }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

CongenericSpec zero_error(int d, int m) {
  CongenericSpec s;
  s.d = d;
  s.m = m;
  s.loadings.assign(d, 1.0);
  for (int k = 0; k < d; ++k) s.loadings[k] = 0.75 + 0.05 * k;
  s.error_variances.assign(d, 0.0);
  s.ranges.assign(d, {4.0, 20.0});
  return s;
}

}  // namespace

TEST_CASE("multilabel CSV") {
  TempFile f("ml.csv",
             "id,domain:a,domain:b,domain:c,label:x,label:y\n"
             "p1,2,4,0,1,0\n"
             "p2,4,2,5,0,1\n"
             "\"p,3\",1,1,2.5,1,1\n");
  const auto ds = load_csv(f.path);
  CHECK(ds.task == Task::Multilabel);
  CHECK(ds.domain_names == std::vector<std::string>{"a", "b", "c"});
  CHECK(ds.label_names == std::vector<std::string>{"x", "y"});
  CHECK(ds.X(0, 0) == 0.5);
  CHECK(ds.X(1, 0) == 1.0);
  CHECK(ds.X(0, 2) == ds.manifest.epsilon);
  CHECK(ds.manifest.epsilon_shifted == 1);
  CHECK(ds.manifest.scaling_maxima == std::vector<double>{4, 4, 5});
  CHECK(ds.Y(2, 0) == 1.0);
  CHECK(ds.Y(2, 1) == 1.0);
}

TEST_CASE("multiclass and ranking CSV") {
  TempFile f("mc.csv", "domain:a,domain:b,domain:c,label:kind\n1,2,3,cat\n3,2,1,dog\n2,2,2,cat\n");
  const auto ds = load_csv(f.path);
  CHECK(ds.task == Task::Multiclass);
  CHECK(ds.label_names == std::vector<std::string>{"cat", "dog"});
  CHECK(ds.Y.col(0).sum() == 2.0);

  TempFile g("rk.csv", "domain:a,domain:b,domain:c,rank:0,rank:1,rank:2\n1,2,3,2,0,-1\n3,2,1,1,-1,-1\n");
  const auto rk = load_csv(g.path);
  CHECK(rk.task == Task::LabelRanking);
  CHECK(rk.ranks(0, 0) == 2);
  CHECK(rk.Y.row(0) == Eigen::RowVector3d(1, 0, 1));
}

TEST_CASE("CSV errors point at the line and column") {
  TempFile a("bad1.csv", "domain:a,domain:b,domain:c,label:x\n1,2,3,1\n1,two,3,0\n");
  const auto e1 = error_of([&] { load_csv(a.path); });
  CHECK(e1.find("bad1.csv:3") != std::string::npos);
  CHECK(e1.find("domain:b") != std::string::npos);

  TempFile b("bad2.csv", "domain:a,domain:b,domain:c,label:x\n1,2,-3,1\n");
  CHECK(error_of([&] { load_csv(b.path); }).find("nonnegative") != std::string::npos);

  TempFile c("bad3.csv", "domain:a,domain:b,label:x\n1,2,1\n");
  CHECK_THROWS_AS(load_csv(c.path), InvalidInput);

  TempFile d("bad4.csv", "domain:a,domain:b,domain:c,label:x,label:y\n1,2,3,1,2\n");
  CHECK(error_of([&] { load_csv(d.path); }).find("0 or 1") != std::string::npos);

  TempFile e("bad5.csv", "domain:a,domain:b,domain:c\n0,2,3\n0,1,1\n");
  CHECK_THROWS_AS(load_csv(e.path), InvalidInput);  // all-zero column
  CHECK_THROWS_AS(load_csv("missing.csv"), InvalidInput);
}

TEST_CASE("dataset document round trip") {
  auto ds = synth_congeneric(CongenericSpec{}, 4);
  AssignmentSynthSpec as;
  as.cutoff = 50;
  attach_assignment(ds, synth_assignment(ds, as), as);
  const auto back = dataset_from_json(nlohmann::json::parse(dataset_to_json(ds).dump()));
  CHECK(back.X == ds.X);
  CHECK(back.X_raw == ds.X_raw);
  CHECK(back.Y == ds.Y);
  CHECK(back.task == ds.task);
  CHECK(back.label_names == ds.label_names);
  CHECK(back.manifest.scaling_maxima == ds.manifest.scaling_maxima);
}

TEST_CASE("congeneric synthesis") {
  const CongenericSpec spec;
  const auto a = synth_congeneric(spec, 7);
  const auto b = synth_congeneric(spec, 7);
  CHECK(a.X_raw == b.X_raw);
  CHECK(a.X_raw != synth_congeneric(spec, 8).X_raw);
  CHECK(a.rows() == 100);
  CHECK(a.X_raw.minCoeff() >= 4.0);
  CHECK(a.X_raw.maxCoeff() <= 20.0);
  CHECK(a.X.maxCoeff() == 1.0);

  // Large samples reproduce the implied covariance lambda_a lambda_b var(eta).
  CongenericSpec big = spec;
  big.m = 20000;
  big.ranges.assign(4, {-100.0, 100.0});
  const auto c = synth_congeneric(big, 1);
  const Eigen::MatrixXd C = c.X_raw.rowwise() - c.X_raw.colwise().mean();
  const Eigen::MatrixXd cov = C.transpose() * C / (big.m - 1.0);
  for (int p = 0; p < 4; ++p)
    for (int q = p + 1; q < 4; ++q) CHECK(cov(p, q) == doctest::Approx(spec.loadings[p] * spec.loadings[q] * 6.25).epsilon(0.06));
}

TEST_CASE("omega") {
  CHECK(mcdonald_omega({1, 1, 1}, {0, 0, 0}) == 1.0);
  const std::vector<double> l{0.84, 1.0, 0.85, 0.77}, e{1, 1, 1, 1};
  const double s = 0.84 + 1.0 + 0.85 + 0.77;
  CHECK(mcdonald_omega(l, e) == doctest::Approx(s * s / (s * s + 4.0)));
}

TEST_CASE("sum-score labels") {
  const auto ds = synth_congeneric(CongenericSpec{}, 2);
  AssignmentSynthSpec as;
  as.cutoff = 48;
  const auto r = synth_assignment(ds, as);
  CHECK(r.task == Task::Multiclass);
  for (int i = 0; i < ds.rows(); ++i) {
    CHECK(r.Y.row(i).sum() == 1.0);
    CHECK((r.Y(i, 0) == 1.0) == (ds.X_raw.row(i).sum() >= 48));
  }
  as.cutoff = 0;
  CHECK(synth_assignment(ds, as).Y.col(0).sum() == ds.rows());
}

TEST_CASE("fuzzy c-means memberships and the lambda cut") {
  auto spec = CongenericSpec{};
  spec.m = 150;
  const auto ds = synth_congeneric(spec, 3);
  const auto fc = fuzzy_cmeans(ds.X, 4, 2.0, 300, 1e-6, 1);
  for (int i = 0; i < 150; ++i) CHECK(fc.memberships.row(i).sum() == doctest::Approx(1.0));
  CHECK(fc.memberships.minCoeff() >= 0.0);
  const auto Y0 = lambda_cut(fc.memberships, 1.0);
  for (int i = 0; i < 150; ++i) CHECK(Y0.row(i).sum() == 1.0);  // the arg max survives any cut
  const auto Y1 = lambda_cut(fc.memberships, 0.0);
  CHECK(Y1.sum() == 150 * 4);
}

TEST_CASE("fuzzy assignment calibrates cardinality") {
  auto spec = CongenericSpec{};
  spec.m = 200;
  const auto ds = synth_congeneric(spec, 4);
  AssignmentSynthSpec as;
  as.mode = AssignMode::FuzzyMultilabel;
  as.n_labels = 6;
  as.target_cardinality = 2.3;
  const auto r = synth_assignment(ds, as);
  CHECK(std::abs(r.cardinality - 2.3) <= 0.02);
  CHECK(std::abs(r.Y.sum() / 200.0 - r.cardinality) < 1e-12);

  as.mode = AssignMode::FuzzyRanking;
  as.top_k = 2;
  const auto k = synth_assignment(ds, as);
  CHECK(k.task == Task::LabelRanking);
  CHECK_NOTHROW(check_ranking(k.ranks, 6));
  for (int i = 0; i < 200; ++i) {
    CHECK(k.ranks(i, 2) == -1);
    if (k.ranks(i, 1) >= 0) CHECK(k.memberships(i, k.ranks(i, 0)) >= k.memberships(i, k.ranks(i, 1)));
  }
}

TEST_CASE("dataset statistics") {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(100, 2);
  for (int i = 0; i < 100; ++i) Y(i, i < 41 ? 0 : 1) = 1.0;
  const auto s = dataset_stats(Y, 4);
  CHECK(std::abs(s.imbalance - (1.0 - 41.0 / 59.0)) < 1e-12);
  CHECK(s.cardinality == 1.0);
  CHECK(s.density == 0.5);
  CHECK(s.labelsets == 2);
}

TEST_CASE("violation predicate") {
  CHECK_FALSE(sum_area_violation(3, 2, 0.5, 0.4));
  CHECK(sum_area_violation(3, 2, 0.4, 0.5));
  CHECK(sum_area_violation(3, 2, 0.4, 0.4));
}

TEST_CASE("violation counts match a brute-force pair scan") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd X(40, 5);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  const auto rep = sum_area_violation_test(X);
  REQUIRE(rep.arrangements.size() == 12u);
  long long total = 0;
  for (const auto& a : rep.arrangements) {
    long long v = 0, pairs = 0;
    for (int i = 0; i < 40; ++i)
      for (int j = i + 1; j < 40; ++j) {
        std::vector<double> xi(5), xj(5);
        for (int k = 0; k < 5; ++k) xi[k] = X(i, a.arrangement[k]), xj[k] = X(j, a.arrangement[k]);
        const double si = X.row(i).sum(), sj = X.row(j).sum();
        if (si == sj) continue;
        ++pairs;
        const double ai = oracle::fan_area(xi), aj = oracle::fan_area(xj);
        v += (si > sj) != (ai > aj) || ai == aj;
      }
    CHECK(a.pairs == pairs);
    CHECK(a.violations == v);
    total += v;
  }
  CHECK(rep.violations == total);
  CHECK(rep.violations > 0);
}

TEST_CASE("zero-error congeneric data has no sum-area violations") {
  for (auto [d, m, arr] : {std::tuple{4, 100, 3}, std::tuple{5, 200, 12}}) {
    const auto ds = synth_congeneric(zero_error(d, m), 17);
    const auto rep = sum_area_violation_test(ds.X);
    CHECK(static_cast<int>(rep.arrangements.size()) == arr);
    CHECK(rep.violations == 0);
    CHECK(rep.pairs > 0);
    const auto v = validate(ds);
    CHECK(v["omega"].get<double>() == 1.0);
    CHECK(v["covariances_positive"].get<bool>());
  }
}

TEST_CASE("one-factor estimate recovers loadings from a large sample") {
  CongenericSpec s;
  s.m = 20000;
  s.ranges.assign(4, {-100.0, 100.0});
  const auto ds = synth_congeneric(s, 9);
  const auto [l, e] = one_factor_estimate(ds.X_raw);
  for (int k = 0; k < 4; ++k) {
    CHECK(l[k] == doctest::Approx(s.loadings[k] * 2.5).epsilon(0.08));  // unit factor variance
    CHECK(e[k] == doctest::Approx(1.0).epsilon(0.15));
  }
}
