#include <doctest.h>

#include <cstdio>
#include <random>

#include "polygrid/error.hpp"
#include "polygrid/serialize.hpp"

using namespace polygrid;

namespace {

void data(int m, unsigned seed, Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  X.resize(m, 5);
  Y = Eigen::MatrixXd::Zero(m, 3);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < 5; ++k) X(i, k) = u(rng);
    Y(i, 0) = X(i, 0) > 0.5;
    Y(i, 1) = X(i, 1) + X(i, 2) > 1.0;
    // label 2 never occurs: infinite threshold
  }
}

void same_predictions(const PolygridInstance& a, const PolygridInstance& b, const Eigen::MatrixXd& X) {
  const auto pa = a.predict_batch(X);
  const auto pb = b.predict_batch(X);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].scores == pb[i].scores);
    CHECK(pa[i].labels == pb[i].labels);
    CHECK(pa[i].contributions == pb[i].contributions);
  }
}

}  // namespace

TEST_CASE("instance round trip reproduces predictions bit for bit") {
  Eigen::MatrixXd X, Y;
  data(60, 1, X, Y);
  for (auto ann : {geom::AnnulusType::SInvariant, geom::AnnulusType::Tree})
    for (auto solver : {solvers::SolverVariant::LstsqSym, solvers::SolverVariant::Ridge}) {
      PolygridConfig cfg;
      cfg.n_a = 3;
      cfg.ns_per_domain = 2;
      cfg.annulus = ann;
      cfg.solver.variant = solver;
      cfg.sector = geom::SectorType::Cover;
      auto inst = fit_multilabel(X, Y, cfg);
      inst.scale_maxima = {5, 5, 5, 5, 5};
      const auto doc = instance_to_json(inst);
      CHECK(doc["format"] == "polygrid-instance");
      CHECK(doc["version"] == kInstanceFormatVersion);
      CHECK(doc["thresholds"][2] == "inf");
      const auto back = instance_from_json(nlohmann::json::parse(doc.dump()));
      CHECK(back.config == inst.config);
      CHECK(back.W == inst.W);
      CHECK(back.thresholds == inst.thresholds);
      CHECK(back.partition.radii == inst.partition.radii);
      CHECK(back.scale_maxima == inst.scale_maxima);
      CHECK(back.size() == inst.size());
      same_predictions(inst, back, X);
    }
}

TEST_CASE("label ranking instances keep their membership model") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd X(40, 4);
  RankMatrix R = RankMatrix::Constant(40, 3, -1);
  for (int i = 0; i < 40; ++i) {
    for (int k = 0; k < 4; ++k) X(i, k) = u(rng);
    R(i, 0) = i % 3;
    if (i % 2) R(i, 1) = (i + 1) % 3;
  }
  const auto inst = fit_labelranking(X, R, {});
  const auto back = instance_from_json(instance_to_json(inst));
  REQUIRE(back.membership_W.has_value());
  CHECK(*back.membership_W == *inst.membership_W);
  CHECK(back.rank_batch(X) == inst.rank_batch(X));
}

TEST_CASE("file round trip and malformed documents") {
  Eigen::MatrixXd X, Y;
  data(30, 2, X, Y);
  const auto inst = fit_multilabel(X, Y, {});
  const std::string path = "serialize_roundtrip.json";
  save_instance(inst, path);
  same_predictions(inst, load_instance(path), X);
  std::remove(path.c_str());

  auto doc = instance_to_json(inst);
  auto bad = doc;
  bad["version"] = 99;
  CHECK_THROWS_AS(instance_from_json(bad), InvalidInput);
  bad = doc;
  bad.erase("W");
  CHECK_THROWS_AS(instance_from_json(bad), InvalidInput);
  bad = doc;
  bad["partition"]["radii"][0] = 0.5;
  CHECK_THROWS_AS(instance_from_json(bad), InvalidInput);
  bad = doc;
  bad["W"][0].erase(0);
  CHECK_THROWS_AS(instance_from_json(bad), InvalidInput);
  CHECK_THROWS_AS(load_instance("does-not-exist.json"), InvalidInput);
}

TEST_CASE("summary lists names and thresholds") {
  Eigen::MatrixXd X, Y;
  data(30, 4, X, Y);
  const auto s = instance_summary(fit_multilabel(X, Y, {}));
  CHECK(s["label_names"].size() == s["thresholds"].size());
  CHECK(s["domain_names"].size() == 5u);
  CHECK(s["config_tag"] == "(1, 1, rho, s-invt, miss, lstsq, single)");
}
