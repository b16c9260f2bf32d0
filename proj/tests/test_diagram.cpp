#include <doctest.h>

#include <random>
#include <regex>
#include <set>

#include "polygrid/diagram.hpp"
#include "polygrid/error.hpp"

using namespace polygrid;
using namespace polygrid::diagram;

namespace {

Eigen::MatrixXd random_scores(int rows, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd X(rows, d);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  return X;
}

Eigen::MatrixXd rule_labels(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Y(X.rows(), 3);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Y(i, 0) = X.row(i).mean() > 0.55;
    Y(i, 1) = X(i, 0) > X(i, 1);
    Y(i, 2) = X(i, 2) < 0.3;
  }
  return Y;
}

PolygridInstance instance(solvers::SolverVariant solver, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto X = random_scores(120, 5, rng);
  PolygridConfig cfg;
  cfg.n_a = 2;
  cfg.ns_per_domain = 2;
  cfg.solver.variant = solver;
  cfg.sector = geom::SectorType::Cover;
  auto inst = fit_multilabel(X, rule_labels(X), cfg);
  inst.label_names = {"steady", "split", "low"};
  inst.domain_names = {"d0", "d1", "d2", "d3", "d4"};
  return inst;
}

double reconstruct(const DiagramModel& dm, const Chart& ch) {
  double y = 0.0;
  for (const auto& c : ch.cells) y += c.weight * c.feature;
  const auto col = static_cast<std::size_t>(ch.col - 1);
  if (dm.intercept_tags[col]) y += dm.intercept_tags[col]->value;
  return y;
}

}  // namespace

TEST_CASE("faithfulness: cell weights and features reproduce every score tag") {
  std::mt19937_64 rng(1);
  for (auto solver : {solvers::SolverVariant::Lstsq, solvers::SolverVariant::LstsqSym,
                      solvers::SolverVariant::LstsqUni, solvers::SolverVariant::Ridge}) {
    const auto inst = instance(solver, 2);
    const auto X = random_scores(25, 5, rng);
    const auto preds = inst.predict_batch(X);
    const auto dm = build_diagram(inst, X, preds);
    int matching = 0;
    for (const auto& ch : dm.charts) {
      if (ch.kind != ChartKind::Matching) continue;
      ++matching;
      REQUIRE(ch.tag);
      const auto& p = preds[static_cast<std::size_t>(ch.assessment)];
      CHECK(ch.tag->value == p.scores(ch.label));
      CHECK(std::abs(reconstruct(dm, ch) - ch.tag->value) < 1e-9);
      double contrib = 0.0;
      for (const auto& c : ch.cells) {
        CHECK(c.contribution == c.weight * c.feature);
        contrib += c.contribution;
      }
      CHECK(std::abs(reconstruct(dm, ch) - contrib - (dm.intercept_tags[ch.col - 1] ? dm.intercept_tags[ch.col - 1]->value : 0.0)) < 1e-12);
      CHECK(ch.tag->state == (ch.tag->value >= inst.thresholds(ch.label) ? TagState::Green : TagState::Yellow));
      CHECK((p.labels[ch.label] == 1) == (ch.tag->state == TagState::Green));
    }
    CHECK(matching == 25 * 3);
  }
}

TEST_CASE("intercept tags follow the solver") {
  const auto plain = build_diagram(instance(solvers::SolverVariant::Lstsq, 3), Eigen::MatrixXd(0, 5), {});
  for (const auto& t : plain.intercept_tags) CHECK_FALSE(t);
  const auto sym = build_diagram(instance(solvers::SolverVariant::LstsqSym, 3), Eigen::MatrixXd(0, 5), {});
  for (const auto& t : sym.intercept_tags) {
    REQUIRE(t);
    CHECK(t->caption == "offset");
    CHECK(t->state == TagState::Grey);
  }
  const auto ridge = build_diagram(instance(solvers::SolverVariant::Ridge, 3), Eigen::MatrixXd(0, 5), {});
  for (const auto& t : ridge.intercept_tags) CHECK(t->caption == "intercept");
}

TEST_CASE("layout: header row of prototypes ordered by area, one assessment per row") {
  const auto inst = instance(solvers::SolverVariant::Ridge, 4);
  std::mt19937_64 rng(4);
  const auto X = random_scores(3, 5, rng);
  const auto dm = build_diagram(inst, X, inst.predict_batch(X));
  CHECK(dm.rows == 4);
  CHECK(dm.cols == 4);
  CHECK(dm.charts.size() == 3u + 3u * 4u);
  CHECK(std::set<int>(dm.column_labels.begin(), dm.column_labels.end()) == std::set<int>{0, 1, 2});
  std::vector<double> areas;
  for (const auto& ch : dm.charts) {
    if (ch.kind != ChartKind::Assignment) continue;
    CHECK(ch.row == 0);
    CHECK(ch.label == dm.column_labels[ch.col - 1]);
    std::vector<geom::Point> pts;
    for (const auto& v : ch.polygon) pts.emplace_back(v[0], v[1]);
    areas.push_back(geom::signed_area(pts));
    REQUIRE(ch.tag);
    CHECK(ch.tag->caption == "threshold");
  }
  CHECK(std::is_sorted(areas.begin(), areas.end()));
  for (const auto& ch : dm.charts)
    if (ch.kind == ChartKind::Assessment) {
      CHECK(ch.col == 0);
      const Eigen::VectorXd row = X.row(ch.assessment).transpose();
      CHECK(ch.tag->value == geom::polygon_area(inst.polygon(std::vector<double>(row.data(), row.data() + 5))));
    }
  CHECK(dm.axis_names.size() == 5u);
  for (int k = 0; k < 5; ++k) CHECK(dm.axis_names[k] == inst.domain_names[inst.vertex_order[k]]);
}

TEST_CASE("colour bar and weight colours") {
  const auto dm = build_diagram(instance(solvers::SolverVariant::Lstsq, 5), Eigen::MatrixXd(0, 5), {});
  REQUIRE(dm.colorbar.size() == 5u);
  CHECK(dm.colorbar.front().value == -dm.weight_limit);
  CHECK(dm.colorbar.back().value == dm.weight_limit);
  CHECK(dm.colorbar[2].value == 0.0);
  CHECK(weight_color(0.0, 1.0) == "#f7f7f7");
  CHECK(weight_color(1.0, 1.0) != weight_color(-1.0, 1.0));
  CHECK(weight_color(5.0, 1.0) == weight_color(1.0, 1.0));
  const std::regex hex("#[0-9a-f]{6}");
  for (double w : {-1.0, -0.3, 0.2, 0.9}) CHECK(std::regex_match(weight_color(w, 1.0), hex));

  auto flat = instance(solvers::SolverVariant::Lstsq, 5);
  flat.W.setConstant(0.25);
  const auto one = build_diagram(flat, Eigen::MatrixXd(0, 5), {});
  REQUIRE(one.colorbar.size() == 1u);
  CHECK(one.colorbar[0].value == 0.25);
}

TEST_CASE("multiclass diagrams omit the threshold tags") {
  std::mt19937_64 rng(6);
  const auto X = random_scores(80, 4, rng);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(80, 2);
  for (int i = 0; i < 80; ++i) Y(i, X.row(i).sum() > 2.1 ? 0 : 1) = 1;
  PolygridConfig cfg;
  cfg.solver.variant = solvers::SolverVariant::Ridge;
  const auto inst = fit_multilabel(X, Y, cfg, Task::Multiclass);
  const auto dm = build_diagram(inst, X.topRows(2), inst.predict_batch(X.topRows(2)));
  for (const auto& ch : dm.charts)
    if (ch.kind == ChartKind::Assignment) CHECK_FALSE(ch.tag);
}

TEST_CASE("ranking diagrams carry the predicted position") {
  std::mt19937_64 rng(7);
  const auto X = random_scores(150, 4, rng);
  RankMatrix R = RankMatrix::Constant(150, 3, -1);
  for (int i = 0; i < 150; ++i) {
    R(i, 0) = X(i, 0) > X(i, 1) ? 0 : 1;
    if (X(i, 2) > 0.5) R(i, 1) = 2;
  }
  PolygridConfig cfg;
  cfg.solver.variant = solvers::SolverVariant::Ridge;
  const auto inst = fit_labelranking(X, R, cfg);
  const auto preds = inst.predict_batch(X.topRows(10));
  const auto dm = build_diagram(inst, X.topRows(10), preds);
  for (const auto& ch : dm.charts) {
    if (ch.kind != ChartKind::Matching) continue;
    const auto& r = *preds[static_cast<std::size_t>(ch.assessment)].ranking;
    const auto it = std::find(r.begin(), r.end(), ch.label);
    if (it == r.end()) {
      CHECK_FALSE(ch.rank);
    } else {
      REQUIRE(ch.rank);
      CHECK(*ch.rank == it - r.begin());  // 0-based position
    }
  }
}

TEST_CASE("svg output is byte-deterministic and survives a json round trip") {
  const auto inst = instance(solvers::SolverVariant::LstsqSym, 8);
  std::mt19937_64 rng(8);
  const auto X = random_scores(4, 5, rng);
  const auto dm = build_diagram(inst, X, inst.predict_batch(X));
  const auto svg = render_svg(dm);
  CHECK(svg == render_svg(build_diagram(inst, X, inst.predict_batch(X))));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("steady") != std::string::npos);
  CHECK(svg.find("<title>offset</title>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);

  const auto back = diagram_from_json(to_json(dm));
  CHECK(to_json(back) == to_json(dm));
  CHECK(render_svg(back) == svg);
}

TEST_CASE("mismatched inputs are rejected") {
  const auto inst = instance(solvers::SolverVariant::Ridge, 9);
  std::mt19937_64 rng(9);
  const auto X = random_scores(2, 5, rng);
  const auto preds = inst.predict_batch(X);
  CHECK_THROWS_AS(build_diagram(inst, X.topRows(1), preds), DimensionMismatch);
  CHECK_THROWS_AS(build_diagram(inst, random_scores(2, 4, rng), preds), DimensionMismatch);
}
