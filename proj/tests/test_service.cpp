#include <doctest.h>

#include <future>
#include <random>
#include <thread>

#include "polygrid/service.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that collides with Eigen internals.
#include <httplib.h>

using namespace polygrid;
using namespace polygrid::service;
using nlohmann::json;

namespace {

struct Fixture {
  Eigen::MatrixXd X, Y;
  PolygridInstance inst;
};

// Label 0 marks rows whose mean exceeds 0.6, label 1 rows whose first score beats the second.
const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    f.X.resize(150, 4);
    f.Y.resize(150, 2);
    for (int i = 0; i < 150; ++i) {
      for (int k = 0; k < 4; ++k) f.X(i, k) = u(rng);
      f.Y(i, 0) = f.X.row(i).mean() > 0.6;
      f.Y(i, 1) = f.X(i, 0) > f.X(i, 1);
    }
    PolygridConfig cfg;
    cfg.solver.variant = solvers::SolverVariant::Ridge;
    cfg.sector = geom::SectorType::Cover;
    f.inst = fit_multilabel(f.X, f.Y, cfg);
    f.inst.label_names = {"elevated", "tilted"};
    f.inst.domain_names = {"physical", "psychological", "social", "environment"};
    f.inst.scale_maxima = {20, 20, 20, 20};
    return f;
  }();
  return f;
}

json row_json(const Eigen::MatrixXd& X, int i) {
  json r = json::array();
  for (Eigen::Index k = 0; k < X.cols(); ++k) r.push_back(X(i, k));
  return r;
}

bool mentions(const json& body, const std::string& field, const std::string& text) {
  for (const auto& f : body.at("fields"))
    if (f.at("field") == field && f.at("message").get<std::string>().find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("GET /model describes the instance") {
  const Service svc(fixture().inst);
  const auto r = svc.get_model();
  CHECK(r.status == 200);
  const auto& s = r.body.at("summary");
  CHECK(s.at("label_names").size() == s.at("thresholds").size());
  CHECK(s.at("domain_names").size() == 4u);
  CHECK(r.body.at("diagram").at("rows") == 1);
  CHECK(r.body.at("instance").is_object());
}

TEST_CASE("GET /healthz") {
  const Service svc(fixture().inst);
  const auto r = svc.handle("GET", "/healthz", "");
  CHECK(r.status == 200);
  CHECK(r.body == json{{"status", "ok"}, {"domains", 4}, {"labels", 2}});
}

TEST_CASE("POST /predict agrees with the model and labels training rows") {
  const auto& f = fixture();
  const Service svc(f.inst);
  json rows = json::array();
  for (int i = 0; i < 20; ++i) rows.push_back(row_json(f.X, i));
  const auto r = svc.post_predict(json{{"assessments", rows}}.dump());
  REQUIRE(r.status == 200);
  const auto& preds = r.body.at("predictions");
  REQUIRE(preds.size() == 20u);
  const auto decided = f.inst.decide_batch(f.X.topRows(20));
  for (int i = 0; i < 20; ++i) {
    const auto& p = preds[i];
    std::vector<std::string> names;
    for (int j = 0; j < 2; ++j) {
      CHECK(p.at("labels")[j] == static_cast<int>(decided(i, j)));
      if (decided(i, j) > 0.5) names.push_back(f.inst.label_names[j]);
    }
    CHECK(p.at("label_names") == names);
    CHECK(p.at("coverage").size() == static_cast<std::size_t>(f.inst.cells()));
  }
  CHECK(r.body.at("diagram").at("rows") == 21);

  // A training row that is clearly positive for label 0.
  int pos = -1;
  for (int i = 0; i < 150 && pos < 0; ++i)
    if (f.X.row(i).mean() > 0.75) pos = i;
  REQUIRE(pos >= 0);
  const auto one = svc.post_predict(json{{"assessment", row_json(f.X, pos)}, {"diagram", false}}.dump());
  REQUIRE(one.status == 200);
  CHECK(one.body.at("predictions")[0].at("labels")[0] == 1);
  CHECK_FALSE(one.body.contains("diagram"));
}

TEST_CASE("identical requests give identical responses") {
  const Service svc(fixture().inst);
  const std::string body = R"({"assessment": [0.4, 0.9, 0.2, 0.75]})";
  CHECK(svc.post_predict(body).body.dump() == svc.post_predict(body).body.dump());
}

TEST_CASE("raw scores are divided by the scaling maxima") {
  const Service svc(fixture().inst);
  const auto raw = svc.post_predict(R"({"assessment": [8, 18, 4, 15], "scale": "raw", "diagram": false})");
  const auto unit = svc.post_predict(R"({"assessment": [0.4, 0.9, 0.2, 0.75], "diagram": false})");
  REQUIRE(raw.status == 200);
  CHECK(raw.body == unit.body);
  const auto zero = svc.post_predict(R"({"assessment": [0, 18, 4, 15], "scale": "raw"})");
  CHECK(zero.status == 200);
  const auto over = svc.post_predict(R"({"assessment": [21, 18, 4, 15], "scale": "raw"})");
  CHECK(over.status == 400);
  CHECK(mentions(over.body, "assessment[0]", "outside"));

  auto bare = fixture().inst;
  bare.scale_maxima.clear();
  const auto none = Service(bare).post_predict(R"({"assessment": [8, 18, 4, 15], "scale": "raw"})");
  CHECK(none.status == 400);
  CHECK(mentions(none.body, "scale", "maxima"));
}

TEST_CASE("invalid requests are rejected with the offending field") {
  const Service svc(fixture().inst);
  auto r = svc.post_predict(R"({"assessment": [0.0, 0.5, 0.5, 0.5]})");
  CHECK(r.status == 400);
  CHECK(r.body.at("error") == "invalid request");
  CHECK(mentions(r.body, "assessment[0]", "strictly positive"));

  r = svc.post_predict(R"({"assessments": [[0.5, 0.5, 0.5, 0.5], [0.5, 1.5, "x", 0.5]]})");
  CHECK(r.status == 400);
  CHECK(mentions(r.body, "assessments[1][1]", "at most 1"));
  CHECK(mentions(r.body, "assessments[1][2]", "number"));

  CHECK(svc.post_predict("{not json").status == 400);
  CHECK(svc.post_predict("[1, 2]").status == 400);
  CHECK(svc.post_predict("{}").status == 400);
  CHECK(svc.post_predict(R"({"assessments": []})").status == 400);
  CHECK(svc.post_predict(R"({"assessment": [0.5, 0.5, 0.5, 0.5], "scale": "percent"})").status == 400);
  CHECK(svc.post_predict(R"({"assessment": [0.5, 0.5, 0.5, 0.5], "diagram": "yes"})").status == 400);
}

TEST_CASE("a wrong number of scores is a dimension mismatch") {
  const Service svc(fixture().inst);
  const auto r = svc.post_predict(R"({"assessment": [0.5, 0.5, 0.5]})");
  CHECK(r.status == 422);
  CHECK(r.body.at("error") == "dimension mismatch");
  CHECK(mentions(r.body, "assessment", "expected 4 scores, got 3"));
}

TEST_CASE("routing") {
  const Service svc(fixture().inst);
  CHECK(svc.handle("GET", "/nope", "").status == 404);
  CHECK(svc.handle("GET", "/predict", "").status == 405);
  CHECK(svc.handle("POST", "/model", "").status == 405);
  CHECK(svc.handle("GET", "/model", "").status == 200);
}

TEST_CASE("the endpoints answer over HTTP") {
  const Service svc(fixture().inst);
  std::promise<std::pair<int, std::function<void()>>> ready;
  auto started = ready.get_future();
  std::thread server([&] {
    bool signalled = false;
    serve(svc, "127.0.0.1", 0, [&](int port, std::function<void()> stop) {
      signalled = true;
      ready.set_value({port, std::move(stop)});
    });
    if (!signalled) ready.set_value({-1, {}});
  });
  auto [port, stop] = started.get();
  REQUIRE(port > 0);

  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int attempt = 0; attempt < 100 && !health; ++attempt) {
    health = client.Get("/healthz");
    if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body).at("status") == "ok");

  const auto model = client.Get("/model");
  REQUIRE(model);
  CHECK(json::parse(model->body) == svc.get_model().body);

  const std::string body = R"({"assessment": [0.4, 0.9, 0.2, 0.75]})";
  const auto pred = client.Post("/predict", body, "application/json");
  REQUIRE(pred);
  CHECK(pred->status == 200);
  CHECK(json::parse(pred->body) == svc.post_predict(body).body);

  const auto bad = client.Post("/predict", R"({"assessment": [0.4, 0.9]})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  CHECK(client.Get("/missing")->status == 404);

  stop();
  server.join();
}
