#include "polygrid/service.hpp"

#include <cmath>

#include <httplib.h>

#include "polygrid/diagram.hpp"
#include "polygrid/error.hpp"
#include "polygrid/serialize.hpp"

namespace polygrid::service {

namespace {

using nlohmann::json;

struct FieldError {
  std::string field;
  std::string message;
};

Response error_response(int status, const std::string& what, const std::vector<FieldError>& fields) {
  json f = json::array();
  for (const auto& e : fields) f.push_back({{"field", e.field}, {"message", e.message}});
  return {status, {{"error", what}, {"fields", f}}};
}

json prediction_json(const PolygridInstance& inst, const Prediction& p) {
  json j;
  j["scores"] = std::vector<double>(p.scores.data(), p.scores.data() + p.scores.size());
  j["labels"] = p.labels;
  std::vector<std::string> names;
  for (std::size_t l = 0; l < p.labels.size(); ++l)
    if (p.labels[l]) names.push_back(inst.label_names[l]);
  j["label_names"] = names;
  j["area"] = p.area;
  j["coverage"] = std::vector<double>(p.coverage.data(), p.coverage.data() + p.coverage.size());
  j["contributions"] = matrix_to_json(p.contributions);
  if (p.ranking) j["ranking"] = *p.ranking;
  if (p.membership)
    j["membership"] = std::vector<double>(p.membership->data(), p.membership->data() + p.membership->size());
  return j;
}

}  // namespace

Service::Service(PolygridInstance inst) : inst_(std::move(inst)) {
  model_doc_["summary"] = instance_summary(inst_);
  model_doc_["instance"] = instance_to_json(inst_);
  const Eigen::MatrixXd none(0, inst_.domains);
  model_doc_["diagram"] = diagram::to_json(diagram::build_diagram(inst_, none, {}));
}

Response Service::get_model() const { return {200, model_doc_}; }

Response Service::get_healthz() const {
  return {200, {{"status", "ok"}, {"domains", inst_.domains}, {"labels", inst_.labels()}}};
}

Response Service::post_predict(const std::string& body) const {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "invalid request", {{"body", std::string("not valid JSON: ") + e.what()}});
  }
  if (!req.is_object()) return error_response(400, "invalid request", {{"body", "expected a JSON object"}});

  std::vector<FieldError> errors;
  std::string scale = "unit";
  if (req.contains("scale")) {
    if (!req["scale"].is_string() || (req["scale"] != "unit" && req["scale"] != "raw"))
      errors.push_back({"scale", "must be \"unit\" or \"raw\""});
    else
      scale = req["scale"].get<std::string>();
  }
  if (scale == "raw" && inst_.scale_maxima.size() != static_cast<std::size_t>(inst_.domains))
    errors.push_back({"scale", "this instance has no scaling maxima; submit unit-scaled scores"});
  bool want_diagram = true;
  if (req.contains("diagram")) {
    if (!req["diagram"].is_boolean())
      errors.push_back({"diagram", "must be a boolean"});
    else
      want_diagram = req["diagram"].get<bool>();
  }

  json rows;
  std::string key;
  if (req.contains("assessments")) {
    key = "assessments";
    rows = req["assessments"];
    if (!rows.is_array() || rows.empty()) {
      errors.push_back({key, "must be a non-empty array of score arrays"});
      rows = json::array();
    }
  } else if (req.contains("assessment")) {
    key = "assessment";
    rows = json::array({req["assessment"]});
  } else {
    errors.push_back({"assessments", "missing"});
  }
  if (!errors.empty()) return error_response(400, "invalid request", errors);

  std::vector<FieldError> dims;
  Eigen::MatrixXd X(rows.size(), inst_.domains);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = key == "assessment" ? key : key + "[" + std::to_string(i) + "]";
    const json& r = rows[i];
    if (!r.is_array()) {
      errors.push_back({where, "must be an array of numbers"});
      continue;
    }
    if (r.size() != static_cast<std::size_t>(inst_.domains)) {
      dims.push_back({where, "expected " + std::to_string(inst_.domains) + " scores, got " + std::to_string(r.size())});
      continue;
    }
    for (int k = 0; k < inst_.domains; ++k) {
      const std::string f = where + "[" + std::to_string(k) + "]";
      if (!r[k].is_number()) {
        errors.push_back({f, "must be a number"});
        continue;
      }
      double v = r[k].get<double>();
      if (!std::isfinite(v)) {
        errors.push_back({f, "must be finite"});
        continue;
      }
      if (scale == "raw") {
        if (v < 0.0 || v > inst_.scale_maxima[k]) {
          errors.push_back({f, "raw score outside [0, " + std::to_string(inst_.scale_maxima[k]) + "]"});
          continue;
        }
        v /= inst_.scale_maxima[k];
        if (v == 0.0) v = 1e-6;
      } else if (!(v > 0.0 && v <= 1.0)) {
        errors.push_back({f, "unit score must be strictly positive and at most 1"});
        continue;
      }
      X(static_cast<Eigen::Index>(i), k) = v;
    }
  }
  if (!errors.empty()) return error_response(400, "invalid request", errors);
  if (!dims.empty()) return error_response(422, "dimension mismatch", dims);

  const auto preds = inst_.predict_batch(X);
  json out;
  out["predictions"] = json::array();
  for (const auto& p : preds) out["predictions"].push_back(prediction_json(inst_, p));
  if (want_diagram) out["diagram"] = diagram::to_json(diagram::build_diagram(inst_, X, preds));
  return {200, out};
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
  const bool known = path == "/model" || path == "/predict" || path == "/healthz";
  if (!known) return error_response(404, "not found", {{"path", path}});
  if (path == "/predict") {
    if (method != "POST") return error_response(405, "method not allowed", {{"method", method}});
    return post_predict(body);
  }
  if (method != "GET") return error_response(405, "method not allowed", {{"method", method}});
  return path == "/model" ? get_model() : get_healthz();
}

bool serve(const Service& svc, const std::string& host, int port, const ReadyCallback& on_ready) {
  httplib::Server server;
  auto bind = [&svc](const std::string& method) {
    return [&svc, method](const httplib::Request& req, httplib::Response& res) {
      const Response r = svc.handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
  };
  for (const char* p : {"/model", "/predict", "/healthz"}) {
    server.Get(p, bind("GET"));
    server.Post(p, bind("POST"));
  }
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return false;
  if (on_ready) on_ready(bound, [&server] { server.stop(); });
  return server.listen_after_bind();
}

}  // namespace polygrid::service
