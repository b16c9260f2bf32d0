#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "polygrid/model.hpp"

namespace polygrid::service {

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// HTTP-free request handlers around one fitted instance, so tests can call
/// them directly. `serve` binds them to a socket.
class Service {
 public:
  explicit Service(PolygridInstance inst);

  /// Summary, full instance document and the header row of the diagram.
  Response get_model() const;
  /// Body: {"assessments": [[...], ...]} or {"assessment": [...]}, optional
  /// "scale": "unit" (default) or "raw", optional "diagram": bool (default true).
  Response post_predict(const std::string& body) const;
  Response get_healthz() const;

  Response handle(const std::string& method, const std::string& path, const std::string& body) const;

  const PolygridInstance& instance() const { return inst_; }

 private:
  PolygridInstance inst_;
  nlohmann::json model_doc_;
};

/// Receives the bound port and a thread-safe stop function once the socket is open.
using ReadyCallback = std::function<void(int port, std::function<void()> stop)>;

/// Blocks until the server stops. Port 0 picks a free port. Returns false if
/// the port cannot be bound.
bool serve(const Service& svc, const std::string& host, int port, const ReadyCallback& on_ready = {});

}  // namespace polygrid::service
