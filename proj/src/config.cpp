#include "polygrid/config.hpp"

#include <sstream>

#include "polygrid/error.hpp"

namespace polygrid {

std::string to_string(VertexOrder v) {
  switch (v) {
    case VertexOrder::Original: return "original";
    case VertexOrder::Rho: return "rho";
    case VertexOrder::Averages: return "averages";
    case VertexOrder::Measures: return "measures";
  }
  return "?";
}

std::string to_string(CutoffScheme c) { return c == CutoffScheme::Single ? "single" : "multiple"; }

std::string to_string(Task t) {
  switch (t) {
    case Task::Multiclass: return "multiclass";
    case Task::Multilabel: return "multilabel";
    case Task::LabelRanking: return "labelranking";
  }
  return "?";
}

VertexOrder parse_vertex_order(const std::string& s) {
  if (s == "original") return VertexOrder::Original;
  if (s == "rho") return VertexOrder::Rho;
  if (s == "averages" || s == "avg") return VertexOrder::Averages;
  if (s == "measures" || s == "msr") return VertexOrder::Measures;
  throw InvalidInput("unknown vertex order '" + s + "'");
}

CutoffScheme parse_cutoff(const std::string& s) {
  if (s == "single") return CutoffScheme::Single;
  if (s == "multiple") return CutoffScheme::Multiple;
  throw InvalidInput("unknown cutoff scheme '" + s + "'");
}

Task parse_task(const std::string& s) {
  if (s == "multiclass") return Task::Multiclass;
  if (s == "multilabel") return Task::Multilabel;
  if (s == "labelranking" || s == "ranking") return Task::LabelRanking;
  throw InvalidInput("unknown task '" + s + "'");
}

namespace {

std::string short_name(VertexOrder v) {
  switch (v) {
    case VertexOrder::Averages: return "avg";
    case VertexOrder::Measures: return "msr";
    default: return to_string(v);
  }
}

std::string short_name(geom::AnnulusType a) {
  switch (a) {
    case geom::AnnulusType::SInvariant: return "s-invt";
    case geom::AnnulusType::RInvariant: return "r-invt";
    default: return "tree";
  }
}

template <class T>
T read_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string describe(const PolygridConfig& cfg) {
  std::ostringstream os;
  os << '(' << cfg.ns_per_domain << ", " << cfg.n_a << ", " << short_name(cfg.vorder) << ", "
     << short_name(cfg.annulus) << ", " << geom::to_string(cfg.sector) << ", "
     << solvers::to_string(cfg.solver.variant) << ", " << to_string(cfg.cutoff) << ')';
  return os.str();
}

nlohmann::json to_json(const PolygridConfig& cfg) {
  return {{"ns_per_domain", cfg.ns_per_domain},
          {"n_a", cfg.n_a},
          {"vorder", to_string(cfg.vorder)},
          {"sector", geom::to_string(cfg.sector)},
          {"annulus", geom::to_string(cfg.annulus)},
          {"solver", solvers::to_string(cfg.solver.variant)},
          {"ridge_lambda", cfg.solver.ridge_lambda},
          {"cutoff", to_string(cfg.cutoff)},
          {"threshold_granularity", cfg.threshold_granularity},
          {"arc_resolution", cfg.arc_resolution},
          {"seed", cfg.seed}};
}

PolygridConfig config_from_json(const nlohmann::json& j, PolygridConfig base) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  PolygridConfig c = base;
  c.ns_per_domain = read_or(j, "ns_per_domain", c.ns_per_domain);
  c.n_a = read_or(j, "n_a", c.n_a);
  if (j.contains("vorder")) c.vorder = parse_vertex_order(read_or<std::string>(j, "vorder", ""));
  if (j.contains("sector")) c.sector = geom::parse_sector(read_or<std::string>(j, "sector", ""));
  if (j.contains("annulus")) c.annulus = geom::parse_annulus(read_or<std::string>(j, "annulus", ""));
  if (j.contains("solver")) c.solver.variant = solvers::parse_solver(read_or<std::string>(j, "solver", ""));
  c.solver.ridge_lambda = read_or(j, "ridge_lambda", c.solver.ridge_lambda);
  if (j.contains("cutoff")) c.cutoff = parse_cutoff(read_or<std::string>(j, "cutoff", ""));
  c.threshold_granularity = read_or(j, "threshold_granularity", c.threshold_granularity);
  c.arc_resolution = read_or(j, "arc_resolution", c.arc_resolution);
  c.seed = read_or(j, "seed", c.seed);

  if (c.ns_per_domain < 1) throw InvalidInput("ns_per_domain must be >= 1");
  if (c.n_a < 1) throw InvalidInput("n_a must be >= 1");
  if (c.threshold_granularity < 2) throw InvalidInput("threshold_granularity must be >= 2");
  if (c.arc_resolution < 2) throw InvalidInput("arc_resolution must be >= 2");
  if (c.solver.variant == solvers::SolverVariant::Ridge && !(c.solver.ridge_lambda > 0.0))
    throw InvalidInput("ridge_lambda must be > 0");
  return c;
}

std::size_t GridSpec::size() const {
  return ns_per_domain.size() * n_a.size() * vorder.size() * annulus.size() * sector.size() *
         solver.size() * cutoff.size();
}

PolygridConfig GridSpec::at(std::size_t index) const {
  if (index >= size()) throw InvalidInput("grid index " + std::to_string(index) + " out of range");
  PolygridConfig c = base;
  std::size_t rest = index;
  auto take = [&rest](std::size_t radix) {
    const std::size_t digit = rest % radix;
    rest /= radix;
    return digit;
  };
  // Innermost axis first.
  c.cutoff = cutoff[take(cutoff.size())];
  c.solver.variant = solver[take(solver.size())];
  c.sector = sector[take(sector.size())];
  c.annulus = annulus[take(annulus.size())];
  c.vorder = vorder[take(vorder.size())];
  c.n_a = n_a[take(n_a.size())];
  c.ns_per_domain = ns_per_domain[take(ns_per_domain.size())];
  return c;
}

std::vector<PolygridConfig> GridSpec::enumerate() const {
  std::vector<PolygridConfig> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

GridSpec default_grid() { return GridSpec{}; }

nlohmann::json to_json(const GridSpec& g) {
  nlohmann::json j;
  j["ns_per_domain"] = g.ns_per_domain;
  j["n_a"] = g.n_a;
  for (auto v : g.vorder) j["vorder"].push_back(to_string(v));
  for (auto v : g.annulus) j["annulus"].push_back(geom::to_string(v));
  for (auto v : g.sector) j["sector"].push_back(geom::to_string(v));
  for (auto v : g.solver) j["solver"].push_back(solvers::to_string(v));
  for (auto v : g.cutoff) j["cutoff"].push_back(to_string(v));
  j["base"] = to_json(g.base);
  return j;
}

GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("grid must be a JSON object");
  GridSpec g;
  auto strings = [&j](const char* key) {
    std::vector<std::string> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
    if (out.empty()) throw InvalidInput(std::string("grid axis '") + key + "' is empty");
    return out;
  };
  try {
    if (j.contains("base")) g.base = config_from_json(j.at("base"));
    if (j.contains("ns_per_domain")) g.ns_per_domain = j.at("ns_per_domain").get<std::vector<int>>();
    if (j.contains("n_a")) g.n_a = j.at("n_a").get<std::vector<int>>();
    if (j.contains("vorder")) {
      g.vorder.clear();
      for (const auto& s : strings("vorder")) g.vorder.push_back(parse_vertex_order(s));
    }
    if (j.contains("annulus")) {
      g.annulus.clear();
      for (const auto& s : strings("annulus")) g.annulus.push_back(geom::parse_annulus(s));
    }
    if (j.contains("sector")) {
      g.sector.clear();
      for (const auto& s : strings("sector")) g.sector.push_back(geom::parse_sector(s));
    }
    if (j.contains("solver")) {
      g.solver.clear();
      for (const auto& s : strings("solver")) g.solver.push_back(solvers::parse_solver(s));
    }
    if (j.contains("cutoff")) {
      g.cutoff.clear();
      for (const auto& s : strings("cutoff")) g.cutoff.push_back(parse_cutoff(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed grid: ") + e.what());
  }
  if (g.size() == 0) throw InvalidInput("grid has no configs");
  return g;
}

}  // namespace polygrid
