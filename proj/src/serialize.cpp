#include "polygrid/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "polygrid/error.hpp"

namespace polygrid {

nlohmann::json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw InvalidInput("expected a number, got " + j.dump());
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(number_to_json(M(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InvalidInput(std::string(what) + " row " + std::to_string(i) + " has the wrong length");
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = number_from_json(j[i][k]);
  }
  return M;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from_json(j[i]);
  return v;
}

}  // namespace

nlohmann::json instance_to_json(const PolygridInstance& inst) {
  const auto& part = inst.partition;
  nlohmann::json j;
  j["format"] = "polygrid-instance";
  j["version"] = kInstanceFormatVersion;
  j["config"] = to_json(inst.config);
  j["task"] = to_string(inst.task);
  j["domains"] = inst.domains;
  j["vertex_order"] = inst.vertex_order;
  j["partition"] = {{"n_a", part.n_a},
                    {"n_s", part.n_s},
                    {"annulus", geom::to_string(part.annulus)},
                    {"sector", geom::to_string(part.sector)},
                    {"radii", part.radii},
                    {"sector_start", part.sector_start},
                    {"arc_resolution", part.arc_resolution}};
  j["W"] = matrix_to_json(inst.W);
  j["intercepts"] = inst.intercepts ? vector_to_json(*inst.intercepts) : nlohmann::json(nullptr);
  j["intercepts_fitted"] = inst.intercepts_fitted;
  j["thresholds"] = vector_to_json(inst.thresholds);
  j["degenerate_labels"] = inst.degenerate_labels;
  j["prototypes"] = matrix_to_json(inst.prototypes);
  j["label_names"] = inst.label_names;
  j["domain_names"] = inst.domain_names;
  j["membership_W"] = inst.membership_W ? matrix_to_json(*inst.membership_W) : nlohmann::json(nullptr);
  j["membership_intercepts"] =
      inst.membership_intercepts ? vector_to_json(*inst.membership_intercepts) : nlohmann::json(nullptr);
  j["membership_intercepts_fitted"] = inst.membership_intercepts_fitted;
  j["scale_maxima"] = inst.scale_maxima;
  j["size"] = inst.size();
  return j;
}

PolygridInstance instance_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "polygrid-instance") throw InvalidInput("not a polygrid instance document");
    const int version = j.at("version").get<int>();
    if (version != kInstanceFormatVersion)
      throw InvalidInput("unsupported instance version " + std::to_string(version));

    PolygridInstance inst;
    inst.config = config_from_json(j.at("config"));
    inst.task = parse_task(j.at("task").get<std::string>());
    inst.domains = j.at("domains").get<int>();
    inst.vertex_order = j.at("vertex_order").get<std::vector<int>>();

    const auto& p = j.at("partition");
    geom::PartitionSpec spec;
    spec.domains = inst.domains;
    spec.n_a = p.at("n_a").get<int>();
    spec.n_s = p.at("n_s").get<int>();
    spec.annulus = geom::parse_annulus(p.at("annulus").get<std::string>());
    spec.sector = geom::parse_sector(p.at("sector").get<std::string>());
    spec.arc_resolution = p.at("arc_resolution").get<int>();
    const auto radii = p.at("radii").get<std::vector<double>>();
    if (spec.annulus == geom::AnnulusType::Tree && !radii.empty())
      spec.tree_radii.assign(radii.begin(), radii.end() - 1);
    inst.partition = geom::partition_ud(spec);
    if (inst.partition.radii != radii) throw InvalidInput("stored radii do not match the partition parameters");

    inst.W = matrix_from_json(j.at("W"), "W");
    if (!j.at("intercepts").is_null()) inst.intercepts = vector_from_json(j.at("intercepts"), "intercepts");
    inst.intercepts_fitted = j.at("intercepts_fitted").get<bool>();
    inst.thresholds = vector_from_json(j.at("thresholds"), "thresholds");
    inst.degenerate_labels = j.at("degenerate_labels").get<std::vector<int>>();
    inst.prototypes = matrix_from_json(j.at("prototypes"), "prototypes");
    inst.label_names = j.at("label_names").get<std::vector<std::string>>();
    inst.domain_names = j.at("domain_names").get<std::vector<std::string>>();
    if (!j.at("membership_W").is_null()) inst.membership_W = matrix_from_json(j.at("membership_W"), "membership_W");
    if (!j.at("membership_intercepts").is_null())
      inst.membership_intercepts = vector_from_json(j.at("membership_intercepts"), "membership_intercepts");
    inst.membership_intercepts_fitted = j.at("membership_intercepts_fitted").get<bool>();
    inst.scale_maxima = j.at("scale_maxima").get<std::vector<double>>();

    const int n = inst.labels();
    if (inst.cells() != inst.partition.cell_count()) throw InvalidInput("W column count does not match the partition");
    if (inst.thresholds.size() != n || static_cast<int>(inst.label_names.size()) != n || inst.prototypes.rows() != n)
      throw InvalidInput("per-label fields disagree in length");
    if (static_cast<int>(inst.domain_names.size()) != inst.domains ||
        static_cast<int>(inst.vertex_order.size()) != inst.domains)
      throw InvalidInput("per-domain fields disagree in length");
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed instance document: ") + e.what());
  }
}

void save_instance(const PolygridInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << instance_to_json(inst).dump(1) << '\n';
}

PolygridInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return instance_from_json(j);
}

nlohmann::json instance_summary(const PolygridInstance& inst) {
  nlohmann::json j;
  j["task"] = to_string(inst.task);
  j["domain_names"] = inst.domain_names;
  j["label_names"] = inst.label_names;
  j["vertex_order"] = inst.vertex_order;
  j["config"] = to_json(inst.config);
  j["config_tag"] = describe(inst.config);
  j["thresholds"] = vector_to_json(inst.thresholds);
  j["size"] = inst.size();
  j["cells"] = inst.cells();
  j["scale_maxima"] = inst.scale_maxima;
  j["prototypes"] = matrix_to_json(inst.prototypes);
  return j;
}

}  // namespace polygrid
