#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "polygrid/model.hpp"

namespace polygrid {

inline constexpr int kInstanceFormatVersion = 1;

/// Self-describing instance document. Doubles are written in shortest
/// round-trip form; infinite thresholds as the strings "inf" / "-inf".
nlohmann::json instance_to_json(const PolygridInstance& inst);
PolygridInstance instance_from_json(const nlohmann::json& j);

void save_instance(const PolygridInstance& inst, const std::string& path);
PolygridInstance load_instance(const std::string& path);

/// Metadata served to clients: names, config, thresholds, size, ranges.
nlohmann::json instance_summary(const PolygridInstance& inst);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

}  // namespace polygrid
