#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "polygrid/model.hpp"

namespace polygrid::diagram {

using XY = std::array<double, 2>;

enum class TagState { Neutral, Green, Yellow, Grey };
std::string to_string(TagState s);

struct Tag {
  double value = 0.0;
  TagState state = TagState::Neutral;
  std::string caption;
};

struct Cell {
  int index = 0;                  // partition cell number
  std::vector<XY> vertices;       // the partition's own polygonal cell
  double weight = 0.0;
  std::string color;
  double coverage = 0.0;          // matching charts only
  double feature = 0.0;           // matching charts only
  double contribution = 0.0;      // matching charts only: weight * feature
};

enum class ChartKind { Assessment, Assignment, Matching };
std::string to_string(ChartKind k);

struct Chart {
  ChartKind kind = ChartKind::Assessment;
  int row = 0;
  int col = 0;
  int label = -1;       // assignment / matching
  int assessment = -1;  // assessment / matching
  std::vector<XY> polygon;
  std::vector<Cell> cells;
  std::optional<Tag> tag;
  std::optional<int> rank;  // position in the predicted ranking, if any
};

struct ColorTick {
  double value = 0.0;
  std::string color;
};

struct DiagramModel {
  int rows = 0;  // 1 header row + one per assessment
  int cols = 0;  // 1 header column + one per label
  std::string config_tag;
  std::vector<std::string> axis_names;  // domain names in vertex order
  std::vector<std::string> label_names;
  std::vector<int> column_labels;       // label shown in column c + 1
  double weight_limit = 0.0;            // colours span [-limit, +limit]
  std::vector<ColorTick> colorbar;
  std::vector<Chart> charts;
  /// Per displayed column: fitted intercept or the fixed offset of the
  /// symmetric encoding, absent when the solver adds no constant.
  std::vector<std::optional<Tag>> intercept_tags;
};

/// Diverging red-white-blue colour for a weight, scaled by `limit`.
std::string weight_color(double weight, double limit);

/// `X` holds the unit-scaled rows that produced `predictions`.
DiagramModel build_diagram(const PolygridInstance& inst, const Eigen::MatrixXd& X,
                           const std::vector<Prediction>& predictions);

struct SvgStyle {
  double chart_size = 180.0;
  double radius = 62.0;
  std::string font = "sans-serif";
};

std::string render_svg(const DiagramModel& dm, const SvgStyle& style = {});

nlohmann::json to_json(const DiagramModel& dm);
DiagramModel diagram_from_json(const nlohmann::json& j);

}  // namespace polygrid::diagram
