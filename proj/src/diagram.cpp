#include "polygrid/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "polygrid/error.hpp"
#include "polygrid/serialize.hpp"

namespace polygrid::diagram {

std::string to_string(TagState s) {
  switch (s) {
    case TagState::Neutral: return "neutral";
    case TagState::Green: return "green";
    case TagState::Yellow: return "yellow";
    case TagState::Grey: return "grey";
  }
  return "?";
}

std::string to_string(ChartKind k) {
  switch (k) {
    case ChartKind::Assessment: return "assessment";
    case ChartKind::Assignment: return "assignment";
    case ChartKind::Matching: return "matching";
  }
  return "?";
}

namespace {

TagState parse_state(const std::string& s) {
  for (auto t : {TagState::Neutral, TagState::Green, TagState::Yellow, TagState::Grey})
    if (to_string(t) == s) return t;
  throw InvalidInput("unknown tag state '" + s + "'");
}

ChartKind parse_kind(const std::string& s) {
  for (auto k : {ChartKind::Assessment, ChartKind::Assignment, ChartKind::Matching})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown chart kind '" + s + "'");
}

struct Rgb {
  double r, g, b;
};

// Red for negative, near-white at zero, blue for positive.
constexpr Rgb kRamp[] = {{178, 24, 43}, {239, 138, 98}, {247, 247, 247}, {103, 169, 207}, {33, 102, 172}};

std::vector<XY> to_xy(const std::vector<geom::Point>& pts) {
  std::vector<XY> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p.real(), p.imag()});
  return out;
}

}  // namespace

std::string weight_color(double weight, double limit) {
  const double t = limit > 0.0 ? std::clamp(weight / limit, -1.0, 1.0) : 0.0;
  const double pos = (t + 1.0) * 2.0;  // 0..4 along the ramp
  const int lo = std::min(3, static_cast<int>(std::floor(pos)));
  const double f = pos - lo;
  const Rgb& a = kRamp[lo];
  const Rgb& b = kRamp[lo + 1];
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(a.r + f * (b.r - a.r))),
                static_cast<int>(std::lround(a.g + f * (b.g - a.g))), static_cast<int>(std::lround(a.b + f * (b.b - a.b))));
  return buf;
}

DiagramModel build_diagram(const PolygridInstance& inst, const Eigen::MatrixXd& X,
                           const std::vector<Prediction>& predictions) {
  if (X.rows() != static_cast<Eigen::Index>(predictions.size()))
    throw DimensionMismatch("diagram needs one prediction per assessment row");
  if (X.cols() != inst.domains) throw DimensionMismatch("assessment rows do not match the instance's domains");
  const int n = inst.labels();
  for (const auto& p : predictions)
    if (p.scores.size() != n || p.contributions.cols() != inst.cells())
      throw InvalidInput("prediction was not produced by this instance");

  DiagramModel dm;
  dm.rows = 1 + static_cast<int>(X.rows());
  dm.cols = 1 + n;
  dm.config_tag = describe(inst.config);
  for (int k = 0; k < inst.domains; ++k) dm.axis_names.push_back(inst.domain_names[inst.vertex_order[k]]);
  dm.label_names = inst.label_names;

  std::vector<double> proto_area(n);
  std::vector<geom::Polygon> proto_poly(n);
  const auto roots = inst.roots();
  for (int j = 0; j < n; ++j) {
    std::vector<double> ordered(inst.domains);
    for (int k = 0; k < inst.domains; ++k) ordered[k] = inst.prototypes(j, inst.vertex_order[k]);
    proto_poly[j] = geom::assessment_polygon(ordered, roots);
    proto_area[j] = geom::polygon_area(proto_poly[j]);
  }
  dm.column_labels.resize(n);
  std::iota(dm.column_labels.begin(), dm.column_labels.end(), 0);
  std::stable_sort(dm.column_labels.begin(), dm.column_labels.end(),
                   [&](int a, int b) { return proto_area[a] < proto_area[b]; });

  dm.weight_limit = inst.W.size() ? inst.W.cwiseAbs().maxCoeff() : 0.0;
  const double wmin = inst.W.size() ? inst.W.minCoeff() : 0.0;
  const double wmax = inst.W.size() ? inst.W.maxCoeff() : 0.0;
  if (wmin == wmax) {
    dm.colorbar.push_back({wmin, weight_color(wmin, dm.weight_limit)});
  } else {
    for (int t = -2; t <= 2; ++t) {
      const double v = dm.weight_limit * t / 2.0;
      dm.colorbar.push_back({v, weight_color(v, dm.weight_limit)});
    }
  }

  auto label_cells = [&](int j) {
    std::vector<Cell> cells;
    for (int r = 0; r < inst.cells(); ++r) {
      Cell c;
      c.index = r;
      c.vertices = to_xy(inst.partition.cells[r].vertices);
      c.weight = inst.W(j, r);
      c.color = weight_color(c.weight, dm.weight_limit);
      cells.push_back(std::move(c));
    }
    return cells;
  };

  for (int c = 0; c < n; ++c) {
    const int j = dm.column_labels[c];
    Chart ch;
    ch.kind = ChartKind::Assignment;
    ch.row = 0;
    ch.col = c + 1;
    ch.label = j;
    ch.polygon = to_xy(proto_poly[j].vertices);
    ch.cells = label_cells(j);
    if (inst.task != Task::Multiclass) ch.tag = Tag{inst.thresholds(j), TagState::Neutral, "threshold"};
    dm.charts.push_back(std::move(ch));

    if (inst.intercepts) {
      const TagState st = TagState::Grey;
      dm.intercept_tags.push_back(Tag{(*inst.intercepts)(j), st, inst.intercepts_fitted ? "intercept" : "offset"});
    } else {
      dm.intercept_tags.push_back(std::nullopt);
    }
  }

  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Prediction& pred = predictions[i];
    std::vector<double> row(X.cols());
    for (Eigen::Index k = 0; k < X.cols(); ++k) row[k] = X(i, k);
    const auto poly = to_xy(inst.polygon(row).vertices);

    Chart a;
    a.kind = ChartKind::Assessment;
    a.row = static_cast<int>(i) + 1;
    a.col = 0;
    a.assessment = static_cast<int>(i);
    a.polygon = poly;
    a.tag = Tag{pred.area, TagState::Neutral, "area"};
    dm.charts.push_back(std::move(a));

    for (int c = 0; c < n; ++c) {
      const int j = dm.column_labels[c];
      Chart m;
      m.kind = ChartKind::Matching;
      m.row = static_cast<int>(i) + 1;
      m.col = c + 1;
      m.label = j;
      m.assessment = static_cast<int>(i);
      m.polygon = poly;
      m.cells = label_cells(j);
      for (auto& cell : m.cells) {
        cell.coverage = pred.coverage(cell.index);
        cell.feature = pred.features(cell.index);
        cell.contribution = pred.contributions(j, cell.index);
      }
      const bool above = pred.scores(j) >= inst.thresholds(j);
      m.tag = Tag{pred.scores(j), above ? TagState::Green : TagState::Yellow, "score"};
      if (pred.ranking) {
        const auto& r = *pred.ranking;
        const auto it = std::find(r.begin(), r.end(), j);
        if (it != r.end()) m.rank = static_cast<int>(it - r.begin());
      }
      dm.charts.push_back(std::move(m));
    }
  }
  return dm;
}

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s(buf);
  if (s == "-0.0000" || s == "-0.000") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double cx, cy, r;
  std::string point(const XY& p) const { return fmt(cx + r * p[0]) + "," + fmt(cy - r * p[1]); }
  std::string points(const std::vector<XY>& ps) const {
    std::string s;
    for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? " " : "") + point(ps[i]);
    return s;
  }
};

void tag_svg(std::ostringstream& os, const Tag& tag, double x, double y) {
  os << "<g class=\"tag " << to_string(tag.state) << "\">";
  if (!tag.caption.empty()) os << "<title>" << escape(tag.caption) << "</title>";
  os << "<rect x=\"" << fmt(x - 30) << "\" y=\"" << fmt(y - 11)
     << "\" width=\"60\" height=\"16\" rx=\"3\"/><text x=\"" << fmt(x) << "\" y=\"" << fmt(y + 1)
     << "\" text-anchor=\"middle\">" << fmt(tag.value, "%.3f") << "</text></g>\n";
}

}  // namespace

std::string render_svg(const DiagramModel& dm, const SvgStyle& style) {
  const double S = style.chart_size;
  const double width = S * dm.cols;
  const double footer = 80.0;
  const double height = S * dm.rows + footer;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width, "%.0f") << "\" height=\""
     << fmt(height, "%.0f") << "\" viewBox=\"0 0 " << fmt(width, "%.0f") << ' ' << fmt(height, "%.0f")
     << "\" font-family=\"" << escape(style.font) << "\" font-size=\"10\">\n"
     << "<style>.disc{fill:none;stroke:#999;stroke-width:0.6}.axis{stroke:#bbb;stroke-width:0.5}"
        ".outline{fill:none;stroke:#222;stroke-width:1.2}.assess{fill:#cfcfcf;stroke:#222;stroke-width:1.2}"
        ".cell{stroke:#fff;stroke-width:0.3}.tag rect{stroke:#444;stroke-width:0.5}"
        ".tag.green rect{fill:#7bd37b}.tag.yellow rect{fill:#f3de5a}.tag.neutral rect{fill:#fff}"
        ".tag.grey rect{fill:#d0d0d0}</style>\n";

  os << "<defs>\n";
  for (std::size_t k = 0; k < dm.charts.size(); ++k) {
    const Chart& ch = dm.charts[k];
    if (ch.kind != ChartKind::Matching) continue;
    const Frame f{S * ch.col + S / 2, S * ch.row + S / 2, style.radius};
    os << "<clipPath id=\"clip" << k << "\"><polygon points=\"" << f.points(ch.polygon) << "\"/></clipPath>\n";
  }
  os << "</defs>\n";

  os << "<text class=\"config\" x=\"" << fmt(S / 2) << "\" y=\"" << fmt(S / 2) << "\" text-anchor=\"middle\">"
     << escape(dm.config_tag) << "</text>\n";

  for (std::size_t k = 0; k < dm.charts.size(); ++k) {
    const Chart& ch = dm.charts[k];
    const Frame f{S * ch.col + S / 2, S * ch.row + S / 2, style.radius};
    os << "<g class=\"chart " << to_string(ch.kind) << "\" data-row=\"" << ch.row << "\" data-col=\"" << ch.col << "\">\n";
    if (ch.kind == ChartKind::Matching) os << "<g clip-path=\"url(#clip" << k << ")\">";
    if (ch.kind != ChartKind::Assessment) {
      for (const auto& c : ch.cells)
        os << "<polygon class=\"cell\" points=\"" << f.points(c.vertices) << "\" fill=\"" << c.color << "\"/>";
      os << '\n';
    }
    if (ch.kind == ChartKind::Matching) os << "</g>\n";
    os << "<circle class=\"disc\" cx=\"" << fmt(f.cx) << "\" cy=\"" << fmt(f.cy) << "\" r=\"" << fmt(f.r) << "\"/>\n";
    const auto d = dm.axis_names.size();
    for (std::size_t a = 0; a < d; ++a) {
      const double ang = 2.0 * M_PI * static_cast<double>(a) / static_cast<double>(d);
      const XY tip{std::cos(ang), std::sin(ang)};
      const XY lab{1.18 * std::cos(ang), 1.18 * std::sin(ang)};
      os << "<line class=\"axis\" x1=\"" << fmt(f.cx) << "\" y1=\"" << fmt(f.cy) << "\" x2=\"" << fmt(f.cx + f.r * tip[0])
         << "\" y2=\"" << fmt(f.cy - f.r * tip[1]) << "\"/>";
      if (ch.kind == ChartKind::Assessment)
        os << "<text x=\"" << fmt(f.cx + f.r * lab[0]) << "\" y=\"" << fmt(f.cy - f.r * lab[1] + 3)
           << "\" text-anchor=\"middle\" font-size=\"8\">" << escape(dm.axis_names[a]) << "</text>";
    }
    os << '\n';
    os << "<polygon class=\"" << (ch.kind == ChartKind::Assessment ? "assess" : "outline") << "\" points=\""
       << f.points(ch.polygon) << "\"/>\n";
    if (ch.kind == ChartKind::Assignment)
      os << "<text x=\"" << fmt(f.cx) << "\" y=\"" << fmt(S * ch.row + 12) << "\" text-anchor=\"middle\">"
         << escape(dm.label_names.at(ch.label)) << "</text>\n";
    if (ch.tag) tag_svg(os, *ch.tag, f.cx, S * (ch.row + 1) - 8);
    if (ch.rank)
      os << "<text class=\"rank\" x=\"" << fmt(S * ch.col + 10) << "\" y=\"" << fmt(S * ch.row + 14) << "\">#"
         << *ch.rank + 1 << "</text>\n";
    os << "</g>\n";
  }

  for (std::size_t c = 0; c < dm.intercept_tags.size(); ++c)
    if (dm.intercept_tags[c]) tag_svg(os, *dm.intercept_tags[c], S * (c + 1) + S / 2, S * dm.rows + 14);

  const double bar_x = S * 0.25, bar_y = S * dm.rows + 34, bar_w = S * 0.5 * std::max(1, dm.cols);
  os << "<g class=\"colorbar\">";
  if (dm.colorbar.size() == 1) {
    os << "<rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(bar_y) << "\" width=\"" << fmt(bar_w) << "\" height=\"12\" fill=\""
       << dm.colorbar[0].color << "\"/><text x=\"" << fmt(bar_x + bar_w / 2) << "\" y=\"" << fmt(bar_y + 26)
       << "\" text-anchor=\"middle\">" << fmt(dm.colorbar[0].value, "%.3f") << "</text>";
  } else {
    const int steps = 40;
    for (int s = 0; s < steps; ++s) {
      const double v = dm.weight_limit * (-1.0 + 2.0 * (s + 0.5) / steps);
      os << "<rect x=\"" << fmt(bar_x + bar_w * s / steps) << "\" y=\"" << fmt(bar_y) << "\" width=\""
         << fmt(bar_w / steps + 0.2) << "\" height=\"12\" fill=\"" << weight_color(v, dm.weight_limit) << "\"/>";
    }
    for (std::size_t t = 0; t < dm.colorbar.size(); ++t) {
      const double x = bar_x + bar_w * static_cast<double>(t) / static_cast<double>(dm.colorbar.size() - 1);
      os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(bar_y + 26) << "\" text-anchor=\"middle\">"
         << fmt(dm.colorbar[t].value, "%.3f") << "</text>";
    }
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

namespace {

nlohmann::json xy_json(const std::vector<XY>& pts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pts) out.push_back({p[0], p[1]});
  return out;
}

std::vector<XY> xy_from(const nlohmann::json& j) {
  std::vector<XY> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

nlohmann::json tag_json(const Tag& t) {
  return {{"value", number_to_json(t.value)}, {"state", to_string(t.state)}, {"caption", t.caption}};
}

Tag tag_from(const nlohmann::json& j) {
  return Tag{number_from_json(j.at("value")), parse_state(j.at("state").get<std::string>()),
             j.at("caption").get<std::string>()};
}

}  // namespace

nlohmann::json to_json(const DiagramModel& dm) {
  nlohmann::json j;
  j["rows"] = dm.rows;
  j["cols"] = dm.cols;
  j["config_tag"] = dm.config_tag;
  j["axis_names"] = dm.axis_names;
  j["label_names"] = dm.label_names;
  j["column_labels"] = dm.column_labels;
  j["weight_limit"] = dm.weight_limit;
  j["colorbar"] = nlohmann::json::array();
  for (const auto& t : dm.colorbar) j["colorbar"].push_back({{"value", t.value}, {"color", t.color}});
  j["intercept_tags"] = nlohmann::json::array();
  for (const auto& t : dm.intercept_tags) j["intercept_tags"].push_back(t ? tag_json(*t) : nlohmann::json(nullptr));
  j["charts"] = nlohmann::json::array();
  for (const auto& ch : dm.charts) {
    nlohmann::json c;
    c["kind"] = to_string(ch.kind);
    c["row"] = ch.row;
    c["col"] = ch.col;
    c["label"] = ch.label;
    c["assessment"] = ch.assessment;
    c["polygon"] = xy_json(ch.polygon);
    c["tag"] = ch.tag ? tag_json(*ch.tag) : nlohmann::json(nullptr);
    c["rank"] = ch.rank ? nlohmann::json(*ch.rank) : nlohmann::json(nullptr);
    c["cells"] = nlohmann::json::array();
    for (const auto& cell : ch.cells) {
      nlohmann::json cj{{"index", cell.index},
                        {"vertices", xy_json(cell.vertices)},
                        {"weight", cell.weight},
                        {"color", cell.color}};
      if (ch.kind == ChartKind::Matching) {
        cj["coverage"] = cell.coverage;
        cj["feature"] = cell.feature;
        cj["contribution"] = cell.contribution;
      }
      c["cells"].push_back(std::move(cj));
    }
    j["charts"].push_back(std::move(c));
  }
  return j;
}

DiagramModel diagram_from_json(const nlohmann::json& j) {
  try {
    DiagramModel dm;
    dm.rows = j.at("rows").get<int>();
    dm.cols = j.at("cols").get<int>();
    dm.config_tag = j.at("config_tag").get<std::string>();
    dm.axis_names = j.at("axis_names").get<std::vector<std::string>>();
    dm.label_names = j.at("label_names").get<std::vector<std::string>>();
    dm.column_labels = j.at("column_labels").get<std::vector<int>>();
    dm.weight_limit = j.at("weight_limit").get<double>();
    for (const auto& t : j.at("colorbar")) dm.colorbar.push_back({t.at("value").get<double>(), t.at("color").get<std::string>()});
    for (const auto& t : j.at("intercept_tags"))
      dm.intercept_tags.push_back(t.is_null() ? std::nullopt : std::optional<Tag>(tag_from(t)));
    for (const auto& c : j.at("charts")) {
      Chart ch;
      ch.kind = parse_kind(c.at("kind").get<std::string>());
      ch.row = c.at("row").get<int>();
      ch.col = c.at("col").get<int>();
      ch.label = c.at("label").get<int>();
      ch.assessment = c.at("assessment").get<int>();
      ch.polygon = xy_from(c.at("polygon"));
      if (!c.at("tag").is_null()) ch.tag = tag_from(c.at("tag"));
      if (!c.at("rank").is_null()) ch.rank = c.at("rank").get<int>();
      for (const auto& cj : c.at("cells")) {
        Cell cell;
        cell.index = cj.at("index").get<int>();
        cell.vertices = xy_from(cj.at("vertices"));
        cell.weight = cj.at("weight").get<double>();
        cell.color = cj.at("color").get<std::string>();
        cell.coverage = cj.value("coverage", 0.0);
        cell.feature = cj.value("feature", 0.0);
        cell.contribution = cj.value("contribution", 0.0);
        ch.cells.push_back(std::move(cell));
      }
      dm.charts.push_back(std::move(ch));
    }
    return dm;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed diagram document: ") + e.what());
  }
}

}  // namespace polygrid::diagram
