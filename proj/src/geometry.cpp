#include "polygrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace polygrid::geom {

namespace {

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

}  // namespace

double signed_area(std::span<const Point> chain) {
  const std::size_t n = chain.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(chain[i], chain[(i + 1) % n]);
  return 0.5 * twice;
}

double polygon_area(const Polygon& p) { return std::abs(signed_area(p.vertices)); }

RootsOfUnity::RootsOfUnity(int domains) : d(domains) {
  if (domains <= 2) {
    throw InvalidInput("roots of unity need d > 2, got d=" + std::to_string(domains));
  }
  const double theta = 2.0 * std::numbers::pi / d;
  zeta.reserve(d);
  for (int k = 0; k < d; ++k) zeta.emplace_back(std::cos(k * theta), std::sin(k * theta));
}

Polygon assessment_polygon(std::span<const double> scores, const RootsOfUnity& roots) {
  if (static_cast<int>(scores.size()) != roots.d) {
    throw DimensionMismatch("assessment has " + std::to_string(scores.size()) +
                            " scores, expected " + std::to_string(roots.d));
  }
  Polygon p;
  p.vertices.reserve(scores.size());
  for (int k = 0; k < roots.d; ++k) p.vertices.push_back(scores[k] * roots.zeta[k]);
  return p;
}

void check_unit_scores(const Eigen::MatrixXd& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      const double v = X(i, k);
      if (!(v > 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "score at row " << i << ", column " << k << " is " << v
            << "; unit-scaled scores must lie in (0, 1]";
        throw InvalidInput(msg.str());
      }
    }
  }
}

DiscMapping uh_to_ud(const Eigen::MatrixXd& X) {
  RootsOfUnity roots(static_cast<int>(X.cols()));
  check_unit_scores(X);
  DiscMapping out{{}, roots};
  out.polygons.reserve(X.rows());
  std::vector<double> row(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) row[k] = X(i, k);
    out.polygons.push_back(assessment_polygon(row, roots));
  }
  return out;
}

double star_area(std::span<const double> scores) {
  const std::size_t d = scores.size();
  const double nu = std::sin(2.0 * std::numbers::pi / static_cast<double>(d)) / 2.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) sum += scores[k] * scores[(k + 1) % d];
  return nu * sum;
}

std::string to_string(AnnulusType t) {
  switch (t) {
    case AnnulusType::SInvariant: return "s-invariant";
    case AnnulusType::RInvariant: return "r-invariant";
    case AnnulusType::Tree: return "tree";
  }
  return "?";
}

std::string to_string(SectorType t) { return t == SectorType::Miss ? "miss" : "cover"; }

AnnulusType parse_annulus(const std::string& s) {
  if (s == "s-invariant" || s == "s-invt") return AnnulusType::SInvariant;
  if (s == "r-invariant" || s == "r-invt") return AnnulusType::RInvariant;
  if (s == "tree") return AnnulusType::Tree;
  throw InvalidInput("unknown annulus type '" + s + "'");
}

SectorType parse_sector(const std::string& s) {
  if (s == "miss") return SectorType::Miss;
  if (s == "cover") return SectorType::Cover;
  throw InvalidInput("unknown sector type '" + s + "'");
}

double DiscPartition::sector_width() const { return 2.0 * std::numbers::pi / n_s; }

double DiscPartition::sector_begin(int q) const { return sector_start + q * sector_width(); }

std::vector<Point> DiscPartition::arc(int q, double r) const {
  const double begin = sector_begin(q);
  const double step = sector_width() / (arc_resolution - 1);
  std::vector<Point> pts;
  pts.reserve(arc_resolution);
  for (int i = 0; i < arc_resolution; ++i) pts.push_back(std::polar(r, begin + i * step));
  return pts;
}

std::vector<double> annulus_radii(int n_a, AnnulusType type, std::span<const double> tree_radii) {
  std::vector<double> radii;
  radii.reserve(n_a);
  switch (type) {
    case AnnulusType::SInvariant:
      for (int p = 0; p < n_a; ++p) radii.push_back(std::sqrt(static_cast<double>(p + 1) / n_a));
      break;
    case AnnulusType::RInvariant:
      for (int p = 0; p < n_a; ++p) radii.push_back(static_cast<double>(p + 1) / n_a);
      break;
    case AnnulusType::Tree: {
      if (static_cast<int>(tree_radii.size()) != n_a - 1) {
        throw InvalidInput("tree annuli need " + std::to_string(n_a - 1) + " inner radii, got " +
                           std::to_string(tree_radii.size()));
      }
      double prev = 0.0;
      for (double r : tree_radii) {
        if (!(r > prev && r < 1.0)) {
          throw InvalidInput("tree radii must be strictly ascending inside (0, 1)");
        }
        radii.push_back(r);
        prev = r;
      }
      radii.push_back(1.0);
      break;
    }
  }
  radii.back() = 1.0;
  return radii;
}

DiscPartition partition_ud(const PartitionSpec& spec) {
  if (spec.n_a < 1) throw InvalidInput("n_a must be at least 1");
  if (spec.domains <= 2) throw InvalidInput("partition needs d > 2");
  if (spec.n_s < spec.domains || spec.n_s % spec.domains != 0) {
    throw InvalidInput("n_s=" + std::to_string(spec.n_s) + " must be a positive multiple of d=" +
                       std::to_string(spec.domains));
  }
  if (spec.arc_resolution < 2) throw InvalidInput("arc_resolution must be at least 2");

  DiscPartition part;
  part.n_a = spec.n_a;
  part.n_s = spec.n_s;
  part.annulus = spec.annulus;
  part.sector = spec.sector;
  part.arc_resolution = spec.arc_resolution;
  part.radii = annulus_radii(spec.n_a, spec.annulus, spec.tree_radii);
  part.sector_start = spec.sector == SectorType::Miss ? 0.0 : -std::numbers::pi / spec.n_s;

  part.cells.reserve(part.cell_count());
  for (int p = 0; p < part.n_a; ++p) {
    const double r_in = part.inner_radius(p);
    const double r_out = part.radii[p];
    for (int q = 0; q < part.n_s; ++q) {
      Polygon cell;
      cell.vertices = part.arc(q, r_out);
      if (r_in > 0.0) {
        auto inner = part.arc(q, r_in);
        cell.vertices.insert(cell.vertices.end(), inner.rbegin(), inner.rend());
      } else {
        cell.vertices.emplace_back(0.0, 0.0);
      }
      part.cells.push_back(std::move(cell));
    }
  }
  return part;
}

std::vector<Point> clip_left_of(std::span<const Point> subject, Point a, Point b) {
  std::vector<Point> out;
  const std::size_t n = subject.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  const Point dir = b - a;
  auto side = [&](Point v) { return cross(dir, v - a); };
  for (std::size_t i = 0; i < n; ++i) {
    const Point cur = subject[i];
    const Point nxt = subject[(i + 1) % n];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc >= 0.0) out.push_back(cur);
    if ((sc >= 0.0) != (sn >= 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> convex) {
  std::vector<Point> cur(subject.begin(), subject.end());
  const std::size_t n = convex.size();
  for (std::size_t i = 0; i < n && !cur.empty(); ++i) {
    cur = clip_left_of(cur, convex[i], convex[(i + 1) % n]);
  }
  return cur;
}

namespace {

// Area of `wedged` (already inside sector q) that also lies inside the
// polygonal pie of radius r.
double area_within_radius(const std::vector<Point>& wedged, const DiscPartition& part, int q,
                          double r) {
  if (wedged.size() < 3) return 0.0;
  const int segments = part.arc_resolution - 1;
  const double apothem = r * std::cos(part.sector_width() / (2.0 * segments));
  double reach = 0.0;
  for (const auto& v : wedged) reach = std::max(reach, std::abs(v));
  if (reach <= apothem) return std::abs(signed_area(wedged));

  const auto arc = part.arc(q, r);
  std::vector<Point> cur = wedged;
  for (int i = 0; i < segments && cur.size() >= 3; ++i) cur = clip_left_of(cur, arc[i], arc[i + 1]);
  return std::abs(signed_area(cur));
}

}  // namespace

void cell_coverage_into(const Polygon& p, const DiscPartition& part, std::span<double> out) {
  if (static_cast<int>(out.size()) != part.cell_count()) {
    throw DimensionMismatch("coverage buffer has wrong length");
  }
  const Point origin(0.0, 0.0);
  for (int q = 0; q < part.n_s; ++q) {
    const double begin = part.sector_begin(q);
    const Point dir0 = std::polar(1.0, begin);
    const Point dir1 = std::polar(1.0, begin + part.sector_width());
    auto wedged = clip_left_of(p.vertices, origin, dir0);
    wedged = clip_left_of(wedged, dir1, origin);

    // The outermost annulus is bounded by the wedge alone: the polygon already
    // lies in the closed unit disc, so nothing is lost between arc chords.
    double below = 0.0;
    for (int a = 0; a < part.n_a; ++a) {
      const double within = a + 1 == part.n_a ? std::abs(signed_area(wedged))
                                              : area_within_radius(wedged, part, q, part.radii[a]);
      out[a * part.n_s + q] = std::max(0.0, within - below);
      below = within;
    }
  }
}

std::vector<double> cell_coverage(const Polygon& p, const DiscPartition& part) {
  std::vector<double> s(part.cell_count(), 0.0);
  cell_coverage_into(p, part, s);
  return s;
}

}  // namespace polygrid::geom
