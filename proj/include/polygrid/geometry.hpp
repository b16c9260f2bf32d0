#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polygrid/error.hpp"

namespace polygrid::geom {

using Point = std::complex<double>;

/// Closed polygonal chain; the closing edge back to the first vertex is implicit.
struct Polygon {
  std::vector<Point> vertices;
};

/// Signed shoelace area; positive for anticlockwise chains.
double signed_area(std::span<const Point> chain);

/// Unsigned shoelace area. Chains with fewer than three vertices measure 0.
double polygon_area(const Polygon& p);

/// The d-th roots of unity ordered anticlockwise from 1.
struct RootsOfUnity {
  int d = 0;
  std::vector<Point> zeta;

  explicit RootsOfUnity(int domains);
};

/// Places score x_k on the ray of the k-th root of unity.
Polygon assessment_polygon(std::span<const double> scores, const RootsOfUnity& roots);

struct DiscMapping {
  std::vector<Polygon> polygons;
  RootsOfUnity zeta;
};

/// Maps each row of a unit-scaled score matrix to its assessment polygon.
/// Rejects d <= 2 and any score outside (0, 1].
DiscMapping uh_to_ud(const Eigen::MatrixXd& X);

/// Throws InvalidInput naming the first offending (row, column) if any score
/// lies outside (0, 1].
void check_unit_scores(const Eigen::MatrixXd& X);

/// Sum of the covering triangles nu * x_k * x_{k+1} (indices mod d).
double star_area(std::span<const double> scores);

enum class AnnulusType { SInvariant, RInvariant, Tree };
enum class SectorType { Miss, Cover };

std::string to_string(AnnulusType t);
std::string to_string(SectorType t);
AnnulusType parse_annulus(const std::string& s);
SectorType parse_sector(const std::string& s);

struct PartitionSpec {
  int domains = 4;
  int n_a = 1;
  int n_s = 4;
  AnnulusType annulus = AnnulusType::SInvariant;
  SectorType sector = SectorType::Miss;
  /// Inner annulus boundaries (n_a - 1 values) when annulus == Tree.
  std::vector<double> tree_radii;
  int arc_resolution = 64;
};

/// Annular-sector cells of the unit disc, enumerated anticlockwise from the
/// origin outwards: cell r = p * n_s + q for annulus p and sector q.
struct DiscPartition {
  int n_a = 1;
  int n_s = 1;
  AnnulusType annulus = AnnulusType::SInvariant;
  SectorType sector = SectorType::Miss;
  /// Outer radius of each annulus, ascending, ending at 1.0.
  std::vector<double> radii;
  double sector_start = 0.0;
  int arc_resolution = 64;
  std::vector<Polygon> cells;

  int cell_count() const { return n_a * n_s; }
  double sector_width() const;
  double sector_begin(int q) const;
  double inner_radius(int p) const { return p == 0 ? 0.0 : radii[p - 1]; }

  /// Arc sample points of radius r over sector q, anticlockwise, endpoints included.
  std::vector<Point> arc(int q, double r) const;
};

std::vector<double> annulus_radii(int n_a, AnnulusType type, std::span<const double> tree_radii);

DiscPartition partition_ud(const PartitionSpec& spec);

/// Area of p covering each cell, in cell order. Sums to polygon_area(p) for
/// polygons star-shaped about the origin and inside the closed unit disc.
std::vector<double> cell_coverage(const Polygon& p, const DiscPartition& part);

/// Writes cell_coverage into a preallocated span of length cell_count().
void cell_coverage_into(const Polygon& p, const DiscPartition& part, std::span<double> out);

/// Sutherland-Hodgman step: keeps the part of `subject` left of the directed line a->b.
std::vector<Point> clip_left_of(std::span<const Point> subject, Point a, Point b);

/// Intersects `subject` with a convex anticlockwise polygon.
std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> convex);

}  // namespace polygrid::geom
