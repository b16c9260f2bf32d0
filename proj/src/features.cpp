#include "polygrid/features.hpp"

#include <vector>

namespace polygrid {

Eigen::MatrixXd feature_matrix_serial(std::span<const geom::Polygon> polygons,
                                      const geom::DiscPartition& part) {
  const auto m = static_cast<Eigen::Index>(polygons.size());
  Eigen::MatrixXd S(m, part.cell_count());
  std::vector<double> row(part.cell_count());
  for (Eigen::Index i = 0; i < m; ++i) {
    geom::cell_coverage_into(polygons[i], part, row);
    for (int r = 0; r < part.cell_count(); ++r) S(i, r) = row[r];
  }
  return S;
}

Eigen::MatrixXd feature_matrix(std::span<const geom::Polygon> polygons,
                               const geom::DiscPartition& part) {
  const auto m = static_cast<Eigen::Index>(polygons.size());
  const int cells = part.cell_count();
  Eigen::MatrixXd S(m, cells);
#pragma omp parallel
  {
    std::vector<double> row(cells);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
      geom::cell_coverage_into(polygons[i], part, row);
      for (int r = 0; r < cells; ++r) S(i, r) = row[r];
    }
  }
  return S;
}

Eigen::MatrixXd map_to_features(const Eigen::MatrixXd& X, const geom::DiscPartition& part) {
  const auto mapped = geom::uh_to_ud(X);
  return feature_matrix(mapped.polygons, part);
}

}  // namespace polygrid
