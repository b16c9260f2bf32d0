#pragma once

#include <span>

#include <Eigen/Dense>

#include "polygrid/geometry.hpp"

namespace polygrid {

/// Row i holds cell_coverage(polygons[i], part). Single-threaded reference.
Eigen::MatrixXd feature_matrix_serial(std::span<const geom::Polygon> polygons,
                                      const geom::DiscPartition& part);

/// Same result as feature_matrix_serial, rows distributed over OpenMP threads.
Eigen::MatrixXd feature_matrix(std::span<const geom::Polygon> polygons,
                               const geom::DiscPartition& part);

/// The feature map: unit-scaled rows -> polygons -> cell coverage.
Eigen::MatrixXd map_to_features(const Eigen::MatrixXd& X, const geom::DiscPartition& part);

}  // namespace polygrid
