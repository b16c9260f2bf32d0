// Times the serial and OpenMP feature-matrix kernels on random assessments and
// checks that they agree bit for bit.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include <omp.h>

#include "polygrid/features.hpp"
#include "polygrid/geometry.hpp"

using namespace polygrid;

int main(int argc, char** argv) {
  const int rows = argc > 1 ? std::atoi(argv[1]) : 2000;
  const int d = argc > 2 ? std::atoi(argv[2]) : 6;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const geom::RootsOfUnity roots(d);
  std::vector<geom::Polygon> polys;
  for (int i = 0; i < rows; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    polys.push_back(geom::assessment_polygon(x, roots));
  }

  std::printf("rows=%d d=%d threads=%d\n", rows, d, omp_get_max_threads());
  std::printf("%-28s %12s %12s %8s\n", "partition", "serial ms", "parallel ms", "equal");
  for (int n_a : {1, 4, 8}) {
    for (auto ann : {geom::AnnulusType::SInvariant, geom::AnnulusType::RInvariant}) {
      geom::PartitionSpec spec;
      spec.domains = d;
      spec.n_a = n_a;
      spec.n_s = 2 * d;
      spec.annulus = ann;
      spec.sector = geom::SectorType::Cover;
      const auto part = geom::partition_ud(spec);

      double best_s = 1e300, best_p = 1e300;
      Eigen::MatrixXd A, B;
      for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        A = feature_matrix_serial(polys, part);
        auto t1 = std::chrono::steady_clock::now();
        B = feature_matrix(polys, part);
        auto t2 = std::chrono::steady_clock::now();
        best_s = std::min(best_s, std::chrono::duration<double, std::milli>(t1 - t0).count());
        best_p = std::min(best_p, std::chrono::duration<double, std::milli>(t2 - t1).count());
      }
      char name[64];
      std::snprintf(name, sizeof name, "n_a=%d n_s=%d %s", n_a, spec.n_s, geom::to_string(ann).c_str());
      std::printf("%-28s %12.2f %12.2f %8s\n", name, best_s, best_p, A == B ? "yes" : "NO");
      if (A != B) return 1;
    }
  }
  return 0;
}
