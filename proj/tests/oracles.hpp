#pragma once
// Independent reference computations used by the unit and acceptance tests.
// They deliberately avoid the library's own code paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "polygrid/geometry.hpp"

namespace oracle {

constexpr double kTau = 2.0 * std::numbers::pi;

/// Area as a fan of triangles around the origin, one per pair of adjacent axes.
inline double fan_area(const std::vector<double>& x) {
  const std::size_t d = x.size();
  double a = 0.0;
  for (std::size_t k = 0; k < d; ++k) a += 0.5 * x[k] * x[(k + 1) % d] * std::sin(kTau / d);
  return a;
}

/// Distance from the origin to the polygon boundary along angle theta.
inline double polygon_reach(const std::vector<double>& x, double theta) {
  const int d = static_cast<int>(x.size());
  const double step = kTau / d;
  double t = std::fmod(theta, kTau);
  if (t < 0) t += kTau;
  const int k = std::min(d - 1, static_cast<int>(t / step));
  const double px = x[k] * std::cos(k * step), py = x[k] * std::sin(k * step);
  const int k1 = (k + 1) % d;
  const double qx = x[k1] * std::cos(k1 * step), qy = x[k1] * std::sin(k1 * step);
  const double ex = qx - px, ey = qy - py;
  const double ux = std::cos(theta), uy = std::sin(theta);
  return (ex * py - ey * px) / (ex * uy - ey * ux);
}

/// Per-cell area of an assessment polygon by Gauss-Legendre quadrature in
/// polar coordinates. Inner annulus boundaries follow the partition's arc
/// chords; the outermost annulus is unbounded.
inline std::vector<double> polar_cell_areas(const std::vector<double>& x, const polygrid::geom::DiscPartition& part) {
  static const double gx[] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double gw[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const int d = static_cast<int>(x.size());
  const int N = part.arc_resolution;
  const double w = kTau / part.n_s;
  const double step = w / (N - 1);
  std::vector<double> out(part.n_s * part.n_a, 0.0);

  for (int q = 0; q < part.n_s; ++q) {
    const double b = part.sector_start + q * w;
    std::vector<double> bps;
    for (int i = 0; i < N; ++i) bps.push_back(b + i * step);
    for (int k = 0; k < 2 * d + 2; ++k) {
      const double a = (k - d - 1) * kTau / d;  // vertex angles over a generous range
      for (int wrap = -1; wrap <= 1; ++wrap) {
        const double aa = a + wrap * kTau;
        if (aa > b && aa < b + w) bps.push_back(aa);
      }
    }
    std::sort(bps.begin(), bps.end());

    auto chord = [&](double r, double th) {
      const int i = std::clamp(static_cast<int>((th - b) / step), 0, N - 2);
      const double mid = b + (i + 0.5) * step;
      return r * std::cos(step / 2) / std::cos(th - mid);
    };

    for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
      const double t0 = bps[s], t1 = bps[s + 1];
      if (t1 - t0 < 1e-15) continue;
      const int sub = 120;
      for (int j = 0; j < sub; ++j) {
        const double a0 = t0 + (t1 - t0) * j / sub, a1 = t0 + (t1 - t0) * (j + 1) / sub;
        const double half = 0.5 * (a1 - a0), mid = 0.5 * (a0 + a1);
        for (int g = 0; g < 5; ++g) {
          const double th = mid + half * gx[g];
          const double rho = polygon_reach(x, th);
          for (int p = 0; p < part.n_a; ++p) {
            const double lo = p == 0 ? 0.0 : chord(part.radii[p - 1], th);
            const double hi = p + 1 == part.n_a ? std::numeric_limits<double>::infinity() : chord(part.radii[p], th);
            const double r = std::max(lo, std::min(rho, hi));
            out[p * part.n_s + q] += half * gw[g] * 0.5 * (r * r - lo * lo);
          }
        }
      }
    }
  }
  return out;
}

/// Pearson correlation of two columns.
inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  double sab = 0, saa = 0, sbb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a(i) - ma) * (b(i) - mb);
    saa += (a(i) - ma) * (a(i) - ma);
    sbb += (b(i) - mb) * (b(i) - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
