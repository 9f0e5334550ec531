#pragma once

// Shared generators and oracles for the unit and acceptance suites. Nothing
// here calls into the library's quadrature or projector code paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "avem/geometry.hpp"

namespace avem::testing {

/// Random convex polygon: sorted angles on a rotated, stretched ellipse.
inline Polygon2d random_convex_polygon(std::mt19937& rng, int min_vertices = 3,
                                       int max_vertices = 9, double max_stretch = 6.0) {
  std::uniform_int_distribution<int> count(min_vertices, max_vertices);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<double> angles(n);
  for (;;) {
    for (auto& a : angles) a = 2 * std::numbers::pi * unit(rng);
    std::sort(angles.begin(), angles.end());
    bool spread = true;
    for (int i = 0; i < n; ++i) {
      const double next = i + 1 < n ? angles[i + 1] : angles[0] + 2 * std::numbers::pi;
      if (next - angles[i] < 0.05 || next - angles[i] > 0.95 * std::numbers::pi)
        spread = false;
    }
    if (spread) break;
  }
  const double stretch = 1.0 + (max_stretch - 1.0) * unit(rng);
  const double theta = 2 * std::numbers::pi * unit(rng);
  const double scale = 0.1 + 2.0 * unit(rng);
  const Point2d shift(4 * unit(rng) - 2, 4 * unit(rng) - 2);
  Mat2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  std::vector<Point2d> pts;
  for (double a : angles)
    pts.push_back(shift + scale * rot * Point2d(stretch * std::cos(a), std::sin(a)));
  return Polygon2d(pts);
}

inline Polygon2d rectangle(double x0, double y0, double x1, double y1) {
  return Polygon2d({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

/// Gauss-Legendre on [0,1] via the Golub-Welsch eigenproblem.
struct GolubWelsch {
  std::vector<double> x, w;
  explicit GolubWelsch(int n) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double b = k / std::sqrt(4.0 * k * k - 1.0);
      jac(k, k - 1) = jac(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    for (int i = 0; i < n; ++i) {
      x.push_back((es.eigenvalues()(i) + 1) / 2);
      const double v0 = es.eigenvectors()(0, i);
      w.push_back(v0 * v0);
    }
  }
};

/// Integral of x^a y^b over a polygon by the divergence theorem:
/// int_K x^a y^b = oint x^(a+1) y^b / (a+1) dy.
inline double boundary_monomial_integral(const Polygon2d& poly, int a, int b) {
  const GolubWelsch g(12);
  double sum = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2d p = poly.vertex(i), q = poly.vertex(i + 1);
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const Point2d z = p + g.x[k] * (q - p);
      sum += g.w[k] * std::pow(z.x(), a + 1) * std::pow(z.y(), b) / (a + 1) * (q.y() - p.y());
    }
  }
  return sum;
}

/// Uniform samples inside a polygon by rejection from its bounding box.
template <typename F>
double monte_carlo_integral(const Polygon2d& poly, F&& f, int samples, std::mt19937& rng) {
  Eigen::Vector2d lo = poly[0], hi = poly[0];
  for (const auto& v : poly.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  double sum = 0;
  int inside = 0;
  for (int s = 0; s < samples; ++s) {
    const Point2d p(ux(rng), uy(rng));
    bool in = true;
    for (std::size_t i = 0; i < poly.size() && in; ++i)
      in = cross<double>(poly.edge(i), p - poly.vertex(i)) >= 0;
    if (in) {
      sum += f(p);
      ++inside;
    }
  }
  const double box = (hi - lo).prod();
  return sum / samples * box;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace avem::testing
