#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "avem/errors.hpp"
#include "avem/geometry.hpp"

namespace avem {

/// Gauss-Legendre nodes and weights on [0, 1].
template <typename Scalar>
struct GaussRule1D {
  std::vector<Scalar> nodes;
  std::vector<Scalar> weights;
};

/// n-point Gauss-Legendre rule on [0, 1] by Newton iteration on P_n.
template <typename Scalar>
GaussRule1D<Scalar> make_gauss_legendre(int n) {
  using std::abs;
  using std::cos;
  GaussRule1D<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    Scalar x = cos(std::numbers::pi_v<Scalar> * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (abs(dx) < std::numeric_limits<Scalar>::epsilon()) break;
    }
    rule.nodes[i] = (1 - x) / 2;
    rule.weights[i] = Scalar(1) / ((1 - x * x) * dp * dp);
  }
  return rule;
}

template <typename Scalar>
const GaussRule1D<Scalar>& gauss_legendre(int n) {
  static const auto table = [] {
    std::array<GaussRule1D<Scalar>, 12> t;
    for (int k = 1; k < 12; ++k) t[k] = make_gauss_legendre<Scalar>(k);
    return t;
  }();
  return table.at(n);
}

namespace detail {
// Evaluates Eigen expressions so they can serve as accumulators.
template <typename T>
auto materialize(T&& x) {
  if constexpr (std::is_base_of_v<Eigen::EigenBase<std::decay_t<T>>, std::decay_t<T>>)
    return x.eval();
  else
    return x;
}
}  // namespace detail

template <typename Scalar>
struct Quadrature {
  std::vector<Point2<Scalar>> points;
  std::vector<Scalar> weights;
  int degree{0};

  std::size_t size() const { return points.size(); }

  template <typename F>
  auto integrate(F&& f) const {
    auto sum = detail::materialize(f(points.front()) * weights.front());
    for (std::size_t q = 1; q < points.size(); ++q) sum += f(points[q]) * weights[q];
    return sum;
  }
};

inline constexpr int max_quadrature_degree = 8;

/// Rule exact for polynomials up to `degree` on the polygon.
///
/// Fan of triangles from the centroid, each integrated with a collapsed
/// (Duffy) tensor Gauss rule.
template <typename Scalar>
Quadrature<Scalar> polygon_quadrature(const Polygon<Scalar>& poly, int degree) {
  if (degree < 0 || degree > max_quadrature_degree)
    throw UnsupportedDegree("quadrature degree " + std::to_string(degree) +
                            " outside [0, " + std::to_string(max_quadrature_degree) + "]");
  // Collapsing adds one degree in the radial variable.
  const int n = (degree + 1) / 2 + 1;
  const auto& g = gauss_legendre<Scalar>(n);
  Quadrature<Scalar> quad;
  quad.degree = degree;
  quad.points.reserve(poly.size() * n * n);
  quad.weights.reserve(poly.size() * n * n);
  const Point2<Scalar>& c = poly.centroid();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2<Scalar> a = poly.vertex(i) - c;
    const Point2<Scalar> b = poly.vertex(i + 1) - c;
    const Scalar jac = cross<Scalar>(a, b);  // twice the signed triangle area
    for (int iu = 0; iu < n; ++iu) {
      const Scalar u = g.nodes[iu];
      for (int iv = 0; iv < n; ++iv) {
        const Scalar v = g.nodes[iv];
        quad.points.push_back(c + u * ((1 - v) * a + v * b));
        quad.weights.push_back(jac * u * g.weights[iu] * g.weights[iv]);
      }
    }
  }
  return quad;
}

/// Scaled monomials ((x - c)/h)^alpha, |alpha| <= degree, ordered by total
/// degree then decreasing power of x: 1, X, Y, X^2, XY, Y^2.
template <typename Scalar>
class ScaledMonomials {
 public:
  using Point = Point2<Scalar>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Gradients = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

  ScaledMonomials() = default;
  ScaledMonomials(Point center, Scalar h, int degree)
      : center_(std::move(center)), h_(h), degree_(degree) {
    if (degree < 0 || degree > 2)
      throw UnsupportedDegree("scaled monomials implemented for degree 0..2");
  }
  explicit ScaledMonomials(const Polygon<Scalar>& poly, int degree)
      : ScaledMonomials(poly.centroid(), poly.diameter(), degree) {}

  static constexpr int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

  int degree() const { return degree_; }
  int size() const { return dimension(degree_); }
  const Point& center() const { return center_; }
  Scalar scale() const { return h_; }

  static std::array<int, 2> exponent(int i) {
    constexpr std::array<std::array<int, 2>, 6> table{
        {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
    return table.at(i);
  }

  Vector values(const Point& x) const {
    const Scalar s = (x.x() - center_.x()) / h_;
    const Scalar t = (x.y() - center_.y()) / h_;
    Vector v(size());
    v(0) = 1;
    if (degree_ >= 1) {
      v(1) = s;
      v(2) = t;
    }
    if (degree_ >= 2) {
      v(3) = s * s;
      v(4) = s * t;
      v(5) = t * t;
    }
    return v;
  }

  Scalar value(int i, const Point& x) const { return values(x)(i); }

  /// Column i holds the Cartesian gradient of monomial i.
  Gradients gradients(const Point& x) const {
    const Scalar s = (x.x() - center_.x()) / h_;
    const Scalar t = (x.y() - center_.y()) / h_;
    Gradients g = Gradients::Zero(2, size());
    if (degree_ >= 1) {
      g(0, 1) = 1 / h_;
      g(1, 2) = 1 / h_;
    }
    if (degree_ >= 2) {
      g(0, 3) = 2 * s / h_;
      g(0, 4) = t / h_;
      g(1, 4) = s / h_;
      g(1, 5) = 2 * t / h_;
    }
    return g;
  }

  Point gradient(int i, const Point& x) const { return gradients(x).col(i); }

  /// Laplacian of monomial i (constant for degree <= 2).
  Scalar laplacian(int i) const {
    return (i == 3 || i == 5) ? Scalar(2) / (h_ * h_) : Scalar(0);
  }

 private:
  Point center_{Point::Zero()};
  Scalar h_{1};
  int degree_{0};
};

using Quadrature2d = Quadrature<double>;
using ScaledMonomials2d = ScaledMonomials<double>;

}  // namespace avem
