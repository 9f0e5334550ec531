#pragma once

// Exact polygon primitives: moments, covariance spectra, the anisotropy map
// and straight-line clipping of convex polygons.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "avem/errors.hpp"

namespace avem {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
inline Scalar cross(const Point2<Scalar>& a, const Point2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Symmetric 2x2 matrix stored by its three independent entries.
template <typename Scalar>
struct SymMat2 {
  Scalar m11{0};
  Scalar m12{0};
  Scalar m22{0};

  Mat2<Scalar> dense() const {
    Mat2<Scalar> m;
    m << m11, m12, m12, m22;
    return m;
  }

  /// Symmetric part of an arbitrary matrix.
  static SymMat2 from(const Mat2<Scalar>& m) {
    return {m(0, 0), Scalar(0.5) * (m(0, 1) + m(1, 0)), m(1, 1)};
  }

  Scalar trace() const { return m11 + m22; }
  Scalar det() const { return m11 * m22 - m12 * m12; }
};

/// Simple polygon with counter-clockwise vertex loop and cached measures.
///
/// Collinear consecutive vertices are allowed; they appear on cells that
/// absorbed a hanging vertex from a neighbour's cut.
template <typename Scalar>
class Polygon {
 public:
  using Point = Point2<Scalar>;

  Polygon() = default;

  explicit Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3)
      throw DegenerateElement("polygon needs at least 3 vertices");
    for (const auto& v : vertices_)
      if (!v.allFinite()) throw DegenerateElement("non-finite polygon vertex");

    diameter_ = 0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      for (std::size_t j = i + 1; j < vertices_.size(); ++j)
        diameter_ = std::max(diameter_, (vertices_[i] - vertices_[j]).norm());

    // Shift to the first vertex before accumulating to limit cancellation.
    const Point& o = vertices_.front();
    Scalar twice_area = 0;
    Point weighted = Point::Zero();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Point a = vertices_[i] - o;
      const Point b = vertices_[(i + 1) % vertices_.size()] - o;
      const Scalar c = cross<Scalar>(a, b);
      twice_area += c;
      weighted += c * (a + b);
    }
    area_ = twice_area / 2;
    if (!(area_ > degeneracy_tolerance() * diameter_ * diameter_))
      throw DegenerateElement("polygon area " + std::to_string(area_) +
                              " is not positive (degenerate or clockwise)");
    centroid_ = o + weighted / (3 * twice_area);
  }

  /// Scale-free area guard: area must exceed this times h_K^2.
  static constexpr Scalar degeneracy_tolerance() { return Scalar(1e-14); }

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point& operator[](std::size_t i) const { return vertices_[i]; }
  const Point& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  Scalar area() const { return area_; }
  const Point& centroid() const { return centroid_; }
  Scalar diameter() const { return diameter_; }

  /// Edge i runs from vertex i to vertex i+1.
  Point edge(std::size_t i) const { return vertex(i + 1) - vertex(i); }
  Scalar edge_length(std::size_t i) const { return edge(i).norm(); }

  /// Outward unit normal of edge i.
  Point edge_normal(std::size_t i) const {
    const Point e = edge(i);
    return Point(e.y(), -e.x()) / e.norm();
  }

  Point edge_midpoint(std::size_t i) const { return (vertex(i) + vertex(i + 1)) / 2; }

 private:
  std::vector<Point> vertices_;
  Scalar area_{0};
  Point centroid_{Point::Zero()};
  Scalar diameter_{0};
};

using Point2d = Point2<double>;
using Mat2d = Mat2<double>;
using SymMat2d = SymMat2<double>;
using Polygon2d = Polygon<double>;

/// True when every turn is left or straight (collinear vertices allowed).
///
/// A vertex may sit up to 1e-9 h_K on the reflex side of the chord joining
/// its neighbours; clipping snaps vertices within 1e-10 h_K of a cut line, so
/// the parts it produces always pass.
template <typename Scalar>
bool is_convex(const Polygon<Scalar>& poly) {
  using std::sqrt;
  const Scalar tol = Scalar(1e-9) * poly.diameter();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto a = poly.edge(i), b = poly.edge(i + 1);
    const Point2<Scalar> chord = a + b;
    if (cross<Scalar>(a, b) < -tol * sqrt(chord.squaredNorm())) return false;
  }
  return true;
}

namespace detail {

template <typename Scalar>
int orientation(const Point2<Scalar>& a, const Point2<Scalar>& b, const Point2<Scalar>& c) {
  const Scalar v = cross<Scalar>(b - a, c - a);
  return (v > 0) - (v < 0);
}

template <typename Scalar>
bool on_segment(const Point2<Scalar>& a, const Point2<Scalar>& b, const Point2<Scalar>& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

template <typename Scalar>
bool segments_touch(const Point2<Scalar>& p1, const Point2<Scalar>& p2,
                    const Point2<Scalar>& q1, const Point2<Scalar>& q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
         (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

}  // namespace detail

/// O(n^2) check that no two non-adjacent edges touch.
template <typename Scalar>
bool is_simple(const Polygon<Scalar>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (detail::segments_touch(poly.vertex(i), poly.vertex(i + 1), poly.vertex(j),
                                 poly.vertex(j + 1)))
        return false;
    }
  return true;
}

template <typename Scalar>
struct PolygonMoments {
  Scalar area;
  Point2<Scalar> centroid;
  /// (1/|K|) * integral of (x - c)(x - c)^T, i.e. the covariance matrix.
  SymMat2<Scalar> second_moment;
};

/// Exact area, centroid and covariance via a fan of triangles from the centroid.
template <typename Scalar>
PolygonMoments<Scalar> polygon_moments(const Polygon<Scalar>& poly) {
  const Point2<Scalar>& c = poly.centroid();
  Mat2<Scalar> acc = Mat2<Scalar>::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2<Scalar> a = poly.vertex(i) - c;
    const Point2<Scalar> b = poly.vertex(i + 1) - c;
    const Point2<Scalar> s = a + b;
    const Scalar tri = cross<Scalar>(a, b) / 2;
    acc += (tri / 12) * (a * a.transpose() + b * b.transpose() + s * s.transpose());
  }
  return {poly.area(), c, SymMat2<Scalar>::from(acc / poly.area())};
}

template <typename Scalar>
SymMat2<Scalar> covariance(const Polygon<Scalar>& poly) {
  return polygon_moments(poly).second_moment;
}

/// Eigenpairs of a symmetric 2x2 matrix, lambda1 >= lambda2.
///
/// Each eigenvector has its first nonzero component positive; on a tie
/// r1 = (1, 0).
template <typename Scalar>
struct SpectralPair {
  Scalar lambda1;
  Scalar lambda2;
  Point2<Scalar> r1;
  Point2<Scalar> r2;

  Mat2<Scalar> frame() const {
    Mat2<Scalar> u;
    u.col(0) = r1;
    u.col(1) = r2;
    return u;
  }
};

namespace detail {

template <typename Scalar>
Point2<Scalar> canonical_sign(Point2<Scalar> v) {
  const Scalar lead = v.x() != 0 ? v.x() : v.y();
  return lead < 0 ? Point2<Scalar>(-v) : v;
}

}  // namespace detail

/// Closed-form eigendecomposition without a definiteness check.
template <typename Scalar>
SpectralPair<Scalar> symmetric_eigen(const SymMat2<Scalar>& m) {
  using std::abs;
  using std::hypot;
  const Scalar a = m.m11, b = m.m12, c = m.m22;
  const Scalar mean = (a + c) / 2;
  const Scalar radius = hypot((a - c) / 2, b);
  SpectralPair<Scalar> out;
  out.lambda1 = mean + radius;
  // det / lambda1 avoids the cancellation in mean - radius for strongly
  // anisotropic input.
  out.lambda2 = out.lambda1 > 0 ? m.det() / out.lambda1 : mean - radius;
  if (out.lambda2 > out.lambda1) out.lambda2 = out.lambda1;

  const Point2<Scalar> u(b, out.lambda1 - a);
  const Point2<Scalar> w(out.lambda1 - c, b);
  const Point2<Scalar>& pick = u.squaredNorm() >= w.squaredNorm() ? u : w;
  const Scalar len = pick.norm();
  if (len == 0 || radius == 0) {
    out.r1 = Point2<Scalar>(1, 0);
  } else {
    out.r1 = detail::canonical_sign<Scalar>(pick / len);
  }
  out.r2 = detail::canonical_sign<Scalar>(Point2<Scalar>(-out.r1.y(), out.r1.x()));
  return out;
}

/// Eigendecomposition of a symmetric positive definite matrix.
template <typename Scalar>
SpectralPair<Scalar> eig_sym2(const SymMat2<Scalar>& m) {
  if (!(m.m11 > 0) || !(m.det() > 0))
    throw NotSPD("matrix is not symmetric positive definite");
  auto e = symmetric_eigen(m);
  if (!(e.lambda2 > 0)) throw NotSPD("smallest eigenvalue is not positive");
  return e;
}

/// Spectral description of a cell and its normalising affine map.
template <typename Scalar>
struct AnisotropyInfo {
  Scalar lambda1;
  Scalar lambda2;
  Point2<Scalar> r1;
  Point2<Scalar> r2;
  Scalar alpha;
  /// Linear part of the map x -> A x sending K to a unit-area isotropic cell.
  Mat2<Scalar> map;

  Scalar ratio() const { return lambda1 / lambda2; }
};

using AnisotropyInfo2d = AnisotropyInfo<double>;

template <typename Scalar>
AnisotropyInfo<Scalar> anisotropy_map(const Polygon<Scalar>& poly) {
  using std::sqrt;
  const auto moments = polygon_moments(poly);
  const auto e = eig_sym2(moments.second_moment);
  AnisotropyInfo<Scalar> info;
  info.lambda1 = e.lambda1;
  info.lambda2 = e.lambda2;
  info.r1 = e.r1;
  info.r2 = e.r2;
  info.alpha = sqrt(sqrt(e.lambda1 * e.lambda2) / moments.area);
  const Eigen::Matrix<Scalar, 2, 1> inv_sqrt(1 / sqrt(e.lambda1), 1 / sqrt(e.lambda2));
  info.map = info.alpha * inv_sqrt.asDiagonal() * e.frame().transpose();
  return info;
}

/// Image of a polygon under x -> A x, re-oriented counter-clockwise.
template <typename Scalar>
Polygon<Scalar> map_polygon(const Polygon<Scalar>& poly, const Mat2<Scalar>& a) {
  std::vector<Point2<Scalar>> pts;
  pts.reserve(poly.size());
  for (const auto& v : poly.vertices()) pts.push_back(a * v);
  if (a.determinant() < 0) std::reverse(pts.begin(), pts.end());
  return Polygon<Scalar>(std::move(pts));
}

/// Where a straight line leaves a convex polygon boundary.
template <typename Scalar>
struct LineCrossing {
  /// Vertex index when at_vertex, else index of the crossed edge (i -> i+1).
  std::size_t index;
  bool at_vertex;
  Point2<Scalar> point;
};

/// The two boundary crossings of the line through `point` along `direction`,
/// in loop order; the polygon vertices following the first crossing lie on
/// the left of the line.
///
/// Vertices closer than 1e-10 h_K to the line are treated as lying on it.
template <typename Scalar>
std::array<LineCrossing<Scalar>, 2> line_crossings(const Polygon<Scalar>& poly,
                                                    const Point2<Scalar>& point,
                                                    const Point2<Scalar>& direction) {
  if (!is_convex(poly)) throw NotConvex("clipping requires a convex polygon");
  const Scalar dnorm = direction.norm();
  if (!(dnorm > 0)) throw ClipFailed("zero cut direction");
  const Point2<Scalar> d = direction / dnorm;
  const Scalar tol = Scalar(1e-10) * poly.diameter();
  const std::size_t n = poly.size();

  std::vector<int> side(n);
  std::vector<Scalar> dist(n);
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = cross<Scalar>(d, poly[i] - point);
    side[i] = std::abs(dist[i]) <= tol ? 0 : (dist[i] > 0 ? 1 : -1);
    pos |= side[i] > 0;
    neg |= side[i] < 0;
  }
  if (!pos || !neg) throw ClipFailed("cut line does not cross the polygon interior");

  std::vector<LineCrossing<Scalar>> found;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (side[i] == 0) {
      found.push_back({i, true, poly[i]});
    } else if (side[j] != 0 && side[i] != side[j]) {
      const Scalar t = dist[i] / (dist[i] - dist[j]);
      found.push_back({i, false, poly[i] + t * (poly[j] - poly[i])});
    }
  }
  if (found.size() != 2) throw ClipFailed("cut line must cross the boundary exactly twice");

  // Order so that the walk from the first crossing visits the left side.
  const std::size_t first_after = (found[0].index + 1) % n;
  if (side[first_after] < 0) std::swap(found[0], found[1]);
  return {found[0], found[1]};
}

/// Splits a cyclic sequence at two crossings. Edge crossings contribute the
/// supplied new item; vertex crossings reuse the existing one. The first
/// loop walks from crossing a to crossing b.
template <typename T, typename Scalar>
std::pair<std::vector<T>, std::vector<T>> split_loop(const std::vector<T>& loop,
                                                     const LineCrossing<Scalar>& a,
                                                     const LineCrossing<Scalar>& b,
                                                     const T& new_a, const T& new_b) {
  const std::size_t n = loop.size();
  const auto item = [&](const LineCrossing<Scalar>& c, const T& fresh) {
    return c.at_vertex ? loop[c.index] : fresh;
  };
  const auto stop = [&](const LineCrossing<Scalar>& c) {
    return c.at_vertex ? c.index : (c.index + 1) % n;
  };
  const auto walk = [&](const LineCrossing<Scalar>& from, const T& from_item,
                        const LineCrossing<Scalar>& to, const T& to_item) {
    std::vector<T> out{from_item};
    for (std::size_t j = (from.index + 1) % n; j != stop(to); j = (j + 1) % n)
      out.push_back(loop[j]);
    out.push_back(to_item);
    return out;
  };
  const T ia = item(a, new_a), ib = item(b, new_b);
  return {walk(a, ia, b, ib), walk(b, ib, a, ia)};
}

template <typename Scalar>
struct ClipResult {
  Polygon<Scalar> left;
  Polygon<Scalar> right;
  std::array<Point2<Scalar>, 2> cut_points;
};

/// Cuts a convex polygon by the line through `point` along `direction`.
template <typename Scalar>
ClipResult<Scalar> clip_polygon(const Polygon<Scalar>& poly, const Point2<Scalar>& point,
                                const Point2<Scalar>& direction) {
  const auto cx = line_crossings(poly, point, direction);
  auto [l, r] = split_loop(poly.vertices(), cx[0], cx[1], cx[0].point, cx[1].point);
  try {
    return {Polygon<Scalar>(std::move(l)), Polygon<Scalar>(std::move(r)),
            {cx[0].point, cx[1].point}};
  } catch (const DegenerateElement& e) {
    throw ClipFailed(std::string("cut produced a degenerate part: ") + e.what());
  }
}

}  // namespace avem
