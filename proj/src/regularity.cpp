#include <algorithm>
#include <cmath>

#include "avem/mesh.hpp"

namespace avem {

namespace {

struct HalfPlane {
  Point2d normal;  // outward unit normal
  double offset;   // normal . x <= offset inside
};

std::vector<HalfPlane> supporting_lines(const Polygon2d& poly) {
  std::vector<HalfPlane> lines;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2d n = poly.edge_normal(i);
    const bool repeated = std::any_of(lines.begin(), lines.end(), [&](const HalfPlane& l) {
      return l.normal.dot(n) > 1 - 1e-12;
    });
    if (!repeated) lines.push_back({n, n.dot(poly.vertex(i))});
  }
  return lines;
}

}  // namespace

double chebyshev_radius(const Polygon2d& poly) {
  // Maximise r subject to n_i . x + r <= c_i. The optimum sits on a vertex
  // of the 3-variable LP, so enumerating constraint triples is exact.
  const auto lines = supporting_lines(poly);
  const double scale = poly.diameter();
  double best = 0;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j)
      for (std::size_t k = j + 1; k < lines.size(); ++k) {
        Eigen::Matrix3d m;
        Eigen::Vector3d rhs;
        for (int row = 0; const auto* l : {&lines[i], &lines[j], &lines[k]}) {
          m.row(row) << l->normal.x(), l->normal.y(), 1.0;
          rhs(row) = l->offset;
          ++row;
        }
        if (std::abs(m.determinant()) < 1e-12) continue;
        const Eigen::Vector3d s = m.partialPivLu().solve(rhs);
        if (s(2) <= best) continue;
        const Point2d x(s(0), s(1));
        const bool feasible = std::all_of(lines.begin(), lines.end(), [&](const HalfPlane& l) {
          return l.normal.dot(x) + s(2) <= l.offset + 1e-12 * scale;
        });
        if (feasible) best = s(2);
      }
  return best;
}

namespace {

CellRegularity cell_regularity(const Polygon2d& poly) {
  CellRegularity r{};
  r.diameter = poly.diameter();
  r.chebyshev_radius = chebyshev_radius(poly);
  r.aspect_ratio = r.diameter / r.chebyshev_radius;
  double min_edge = r.diameter;
  for (std::size_t i = 0; i < poly.size(); ++i) min_edge = std::min(min_edge, poly.edge_length(i));
  r.edge_ratio = r.diameter / min_edge;

  const auto info = anisotropy_map(poly);
  r.anisotropy_ratio = info.ratio();
  r.alpha = info.alpha;
  const auto hat = map_polygon(poly, info.map);
  r.mapped_aspect_ratio = hat.diameter() / chebyshev_radius(hat);
  double min_hat_edge = hat.diameter();
  for (std::size_t i = 0; i < hat.size(); ++i) min_hat_edge = std::min(min_hat_edge, hat.edge_length(i));
  r.mapped_edge_ratio = hat.diameter() / min_hat_edge;
  return r;
}

}  // namespace

RegularityReport regularity_report(const Mesh& mesh) {
  RegularityReport report;
  std::vector<SpectralPair<double>> spectra;
  report.cells.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto poly = mesh.polygon(static_cast<int>(c));
    report.cells.push_back(cell_regularity(poly));
    spectra.push_back(eig_sym2(covariance(poly)));
  }
  const auto patches = cell_patches(mesh);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (int other : patches[c]) {
      if (other <= static_cast<int>(c)) continue;
      const auto& p = spectra[c];
      const auto& m = spectra[other];
      NeighborRegularity nr{};
      nr.plus = static_cast<int>(c);
      nr.minus = other;
      nr.delta1 = m.lambda1 / p.lambda1 - 1;
      nr.delta2 = m.lambda2 / p.lambda2 - 1;
      // Smallest rotation taking one frame to the other, up to eigenvector sign.
      const double cosphi = std::min(1.0, std::abs(p.r1.dot(m.r1)));
      const double phi = std::acos(cosphi);
      nr.rotation_deviation = 2 * std::sin(phi / 2) * std::sqrt(p.lambda1 / p.lambda2);
      report.pairs.push_back(nr);
    }
  return report;
}

double RegularityReport::max_mapped_aspect_ratio() const {
  double m = 0;
  for (const auto& c : cells) m = std::max(m, c.mapped_aspect_ratio);
  return m;
}

double RegularityReport::max_abs_delta() const {
  double m = 0;
  for (const auto& p : pairs) m = std::max({m, std::abs(p.delta1), std::abs(p.delta2)});
  return m;
}

double RegularityReport::max_rotation_deviation() const {
  double m = 0;
  for (const auto& p : pairs) m = std::max(m, p.rotation_deviation);
  return m;
}

}  // namespace avem
