#include "avem/recovery.hpp"

namespace avem {

std::vector<Point2d> zz_vertex_average(const Mesh& mesh, const ProjectedSolution& proj) {
  std::vector<Point2d> sum(mesh.num_vertices(), Point2d::Zero());
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const int ci = static_cast<int>(c);
    const double area = mesh.polygon(ci).area();
    for (int v : mesh.cell(ci)) {
      sum[v] += area * proj.gradient_of_projection(ci, mesh.vertex(v));
      weight[v] += area;
    }
  }
  for (std::size_t v = 0; v < sum.size(); ++v)
    if (weight[v] > 0) sum[v] /= weight[v];
  return sum;
}

CellFit zz_cell_fit(const Mesh& mesh, const std::vector<Point2d>& vertex_values, int cell,
                    int order) {
  const auto poly = mesh.polygon(cell);
  const auto& loop = mesh.cell(cell);
  const int n = static_cast<int>(loop.size());
  Eigen::MatrixX2d rhs(n, 2);
  for (int i = 0; i < n; ++i) rhs.row(i) = vertex_values[loop[i]].transpose();

  for (int degree = order; degree >= 1; --degree) {
    const ScaledMonomials2d basis(poly, degree);
    if (n < basis.size()) continue;
    Eigen::MatrixXd V(n, basis.size());
    for (int i = 0; i < n; ++i) V.row(i) = basis.values(poly[i]).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    qr.setThreshold(1e-10);
    if (qr.rank() < basis.size()) continue;
    return {basis, qr.solve(rhs)};
  }
  const ScaledMonomials2d basis(poly, 0);
  return {basis, rhs.colwise().mean()};
}

SymMat2d cell_error_tensor(const Polygon2d& poly, const ProjectedSolution& proj, int cell,
                           const CellFit& fit) {
  const auto quad = polygon_quadrature(poly, 2 * proj.order);
  const Eigen::Vector3d t = quad.integrate([&](const Point2d& x) -> Eigen::Vector3d {
    const Point2d eta = proj.gradient_of_projection(cell, x) - fit(x);
    return {eta.x() * eta.x(), eta.x() * eta.y(), eta.y() * eta.y()};
  });
  return {t(0), t(1), t(2)};
}

SymMat2d g_tensor(const std::vector<int>& patch, const std::vector<SymMat2d>& cell_tensors) {
  SymMat2d g;
  for (int c : patch) {
    g.m11 += cell_tensors[c].m11;
    g.m12 += cell_tensors[c].m12;
    g.m22 += cell_tensors[c].m22;
  }
  return g;
}

Recovery recover(const Mesh& mesh, const ProjectedSolution& proj) {
  Recovery r;
  r.vertex_values = zz_vertex_average(mesh, proj);
  const std::size_t nc = mesh.num_cells();
  r.fits.reserve(nc);
  r.cell_tensors.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const int ci = static_cast<int>(c);
    r.fits.push_back(zz_cell_fit(mesh, r.vertex_values, ci, proj.order));
    r.cell_tensors.push_back(cell_error_tensor(mesh.polygon(ci), proj, ci, r.fits.back()));
  }
  const auto patches = cell_patches(mesh);
  r.g.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) r.g.push_back(g_tensor(patches[c], r.cell_tensors));
  return r;
}

}  // namespace avem
