#pragma once

// Zienkiewicz-Zhu recovery of the gradient of Pi0_k u_h and the patchwise
// error-gradient tensors built from it.

#include <vector>

#include "avem/geometry.hpp"
#include "avem/mesh.hpp"
#include "avem/vem.hpp"

namespace avem {

/// Area-weighted average over the incident cells of grad Pi0_k u_h|_K at
/// each vertex.
std::vector<Point2d> zz_vertex_average(const Mesh& mesh, const ProjectedSolution& proj);

/// Least-squares polynomial fit of recovered vertex values over one cell.
struct CellFit {
  ScaledMonomials2d basis;  ///< degree actually used (k, 1 or 0 after fallback)
  Eigen::MatrixX2d coeffs;

  Point2d operator()(const Point2d& x) const { return coeffs.transpose() * basis.values(x); }
};

/// Fits P_k (k = order) to the cell's vertex values. Rank-deficient fits drop
/// to P_1 and then to the mean.
CellFit zz_cell_fit(const Mesh& mesh, const std::vector<Point2d>& vertex_values, int cell,
                    int order);

struct Recovery {
  std::vector<Point2d> vertex_values;
  std::vector<CellFit> fits;
  /// int_K eta eta^T with eta = grad Pi0_k u_h - fit, per cell.
  std::vector<SymMat2d> cell_tensors;
  /// G_K: sum of cell_tensors over the vertex-neighbour patch of K.
  std::vector<SymMat2d> g;
};

/// int_K (g - fit)(g - fit)^T with g = grad Pi0_k u_h, quadrature of degree 2k.
SymMat2d cell_error_tensor(const Polygon2d& poly, const ProjectedSolution& proj, int cell,
                           const CellFit& fit);

/// G_K for one cell from precomputed cell tensors.
SymMat2d g_tensor(const std::vector<int>& patch, const std::vector<SymMat2d>& cell_tensors);

Recovery recover(const Mesh& mesh, const ProjectedSolution& proj);

}  // namespace avem
