#pragma once

// Conforming virtual elements of order 1 and 2 for -lap u = f.

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "avem/geometry.hpp"
#include "avem/mesh.hpp"
#include "avem/quadrature.hpp"

namespace avem {

using ScalarField = std::function<double(const Point2d&)>;
using VectorField = std::function<Point2d(const Point2d&)>;

/// Local-to-global numbering.
///
/// Order 1: one value per vertex. Order 2: vertex values, then one
/// edge-midpoint value per edge, then one cell mean per cell. Locally a cell
/// lists its vertices in loop order, then edges i -> i+1, then its mean.
struct DofMap {
  int order{1};
  int num_vertices{0};
  int num_edges{0};
  int num_cells{0};
  std::vector<std::vector<int>> cell_dofs;
  std::vector<bool> boundary;
  std::vector<EdgeRecord> edges;

  int num_dofs() const { return static_cast<int>(boundary.size()); }
  int edge_dof(int e) const { return num_vertices + e; }
  int cell_dof(int c) const { return num_vertices + num_edges + c; }
};

DofMap build_dofmap(const Mesh& mesh, int order);

/// Projection and stiffness data of one element.
///
/// Coefficient matrices act on local DOF vectors and return coefficients in
/// the cell's scaled monomial basis.
struct LocalElement {
  int order{1};
  Polygon2d polygon;
  ScaledMonomials2d monomials;  ///< degree `order`
  Eigen::MatrixXd D;            ///< DOFs of each monomial (ndof x nk)
  Eigen::MatrixXd B;            ///< right-hand side of the elliptic projection
  Eigen::MatrixXd G;            ///< B * D
  Eigen::MatrixXd H;            ///< monomial mass matrix
  Eigen::MatrixXd pi_nabla;     ///< elliptic projector onto P_k
  Eigen::MatrixXd pi_zero;      ///< L2 projector onto P_k
  /// L2 projection of each gradient component onto P_{k-1}.
  std::array<Eigen::MatrixXd, 2> grad_zero;
  Eigen::MatrixXd consistency;
  Eigen::MatrixXd stabilization;
  Eigen::MatrixXd stiffness;

  int num_dofs() const { return static_cast<int>(D.rows()); }
  /// pi_zero expressed back on the DOFs (ndof x ndof).
  Eigen::MatrixXd pi_zero_dofs() const { return D * pi_zero; }
  /// Monomials of degree order-1 sharing this cell's centre and scale.
  ScaledMonomials2d gradient_monomials() const {
    return {monomials.center(), monomials.scale(), order - 1};
  }
};

/// Builds D, B, G, H and the projectors. Throws IllConditionedElement when G
/// or H cannot be inverted reliably.
LocalElement local_projectors(const Polygon2d& poly, int order);

/// Adds consistency |K|-weighted gradient projection term plus the
/// dofi-dofi stabilisation of (I - Pi0_k).
void local_stiffness(LocalElement& element);

inline LocalElement local_element(const Polygon2d& poly, int order) {
  auto e = local_projectors(poly, order);
  local_stiffness(e);
  return e;
}

/// Cell average of f by quadrature.
double cell_mean(const Polygon2d& poly, const ScalarField& f);

/// (f_h, v_h) with f_h the cell average of f.
Eigen::VectorXd local_load(const LocalElement& element, const ScalarField& f);
Eigen::VectorXd local_load(const LocalElement& element, double f_mean);

/// Local DOFs of a smooth function.
Eigen::VectorXd local_interpolant(const LocalElement& element, const ScalarField& u);

/// The per-cell elements and DOF map of a mesh.
class Discretization {
 public:
  Discretization(Mesh mesh, int order);

  const Mesh& mesh() const { return mesh_; }
  int order() const { return dofs_.order; }
  const DofMap& dofs() const { return dofs_; }
  const LocalElement& element(int c) const { return elements_[c]; }
  std::size_t num_cells() const { return elements_.size(); }

  Eigen::VectorXd gather(int c, const Eigen::VectorXd& global) const;
  Eigen::VectorXd interpolate(const ScalarField& u) const;

 private:
  Mesh mesh_;
  DofMap dofs_;
  std::vector<LocalElement> elements_;
};

/// Global system restricted to the free (non-Dirichlet) DOFs.
struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<int> free_dofs;
  /// Full-length vector carrying the Dirichlet values on boundary DOFs.
  Eigen::VectorXd lifting;
};

/// Assembles a_h(u, v) = (f_h, v). Boundary DOFs take the interpolant of
/// `dirichlet` when given, zero otherwise, and are eliminated.
LinearSystem assemble(const Discretization& disc, const ScalarField& f,
                      const ScalarField& dirichlet = nullptr);

enum class SolverKind { Direct, JacobiCG };

struct SolveStats {
  int iterations{0};     ///< CG iterations, or refinement sweeps for Direct
  double residual{0};    ///< ||b - A x|| / ||b||, accumulated in long double
  double round_off{0};   ///< eps || |A| |x| || / ||b||
};

/// Solves to relative residual <= tol, refining on an extended-precision
/// residual. When tol lies below what a double-precision x can represent,
/// the solve is accepted at 8 * round_off instead. Throws SolveFailed
/// otherwise. Returns the full DOF vector including boundary values.
Eigen::VectorXd solve(const LinearSystem& system, double tol = 1e-12,
                      SolveStats* stats = nullptr, SolverKind kind = SolverKind::Direct);

/// Elementwise polynomial images of a discrete solution.
struct ProjectedSolution {
  int order{1};
  std::vector<ScaledMonomials2d> monomials;
  /// Pi0_k u_h coefficients per cell.
  std::vector<Eigen::VectorXd> values;
  /// Pi0_{k-1} grad u_h coefficients per cell, one column per component.
  std::vector<Eigen::MatrixX2d> gradients;

  double value(int c, const Point2d& x) const { return monomials[c].values(x).dot(values[c]); }
  /// Gradient of Pi0_k u_h.
  Point2d gradient_of_projection(int c, const Point2d& x) const {
    return monomials[c].gradients(x) * values[c];
  }
  /// Pi0_{k-1} grad u_h.
  Point2d projected_gradient(int c, const Point2d& x) const;
};

ProjectedSolution project_solution(const Discretization& disc, const Eigen::VectorXd& u);

/// || grad(u - Pi0_k u_h) ||_{L2(Omega)} with quadrature of degree 2k+2.
double energy_error(const Discretization& disc, const ProjectedSolution& proj,
                    const VectorField& grad_u);

}  // namespace avem
