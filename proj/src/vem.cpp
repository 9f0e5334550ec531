#include "avem/vem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#ifdef AVEM_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "avem/errors.hpp"

namespace avem {

namespace {

void check_order(int order) {
  if (order != 1 && order != 2)
    throw UnsupportedDegree("VEM order " + std::to_string(order) + " not in {1, 2}");
}

// Reciprocal condition estimate of an SPD-like matrix after symmetric
// diagonal scaling, so that the badly scaled monomials of thin cells do not
// count against an otherwise healthy element.
double scaled_rcond(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd d = m.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd s = d.asDiagonal() * m * d.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) / sv(0);
}

constexpr double kMinRcond = 1e-13;
constexpr int kMeanDegree = 6;

}  // namespace

DofMap build_dofmap(const Mesh& mesh, int order) {
  check_order(order);
  DofMap map;
  map.order = order;
  map.num_vertices = static_cast<int>(mesh.num_vertices());
  map.num_cells = static_cast<int>(mesh.num_cells());
  const auto vb = mesh.boundary_vertices();
  if (order == 1) {
    map.boundary = vb;
    map.cell_dofs = mesh.cells();
    return map;
  }

  map.edges = mesh.edges();
  map.num_edges = static_cast<int>(map.edges.size());
  std::map<std::pair<int, int>, int> index;
  for (int e = 0; e < map.num_edges; ++e) {
    const auto& r = map.edges[e];
    index[{std::min(r.a, r.b), std::max(r.a, r.b)}] = e;
  }
  map.boundary.assign(map.num_vertices + map.num_edges + map.num_cells, false);
  std::copy(vb.begin(), vb.end(), map.boundary.begin());
  for (int e = 0; e < map.num_edges; ++e) map.boundary[map.edge_dof(e)] = map.edges[e].boundary();

  map.cell_dofs.resize(map.num_cells);
  for (int c = 0; c < map.num_cells; ++c) {
    const auto& loop = mesh.cell(c);
    const std::size_t n = loop.size();
    auto& dofs = map.cell_dofs[c];
    dofs.assign(loop.begin(), loop.end());
    for (std::size_t i = 0; i < n; ++i) {
      const int a = loop[i], b = loop[(i + 1) % n];
      dofs.push_back(map.edge_dof(index.at({std::min(a, b), std::max(a, b)})));
    }
    dofs.push_back(map.cell_dof(c));
  }
  return map;
}

LocalElement local_projectors(const Polygon2d& poly, int order) {
  check_order(order);
  LocalElement el;
  el.order = order;
  el.polygon = poly;
  el.monomials = ScaledMonomials2d(poly, order);
  const auto& m = el.monomials;
  const int n = static_cast<int>(poly.size());
  const int nk = m.size();
  const int ndof = order == 1 ? n : 2 * n + 1;
  const int moment = 2 * n;  // only meaningful for order 2
  const double area = poly.area();
  const double h = m.scale();

  const auto quad = polygon_quadrature(poly, 2 * order);

  el.D.resize(ndof, nk);
  for (int i = 0; i < n; ++i) el.D.row(i) = m.values(poly[i]).transpose();
  if (order == 2) {
    for (int i = 0; i < n; ++i) el.D.row(n + i) = m.values(poly.edge_midpoint(i)).transpose();
    el.D.row(moment) = quad.integrate([&](const Point2d& x) -> Eigen::VectorXd {
                                       return m.values(x);
                                     }).transpose() /
                       area;
  }

  // B: boundary terms of int grad m . grad phi, plus the interior Laplacian
  // moment for order 2. Row 0 fixes the constant part.
  el.B = Eigen::MatrixXd::Zero(nk, ndof);
  if (order == 1) {
    el.B.row(0).setConstant(1.0 / n);
    for (int i = 0; i < n; ++i) {
      const int prev = (i + n - 1) % n;
      const Point2d w = 0.5 * (poly.edge_length(prev) * poly.edge_normal(prev) +
                               poly.edge_length(i) * poly.edge_normal(i));
      const auto g = m.gradients(poly[i]);
      for (int a = 1; a < nk; ++a) el.B(a, i) = g.col(a).dot(w);
    }
  } else {
    el.B(0, moment) = 1.0;
    for (int a = 1; a < nk; ++a) el.B(a, moment) = -m.laplacian(a) * area;
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      const Point2d nl = poly.edge_length(i) * poly.edge_normal(i);
      const auto gi = m.gradients(poly[i]);
      const auto gj = m.gradients(poly[j]);
      const auto gm = m.gradients(poly.edge_midpoint(i));
      for (int a = 1; a < nk; ++a) {
        el.B(a, i) += gi.col(a).dot(nl) / 6;
        el.B(a, j) += gj.col(a).dot(nl) / 6;
        el.B(a, n + i) += 4 * gm.col(a).dot(nl) / 6;
      }
    }
  }
  el.G = el.B * el.D;
  if (scaled_rcond(el.G) < kMinRcond)
    throw IllConditionedElement("projection matrix G is numerically singular");
  el.pi_nabla = el.G.partialPivLu().solve(el.B);

  el.H = quad.integrate([&](const Point2d& x) -> Eigen::MatrixXd {
    const auto v = m.values(x);
    return v * v.transpose();
  });
  if (scaled_rcond(el.H) < kMinRcond)
    throw IllConditionedElement("monomial mass matrix is numerically singular");

  // L2 projection: moments of degree <= k-2 come from the DOFs, the rest
  // from the elliptic projection.
  Eigen::MatrixXd C = el.H * el.pi_nabla;
  if (order == 2) {
    C.row(0).setZero();
    C(0, moment) = area;
  }
  const auto Hldlt = el.H.ldlt();
  el.pi_zero = Hldlt.solve(C);

  // Gradient projections onto P_{k-1}:
  // int d_x phi m = -int phi d_x m + int_dK phi m n_x.
  const int nk1 = ScaledMonomials2d::dimension(order - 1);
  const auto m1 = el.gradient_monomials();
  std::array<Eigen::MatrixXd, 2> E{Eigen::MatrixXd::Zero(nk1, ndof),
                                   Eigen::MatrixXd::Zero(nk1, ndof)};
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Point2d nl = poly.edge_length(i) * poly.edge_normal(i);
    if (order == 1) {
      for (int d = 0; d < 2; ++d) {
        E[d](0, i) += 0.5 * nl(d);
        E[d](0, j) += 0.5 * nl(d);
      }
    } else {
      const auto vi = m1.values(poly[i]);
      const auto vj = m1.values(poly[j]);
      const auto vm = m1.values(poly.edge_midpoint(i));
      for (int d = 0; d < 2; ++d) {
        E[d].col(i) += vi * nl(d) / 6;
        E[d].col(j) += vj * nl(d) / 6;
        E[d].col(n + i) += 4 * vm * nl(d) / 6;
      }
    }
  }
  if (order == 2) {
    E[0](1, moment) -= area / h;
    E[1](2, moment) -= area / h;
  }
  const Eigen::MatrixXd H1 = el.H.topLeftCorner(nk1, nk1);
  const auto H1ldlt = H1.ldlt();
  el.consistency = Eigen::MatrixXd::Zero(ndof, ndof);
  for (int d = 0; d < 2; ++d) {
    el.grad_zero[d] = H1ldlt.solve(E[d]);
    el.consistency += E[d].transpose() * el.grad_zero[d];
  }
  return el;
}

void local_stiffness(LocalElement& el) {
  const int ndof = el.num_dofs();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(ndof, ndof) - el.pi_zero_dofs();
  el.stabilization = r.transpose() * r;
  el.stiffness = el.consistency + el.stabilization;
  el.stiffness = 0.5 * (el.stiffness + el.stiffness.transpose()).eval();
}

double cell_mean(const Polygon2d& poly, const ScalarField& f) {
  const auto quad = polygon_quadrature(poly, kMeanDegree);
  return quad.integrate([&](const Point2d& x) { return f(x); }) / poly.area();
}

Eigen::VectorXd local_load(const LocalElement& el, double f_mean) {
  const int n = static_cast<int>(el.polygon.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(el.num_dofs());
  if (el.order == 1)
    b.setConstant(f_mean * el.polygon.area() / n);
  else
    b(2 * n) = f_mean * el.polygon.area();
  return b;
}

Eigen::VectorXd local_load(const LocalElement& el, const ScalarField& f) {
  return local_load(el, cell_mean(el.polygon, f));
}

Eigen::VectorXd local_interpolant(const LocalElement& el, const ScalarField& u) {
  const auto& poly = el.polygon;
  const int n = static_cast<int>(poly.size());
  Eigen::VectorXd v(el.num_dofs());
  for (int i = 0; i < n; ++i) v(i) = u(poly[i]);
  if (el.order == 2) {
    for (int i = 0; i < n; ++i) v(n + i) = u(poly.edge_midpoint(i));
    v(2 * n) = cell_mean(poly, u);
  }
  return v;
}

Discretization::Discretization(Mesh mesh, int order)
    : mesh_(std::move(mesh)), dofs_(build_dofmap(mesh_, order)) {
  elements_.reserve(mesh_.num_cells());
  for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
    try {
      elements_.push_back(local_element(mesh_.polygon(static_cast<int>(c)), order));
    } catch (const IllConditionedElement& e) {
      throw IllConditionedElement("cell " + std::to_string(c) + ": " + e.what());
    }
  }
}

Eigen::VectorXd Discretization::gather(int c, const Eigen::VectorXd& global) const {
  const auto& ids = dofs_.cell_dofs[c];
  Eigen::VectorXd v(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) v(i) = global(ids[i]);
  return v;
}

Eigen::VectorXd Discretization::interpolate(const ScalarField& u) const {
  Eigen::VectorXd g(dofs_.num_dofs());
  for (std::size_t c = 0; c < elements_.size(); ++c) {
    const auto local = local_interpolant(elements_[c], u);
    const auto& ids = dofs_.cell_dofs[c];
    for (std::size_t i = 0; i < ids.size(); ++i) g(ids[i]) = local(i);
  }
  return g;
}

LinearSystem assemble(const Discretization& disc, const ScalarField& f,
                      const ScalarField& dirichlet) {
  const auto& dofs = disc.dofs();
  const int N = dofs.num_dofs();
  LinearSystem sys;
  std::vector<int> slot(N, -1);
  for (int i = 0; i < N; ++i)
    if (!dofs.boundary[i]) {
      slot[i] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }

  sys.lifting = Eigen::VectorXd::Zero(N);
  if (dirichlet) {
    const auto g = disc.interpolate(dirichlet);
    for (int i = 0; i < N; ++i)
      if (dofs.boundary[i]) sys.lifting(i) = g(i);
  }

  const int nf = static_cast<int>(sys.free_dofs.size());
  sys.rhs = Eigen::VectorXd::Zero(nf);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t c = 0; c < disc.num_cells(); ++c) {
    const auto& el = disc.element(static_cast<int>(c));
    const auto& ids = dofs.cell_dofs[c];
    const auto b = local_load(el, f);
    const auto& A = el.stiffness;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int si = slot[ids[i]];
      if (si < 0) continue;
      sys.rhs(si) += b(i);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        const int sj = slot[ids[j]];
        if (sj >= 0)
          triplets.emplace_back(si, sj, A(i, j));
        else
          sys.rhs(si) -= A(i, j) * sys.lifting(ids[j]);
      }
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

namespace {

// b - A x accumulated in extended precision. On fine meshes the rows of A x
// cancel down to entries of size h^2 f, and a double-precision residual
// cannot resolve 1e-12 relative any more.
Eigen::VectorXd true_residual(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& x) {
  std::vector<long double> r(b.data(), b.data() + b.size());
  for (int j = 0; j < a.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
      r[it.row()] -= static_cast<long double>(it.value()) * x(j);
  Eigen::VectorXd out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) out(i) = static_cast<double>(r[i]);
  return out;
}

}  // namespace

Eigen::VectorXd solve(const LinearSystem& sys, double tol, SolveStats* stats, SolverKind kind) {
  Eigen::VectorXd full = sys.lifting;
  const int nf = static_cast<int>(sys.free_dofs.size());
  SolveStats local;
  const double bnorm = sys.rhs.norm();
  if (nf > 0 && bnorm > 0) {
    using Matrix = Eigen::SparseMatrix<double>;
#ifdef AVEM_HAVE_CHOLMOD
    Eigen::CholmodSupernodalLLT<Matrix> chol;
#else
    Eigen::SimplicialLDLT<Matrix> chol;
#endif
    Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    // One correction solve of A d = r to relative accuracy `rel`.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> correct;
    if (kind == SolverKind::Direct) {
      chol.compute(sys.matrix);
      if (chol.info() != Eigen::Success)
        throw SolveFailed("stiffness matrix is not positive definite", 1.0);
      correct = [&](const Eigen::VectorXd& r, double) -> Eigen::VectorXd {
        ++local.iterations;
        return chol.solve(r);
      };
    } else {
      cg.setMaxIterations(std::max(1000, 20 * nf));
      cg.compute(sys.matrix);
      correct = [&](const Eigen::VectorXd& r, double rel) -> Eigen::VectorXd {
        cg.setTolerance(rel);
        Eigen::VectorXd d = cg.solve(r);
        local.iterations += static_cast<int>(cg.iterations());
        return d;
      };
    }

    Eigen::VectorXd x = correct(sys.rhs, tol);
    Eigen::VectorXd r = true_residual(sys.matrix, sys.rhs, x);
    double res = r.norm() / bnorm;
    // Iterative refinement on the accurately computed residual, until the
    // tolerance is met or x stops improving at its rounding floor.
    for (int round = 0; round < 8 && res > tol; ++round) {
      const Eigen::VectorXd xn = x + correct(r, std::clamp(0.1 * tol / res, 1e-14, 0.5));
      const Eigen::VectorXd rn = true_residual(sys.matrix, sys.rhs, xn);
      const double resn = rn.norm() / bnorm;
      if (!(resn < res)) break;
      x = xn, r = rn, res = resn;
    }
    const double floor = std::numeric_limits<double>::epsilon() *
                         (sys.matrix.cwiseAbs() * x.cwiseAbs()).norm() / bnorm;
    local.residual = res;
    local.round_off = floor;
    if (!(res <= std::max(tol, 8 * floor)))
      throw SolveFailed(kind == SolverKind::Direct ? "refinement did not reach the tolerance"
                                                   : "conjugate gradients did not converge",
                        res);
    for (int i = 0; i < nf; ++i) full(sys.free_dofs[i]) = x(i);
  }
  if (stats) *stats = local;
  return full;
}

Point2d ProjectedSolution::projected_gradient(int c, const Point2d& x) const {
  const ScaledMonomials2d m1(monomials[c].center(), monomials[c].scale(), order - 1);
  return gradients[c].transpose() * m1.values(x);
}

ProjectedSolution project_solution(const Discretization& disc, const Eigen::VectorXd& u) {
  ProjectedSolution p;
  p.order = disc.order();
  const auto nc = disc.num_cells();
  p.monomials.reserve(nc);
  p.values.reserve(nc);
  p.gradients.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& el = disc.element(static_cast<int>(c));
    const auto local = disc.gather(static_cast<int>(c), u);
    p.monomials.push_back(el.monomials);
    p.values.push_back(el.pi_zero * local);
    Eigen::MatrixX2d g(el.grad_zero[0].rows(), 2);
    g.col(0) = el.grad_zero[0] * local;
    g.col(1) = el.grad_zero[1] * local;
    p.gradients.push_back(std::move(g));
  }
  return p;
}

double energy_error(const Discretization& disc, const ProjectedSolution& proj,
                    const VectorField& grad_u) {
  double total = 0;
  for (std::size_t c = 0; c < disc.num_cells(); ++c) {
    const int ci = static_cast<int>(c);
    const auto quad = polygon_quadrature(disc.element(ci).polygon, 2 * disc.order() + 2);
    total += quad.integrate([&](const Point2d& x) {
      return (grad_u(x) - proj.gradient_of_projection(ci, x)).squaredNorm();
    });
  }
  return std::sqrt(total);
}

}  // namespace avem
