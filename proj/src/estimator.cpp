#include "avem/estimator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "avem/errors.hpp"

namespace avem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kIsotropyTolerance = 1e-12;

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Theory: return "theory";
    case EstimatorKind::Heuristic: return "heur";
    case EstimatorKind::Isotropic: return "iso";
  }
  return "?";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "theory") return EstimatorKind::Theory;
  if (name == "heur") return EstimatorKind::Heuristic;
  if (name == "iso") return EstimatorKind::Isotropic;
  throw InvalidConfig("unknown estimator '" + name + "'");
}

double residual_norm(const LocalElement& el, const Eigen::MatrixX2d& gc, double f_mean) {
  double r = f_mean;
  // the divergence of a linear field in scaled monomials is constant
  if (el.order == 2) r += (gc(1, 0) + gc(2, 1)) / el.monomials.scale();
  return std::abs(r) * std::sqrt(el.polygon.area());
}

double jump_norm(const ProjectedSolution& proj, int left, int right, const Point2d& p,
                 const Point2d& q) {
  if (left < 0 || right < 0) return 0.0;
  const Point2d d = q - p;
  const double len = d.norm();
  const Point2d n(d.y() / len, -d.x() / len);
  // two-point Gauss rule: the squared jump has degree <= 2
  const double s = 0.5 / std::sqrt(3.0);
  double sum = 0;
  for (double t : {0.5 - s, 0.5 + s}) {
    const Point2d x = p + t * d;
    const double j = (proj.projected_gradient(left, x) - proj.projected_gradient(right, x)).dot(n);
    sum += 0.5 * j * j;
  }
  return std::sqrt(sum * len);
}

StabilizationTerm stabilization_term(const LocalElement& el, const Eigen::VectorXd& dofs) {
  const Eigen::VectorXd w = dofs - el.pi_zero_dofs() * dofs;
  const auto info = anisotropy_map(el.polygon);
  StabilizationTerm s;
  s.sigma_tilde_sq = w.squaredNorm();
  // roundoff keeps lambda1/lambda2 a few ulps above 1 on squares
  double ratio = info.lambda1 / info.lambda2;
  if (ratio - 1 <= kIsotropyTolerance) ratio = 1;
  s.m_factor = std::pow(ratio, 1.25);
  s.sigma_sq = s.m_factor * s.m_factor * s.sigma_tilde_sq;
  return s;
}

double anisotropic_weight(const AnisotropyInfo2d& info, const SymMat2d& g) {
  const Mat2d G = g.dense();
  const double q = info.lambda1 * info.r1.dot(G * info.r1) + info.lambda2 * info.r2.dot(G * info.r2);
  return std::sqrt(std::max(q, 0.0)) / info.alpha;
}

double IndicatorSet::global(EstimatorKind k) const {
  switch (k) {
    case EstimatorKind::Theory: return theory;
    case EstimatorKind::Heuristic: return heuristic;
    case EstimatorKind::Isotropic: return isotropic;
  }
  return kNaN;
}

IndicatorSet estimate(const Discretization& disc, const ProjectedSolution& proj,
                      const Eigen::VectorXd& u, const ScalarField& f, EstimatorKind kind,
                      const Recovery* recovery) {
  if (!recovery && kind != EstimatorKind::Isotropic)
    throw MissingGTensor("anisotropic estimator requested without gradient recovery");
  const Mesh& mesh = disc.mesh();
  const auto nc = static_cast<int>(disc.num_cells());
  IndicatorSet ind;
  ind.kind = kind;
  ind.residual.resize(nc);
  ind.sigma_tilde_sq.resize(nc);
  ind.m_factor.resize(nc);
  ind.sigma_sq.resize(nc);
  ind.weight.assign(nc, kNaN);
  ind.eta_sq.assign(nc, kNaN);
  ind.diameter.resize(nc);
  ind.oscillation.resize(nc);
  ind.score.assign(nc, 0.0);

  std::vector<double> area(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& el = disc.element(c);
    area[c] = el.polygon.area();
    const auto quad = polygon_quadrature(el.polygon, 6);
    const double fm = quad.integrate([&](const Point2d& x) { return f(x); }) / area[c];
    ind.oscillation[c] = std::sqrt(quad.integrate([&](const Point2d& x) {
      const double d = f(x) - fm;
      return d * d;
    }));
    ind.residual[c] = residual_norm(el, proj.gradients[c], fm);
    const auto st = stabilization_term(el, disc.gather(c, u));
    ind.sigma_tilde_sq[c] = st.sigma_tilde_sq;
    ind.m_factor[c] = st.m_factor;
    ind.sigma_sq[c] = st.sigma_sq;
    ind.diameter[c] = el.polygon.diameter();
    if (recovery) {
      ind.weight[c] = anisotropic_weight(anisotropy_map(el.polygon), recovery->g[c]);
      ind.eta_sq[c] = ind.residual[c] * ind.weight[c];
    }
  }

  ind.edges = mesh.edges();
  const auto ne = ind.edges.size();
  ind.edge_length.resize(ne);
  ind.jump.resize(ne);
  ind.xi_sq.assign(ne, recovery ? 0.0 : kNaN);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& r = ind.edges[e];
    const Point2d p = mesh.vertex(r.a), q = mesh.vertex(r.b);
    ind.edge_length[e] = (q - p).norm();
    ind.jump[e] = jump_norm(proj, r.left, r.right, p, q);
    if (recovery && !r.boundary()) {
      double w = 0;
      for (int c : {r.left, r.right})
        w = std::max(w, ind.weight[c] * std::sqrt(ind.edge_length[e] / area[c]));
      ind.xi_sq[e] = ind.jump[e] * w;
    }
  }

  double s_eta = 0, s_xi = 0, s_sig = 0, s_sigt = 0, s_iso_r = 0, s_iso_j = 0;
  for (int c = 0; c < nc; ++c) {
    if (recovery) s_eta += ind.eta_sq[c];
    s_sig += ind.sigma_sq[c];
    s_sigt += ind.sigma_tilde_sq[c];
    s_iso_r += std::pow(ind.diameter[c] * ind.residual[c], 2);
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (recovery) s_xi += ind.xi_sq[e];
    s_iso_j += ind.edge_length[e] * ind.jump[e] * ind.jump[e];
  }
  ind.isotropic = std::sqrt(s_iso_r + s_iso_j + s_sigt);
  ind.theory = recovery ? std::sqrt(s_eta + s_xi + s_sig) : kNaN;
  ind.heuristic = recovery ? std::sqrt(s_eta + s_xi + s_sigt) : kNaN;

  // Marking scores: cell terms plus half of each incident edge term.
  const bool iso = kind == EstimatorKind::Isotropic;
  for (int c = 0; c < nc; ++c) {
    if (iso)
      ind.score[c] = std::pow(ind.diameter[c] * ind.residual[c], 2) + ind.sigma_tilde_sq[c];
    else
      ind.score[c] = ind.eta_sq[c] + (kind == EstimatorKind::Theory ? ind.sigma_sq[c]
                                                                    : ind.sigma_tilde_sq[c]);
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& r = ind.edges[e];
    if (r.boundary()) continue;
    const double t = iso ? ind.edge_length[e] * ind.jump[e] * ind.jump[e] : ind.xi_sq[e];
    ind.score[r.left] += 0.5 * t;
    ind.score[r.right] += 0.5 * t;
  }

  if (iso) {
    ind.eta_sum = s_iso_r;
    ind.xi_sum = s_iso_j;
    ind.sigma_sum = s_sigt;
  } else {
    ind.eta_sum = s_eta;
    ind.xi_sum = s_xi;
    ind.sigma_sum = kind == EstimatorKind::Theory ? s_sig : s_sigt;
  }
  return ind;
}

void write_indicator_csv(std::ostream& os, const IndicatorSet& ind) {
  os.precision(17);
  os << "type,id,a,b,residual,eta_sq,sigma_tilde_sq,sigma_sq,m_factor,weight,score,"
        "oscillation,length,jump,xi_sq\n";
  for (std::size_t c = 0; c < ind.residual.size(); ++c)
    os << "cell," << c << ",,," << ind.residual[c] << ',' << ind.eta_sq[c] << ','
       << ind.sigma_tilde_sq[c] << ',' << ind.sigma_sq[c] << ',' << ind.m_factor[c] << ','
       << ind.weight[c] << ',' << ind.score[c] << ',' << ind.oscillation[c] << ",,,\n";
  for (std::size_t e = 0; e < ind.edges.size(); ++e)
    os << "edge," << e << ',' << ind.edges[e].a << ',' << ind.edges[e].b << ",,,,,,,,,"
       << ind.edge_length[e] << ',' << ind.jump[e] << ',' << ind.xi_sq[e] << '\n';
}

}  // namespace avem
