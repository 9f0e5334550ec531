#pragma once

// Residual-type a posteriori estimators: the anisotropic estimator, its
// heuristic variant without the stabilisation scaling, and an isotropic one.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "avem/mesh.hpp"
#include "avem/recovery.hpp"
#include "avem/vem.hpp"

namespace avem {

enum class EstimatorKind { Theory, Heuristic, Isotropic };

std::string to_string(EstimatorKind kind);
/// "theory", "heur" or "iso"; throws InvalidConfig otherwise.
EstimatorKind parse_estimator(const std::string& name);

/// ||f_h + div Pi0_{k-1} grad u_h||_{L2(K)} for a constant f_h.
double residual_norm(const LocalElement& el, const Eigen::MatrixX2d& gradient_coeffs,
                     double f_mean);

/// ||[Pi0_{k-1} grad u_h . n]||_{L2(E)} across the segment p -> q.
double jump_norm(const ProjectedSolution& proj, int left, int right, const Point2d& p,
                 const Point2d& q);

struct StabilizationTerm {
  double sigma_tilde_sq;
  double sigma_sq;
  double m_factor;  ///< (lambda1 / lambda2)^(5/4)
};

StabilizationTerm stabilization_term(const LocalElement& el, const Eigen::VectorXd& local_dofs);

/// alpha^-1 (lambda1 r1.G r1 + lambda2 r2.G r2)^(1/2) with the spectral data of K.
double anisotropic_weight(const AnisotropyInfo2d& info, const SymMat2d& g);

struct IndicatorSet {
  EstimatorKind kind{EstimatorKind::Heuristic};

  // per cell
  std::vector<double> residual;  ///< ||R_K||
  std::vector<double> sigma_tilde_sq;
  std::vector<double> m_factor;
  std::vector<double> sigma_sq;
  std::vector<double> weight;  ///< w_K, NaN without recovery
  std::vector<double> eta_sq;  ///< ||R_K|| w_K
  std::vector<double> diameter;
  std::vector<double> oscillation;  ///< ||f - f_h||_{L2(K)}, diagnostic only
  std::vector<double> score;        ///< marking score for `kind`

  // per edge (interior and boundary; boundary entries are zero)
  std::vector<EdgeRecord> edges;
  std::vector<double> edge_length;
  std::vector<double> jump;   ///< ||J_E||
  std::vector<double> xi_sq;  ///< NaN without recovery

  // globals; the anisotropic ones are NaN without recovery
  double theory{0};
  double heuristic{0};
  double isotropic{0};

  double global(EstimatorKind k) const;

  /// Squared component sums of the driving kind: cell term, edge term,
  /// stabilisation term.
  double eta_sum{0};
  double xi_sum{0};
  double sigma_sum{0};
};

/// Evaluates every indicator. `recovery` may be null only for the isotropic
/// kind; otherwise MissingGTensor is thrown.
IndicatorSet estimate(const Discretization& disc, const ProjectedSolution& proj,
                      const Eigen::VectorXd& u, const ScalarField& f, EstimatorKind kind,
                      const Recovery* recovery);

/// One row per cell then one row per edge.
void write_indicator_csv(std::ostream& os, const IndicatorSet& ind);

}  // namespace avem
