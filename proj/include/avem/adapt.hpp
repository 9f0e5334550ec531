#pragma once

// Marking, anisotropic refinement and the SOLVE -> ESTIMATE -> MARK -> REFINE loop.

#include <functional>
#include <string>
#include <vector>

#include "avem/cases.hpp"
#include "avem/estimator.hpp"
#include "avem/mesh.hpp"
#include "avem/recovery.hpp"
#include "avem/vem.hpp"

namespace avem {

struct AdaptConfig {
  double theta{0.5};
  double tol{1e-2};
  int max_iters{60};
  int max_dofs{1000000};
  EstimatorKind kind{EstimatorKind::Heuristic};
  int order{1};
  int grid_n{4};

  /// Throws InvalidConfig on out-of-range values.
  void validate() const;
};

/// Smallest set of cells, taken greedily by descending score (ties by id),
/// whose scores reach theta times the total. Empty when every score is zero.
std::vector<int> dorfler_mark(const std::vector<double>& scores, double theta);

enum class CutSource { G, K };

struct CutDecision {
  Point2d direction;  ///< direction of the cut line
  CutSource source;
};

/// Direction rule of the REFINE step: cut along r_{G,2} when the error
/// tensor is at least as anisotropic as the cell, along r_{K,2} otherwise.
/// The isotropic kind and a vanishing G always use r_{K,2}.
CutDecision cut_direction(const Polygon2d& poly, const SymMat2d& g, EstimatorKind kind);

/// Cuts `cell` through its barycentre along `cut_direction`.
SplitResult refine_cell(Mesh& mesh, int cell, const SymMat2d& g, EstimatorKind kind,
                        CutDecision* decision = nullptr);

struct IterationRecord {
  int iter{0};
  int ndof{0};
  double estimator{0};  ///< global value of the driving kind
  double err{0};        ///< || grad(u - Pi0_k u_h) ||
  double eta_sum{0};
  double xi_sum{0};
  double sigma_sum{0};
  int n_cells{0};
  int cut_G_count{0};
  int cut_K_count{0};
  double theory{0};
  double heuristic{0};
  double isotropic{0};
  double wall_seconds{0};
};

/// What the loop knows at the end of ESTIMATE/MARK, before REFINE mutates
/// the mesh. Cut codes per cell: -1 unmarked, 0 cut along G, 1 cut along K;
/// cut directions are zero for unmarked cells.
struct IterationState {
  const Discretization& disc;
  const Eigen::VectorXd& u;
  const ProjectedSolution& proj;
  const Recovery& recovery;
  const IndicatorSet& indicators;
  const std::vector<int>& marked;
  const std::vector<int>& cut_codes;
  const std::vector<Point2d>& cut_directions;
  const IterationRecord& record;
};

using IterationObserver = std::function<void(const IterationState&)>;

struct RunLog {
  std::vector<IterationRecord> rows;
  std::string stop_reason;
  Mesh final_mesh;
};

RunLog adaptive_loop(const AdaptConfig& config, const TestCase& tc,
                     const IterationObserver& observer = {});

}  // namespace avem
