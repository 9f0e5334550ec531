#include "avem/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "avem/errors.hpp"

namespace avem {

namespace {

// Ratios equal up to this relative amount count as a tie (G wins).
constexpr double kRatioTieTolerance = 1e-12;

}  // namespace

void AdaptConfig::validate() const {
  if (!(theta > 0 && theta < 1)) throw InvalidConfig("theta must lie in (0, 1)");
  if (!(tol > 0)) throw InvalidConfig("tol must be positive");
  if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
  if (max_dofs < 1) throw InvalidConfig("max_dofs must be >= 1");
  if (order != 1 && order != 2) throw InvalidConfig("order must be 1 or 2");
  if (grid_n < 1) throw InvalidConfig("grid_n must be >= 1");
}

std::vector<int> dorfler_mark(const std::vector<double>& scores, double theta) {
  if (!(theta > 0 && theta <= 1)) throw InvalidConfig("theta must lie in (0, 1]");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  std::vector<int> marked;
  if (!(total > 0)) return marked;
  double acc = 0;
  for (int c : order) {
    if (!(scores[c] > 0) || acc >= theta * total) break;
    marked.push_back(c);
    acc += scores[c];
  }
  return marked;
}

CutDecision cut_direction(const Polygon2d& poly, const SymMat2d& g, EstimatorKind kind) {
  const auto k = eig_sym2(covariance(poly));
  const CutDecision along_k{k.r2, CutSource::K};
  if (kind == EstimatorKind::Isotropic) return along_k;
  const auto e = symmetric_eigen(g);
  if (!(e.lambda1 > 0)) return along_k;
  const double ratio_g = e.lambda2 > 0 ? e.lambda1 / e.lambda2
                                       : std::numeric_limits<double>::infinity();
  const double ratio_k = k.lambda1 / k.lambda2;
  if (ratio_g >= ratio_k * (1 - kRatioTieTolerance)) return {e.r2, CutSource::G};
  return along_k;
}

SplitResult refine_cell(Mesh& mesh, int cell, const SymMat2d& g, EstimatorKind kind,
                        CutDecision* decision) {
  const auto poly = mesh.polygon(cell);
  const auto d = cut_direction(poly, g, kind);
  if (decision) *decision = d;
  return mesh.split_cell(cell, poly.centroid(), d.direction);
}

RunLog adaptive_loop(const AdaptConfig& config, const TestCase& tc,
                     const IterationObserver& observer) {
  config.validate();
  RunLog log;
  Mesh mesh = initial_mesh(config.grid_n);
  const ScalarField lifting = tc.homogeneous ? ScalarField() : tc.u;

  for (int iter = 0;; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const Discretization disc(mesh, config.order);
    Eigen::VectorXd u;
    try {
      u = solve(assemble(disc, tc.f, lifting));
    } catch (const SolveFailed& e) {
      throw SolveFailed("iteration " + std::to_string(iter) + ": " + e.what(), e.residual());
    }
    const auto proj = project_solution(disc, u);
    const auto rec = recover(mesh, proj);
    const auto ind = estimate(disc, proj, u, tc.f, config.kind, &rec);

    IterationRecord row;
    row.iter = iter;
    row.ndof = disc.dofs().num_dofs();
    row.err = energy_error(disc, proj, tc.grad_u);
    row.estimator = ind.global(config.kind);
    row.eta_sum = ind.eta_sum;
    row.xi_sum = ind.xi_sum;
    row.sigma_sum = ind.sigma_sum;
    row.n_cells = static_cast<int>(mesh.num_cells());
    row.theory = ind.theory;
    row.heuristic = ind.heuristic;
    row.isotropic = ind.isotropic;

    std::vector<int> marked;
    if (row.err <= config.tol)
      log.stop_reason = "tolerance";
    else if (row.ndof >= config.max_dofs)
      log.stop_reason = "max_dofs";
    else if (iter + 1 >= config.max_iters)
      log.stop_reason = "max_iters";
    else {
      marked = dorfler_mark(ind.score, config.theta);
      if (marked.empty()) log.stop_reason = "no marked cells";
    }
    std::sort(marked.begin(), marked.end());

    // Decide every cut on the unrefined mesh; collinear vertices that earlier
    // cuts add to a neighbour change neither its barycentre nor its moments.
    std::vector<int> codes(mesh.num_cells(), -1);
    std::vector<Point2d> directions(mesh.num_cells(), Point2d::Zero());
    std::vector<CutDecision> decisions;
    decisions.reserve(marked.size());
    for (int c : marked) {
      decisions.push_back(cut_direction(mesh.polygon(c), rec.g[c], config.kind));
      const bool along_g = decisions.back().source == CutSource::G;
      codes[c] = along_g ? 0 : 1;
      directions[c] = decisions.back().direction;
      ++(along_g ? row.cut_G_count : row.cut_K_count);
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.rows.push_back(row);
    if (observer) observer({disc, u, proj, rec, ind, marked, codes, directions, log.rows.back()});
    if (marked.empty()) break;

    for (std::size_t i = 0; i < marked.size(); ++i) {
      const int c = marked[i];
      try {
        mesh.split_cell(c, mesh.polygon(c).centroid(), decisions[i].direction);
      } catch (const ClipFailed& e) {
        throw ClipFailed("iteration " + std::to_string(iter) + ", cell " + std::to_string(c) +
                         ": " + e.what());
      }
    }
  }
  log.final_mesh = std::move(mesh);
  return log;
}

}  // namespace avem
