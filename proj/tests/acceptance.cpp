// Acceptance harness: one PASS/FAIL line per criterion.
//
// Exit status is 0 once every criterion has been evaluated, whatever the
// outcome; pass --strict to exit 1 when any criterion fails. An exception
// inside the harness always exits 2.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avem/adapt.hpp"
#include "avem/cases.hpp"
#include "avem/io.hpp"
#include "avem/recovery.hpp"
#include "test_util.hpp"

using namespace avem;
using avem::testing::GolubWelsch;
using avem::testing::rectangle;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

Mesh randomly_split(int n, int cuts, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> angle(0, std::numbers::pi);
  auto m = initial_mesh(n);
  for (int s = 0; s < cuts; ++s) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(m.num_cells()) - 1);
    const int c = pick(rng);
    const double t = angle(rng);
    m.split_cell(c, m.polygon(c).centroid(), Point2d(std::cos(t), std::sin(t)));
  }
  return m;
}

// Closed-form spectrum of [[a, b], [b, c]]: largest eigenvalue first.
struct Spectrum {
  double l1, l2;
  Point2d r1, r2;
};

Spectrum closed_form_eigen(double a, double b, double c) {
  const double mean = (a + c) / 2, rad = std::hypot((a - c) / 2, b);
  const double psi = 0.5 * std::atan2(2 * b, a - c);
  return {mean + rad, mean - rad, {std::cos(psi), std::sin(psi)}, {-std::sin(psi), std::cos(psi)}};
}

// Covariance of a triangle: (1/12) sum d_i d_i^T with d_i = p_i - centroid.
SymMat2d triangle_covariance(const Point2d& p, const Point2d& q, const Point2d& r) {
  const Point2d c = (p + q + r) / 3;
  SymMat2d s;
  for (const Point2d& v : {p, q, r}) {
    const Point2d d = v - c;
    s.m11 += d.x() * d.x() / 12;
    s.m12 += d.x() * d.y() / 12;
    s.m22 += d.y() * d.y() / 12;
  }
  return s;
}

// Shared case-1 run: heuristic-driven, order 1, default tolerance.
struct Case1Run {
  RunLog log;
  std::vector<double> identity_error;  // per iteration, relative
  double worst_area_err{0}, worst_cov_err{0};
  std::size_t cells_checked{0};
  std::optional<Mesh> snapshot;  // an adaptively refined mesh of moderate size
};

Case1Run run_case1() {
  Case1Run r;
  AdaptConfig cfg;
  cfg.kind = EstimatorKind::Heuristic;
  cfg.tol = 1e-2;
  const auto tc = case1();
  r.log = adaptive_loop(cfg, tc, [&](const IterationState& s) {
    const auto& mesh = s.disc.mesh();
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto poly = mesh.polygon(static_cast<int>(c));
      const auto info = anisotropy_map(poly);
      const auto mapped = map_polygon(poly, info.map);
      const auto cov = covariance(mapped);
      const double a2 = info.alpha * info.alpha;
      const double dev = (cov.dense() - a2 * Mat2d::Identity()).norm();
      r.worst_area_err = std::max(r.worst_area_err, std::abs(mapped.area() - 1));
      r.worst_cov_err = std::max(r.worst_cov_err, dev / a2);
      ++r.cells_checked;
    }
    const auto& ind = s.indicators;
    double rhs = 0;
    for (std::size_t c = 0; c < ind.m_factor.size(); ++c)
      rhs += (ind.m_factor[c] * ind.m_factor[c] - 1) * ind.sigma_tilde_sq[c];
    const double lhs = ind.theory * ind.theory - ind.heuristic * ind.heuristic;
    // Cancellation in lhs costs a few ulps of theory^2.
    const double scale = std::max(std::abs(rhs), 1e-4 * ind.theory * ind.theory);
    r.identity_error.push_back(std::abs(lhs - rhs) / scale);
    if (s.record.iter == 10) r.snapshot = mesh;
  });
  return r;
}

Outcome criterion1() {
  double worst = 0;
  for (auto [a, b] : {std::pair{2.0, 1.0}, {5.0, 1.0}, {1.0, 3.0}}) {
    const auto poly = rectangle(0, 0, a, b);
    const auto el = local_element(poly, 1);
    const double expected = (a / b + b / a) / 3;
    // bilinear nodal basis, vertices (0,0), (a,0), (a,b), (0,b)
    const std::array<std::function<Point2d(const Point2d&)>, 4> grad = {
        [&](const Point2d& x) { return Point2d(-(1 - x.y() / b) / a, -(1 - x.x() / a) / b); },
        [&](const Point2d& x) { return Point2d((1 - x.y() / b) / a, -x.x() / a / b); },
        [&](const Point2d& x) { return Point2d(x.y() / b / a, x.x() / a / b); },
        [&](const Point2d& x) { return Point2d(-x.y() / b / a, (1 - x.x() / a) / b); }};
    const GolubWelsch g(6);
    for (int i = 0; i < 4; ++i) {
      const Eigen::VectorXd p = el.pi_zero.col(i);
      double seminorm = 0;
      for (std::size_t s = 0; s < g.x.size(); ++s)
        for (std::size_t t = 0; t < g.x.size(); ++t) {
          const Point2d x(a * g.x[s], b * g.x[t]);
          const Point2d dw = grad[i](x) - el.monomials.gradients(x) * p;
          seminorm += g.w[s] * g.w[t] * a * b * dw.squaredNorm();
        }
      Eigen::VectorXd w = -el.D * p;
      w(i) += 1;
      const double stab = w.dot(el.stabilization * w);
      worst = std::max(worst, std::abs(seminorm / stab - expected) / expected);
    }
  }
  return {worst <= 1e-8, "max relative deviation " + fmt(worst) + " over 3 rectangles x 4 basis functions"};
}

Outcome criterion2(const Case1Run& r) {
  const auto n = r.log.rows.size();
  const bool ok = n >= 15 && r.worst_area_err <= 1e-10 && r.worst_cov_err <= 1e-8;
  return {ok, std::to_string(r.cells_checked) + " cells over " + std::to_string(n) +
                  " meshes; max | |F(K)| - 1 | " + fmt(r.worst_area_err) +
                  ", max ||M(F(K)) - a^2 I|| / a^2 " + fmt(r.worst_cov_err)};
}

Outcome criterion3(const Case1Run& r) {
  double worst = 0;
  std::vector<Mesh> meshes{initial_mesh(4)};
  if (r.snapshot) meshes.push_back(*r.snapshot);
  for (int k : {1, 2}) {
    const auto tc = patch_case(k);
    for (const auto& mesh : meshes) {
      const Discretization disc(mesh, k);
      const auto u = solve(assemble(disc, tc.f, tc.u));
      worst = std::max(worst, energy_error(disc, project_solution(disc, u), tc.grad_u));
    }
  }
  const bool ok = r.snapshot.has_value() && worst <= 1e-9;
  return {ok, "max energy error " + fmt(worst) + " (k = 1, 2; 4x4 grid and a " +
                  std::to_string(r.snapshot ? r.snapshot->num_cells() : 0) + "-cell adapted mesh)"};
}

Outcome criterion4() {
  std::string detail;
  bool ok = true;
  for (auto [k, tol, target, band] : {std::tuple{1, 2e-2, -0.5, 0.15}, {2, 5e-3, -1.0, 0.25}}) {
    AdaptConfig cfg;
    cfg.order = k;
    cfg.tol = tol;
    cfg.kind = EstimatorKind::Heuristic;
    const auto log = adaptive_loop(cfg, case2());
    const auto& last = log.rows.back();
    double rate = std::nan("");
    try {
      rate = fit_rate(log.rows);
    } catch (const InsufficientData&) {
    }
    const bool pass = log.stop_reason == "tolerance" && std::abs(rate - target) <= band;
    ok = ok && pass;
    detail += "k=" + std::to_string(k) + ": rate " + fmt(rate) + " (target " + fmt(target) +
              " +- " + fmt(band) + "), " + std::to_string(log.rows.size()) + " iters, N " +
              std::to_string(last.ndof) + ", err " + fmt(last.err) + ", stop " +
              log.stop_reason + "; ";
  }
  return {ok, detail};
}

Outcome criterion5() {
  // One tolerance for all three cases, fixed in advance.
  const double tol = 0.05;
  std::string detail = "tol " + fmt(tol) + ": ";
  bool ok = true;
  for (const std::string name : {"1", "2", "3"}) {
    int ndof[2], cells[2];
    for (int j = 0; j < 2; ++j) {
      AdaptConfig cfg;
      cfg.tol = tol;
      cfg.kind = j == 0 ? EstimatorKind::Heuristic : EstimatorKind::Isotropic;
      const auto log = adaptive_loop(cfg, make_case(name, 1));
      if (log.stop_reason != "tolerance") ok = false;
      ndof[j] = log.rows.back().ndof;
      cells[j] = log.rows.back().n_cells;
    }
    const double ratio = double(ndof[0]) / ndof[1];
    ok = ok && ratio <= 0.8;
    detail += "case " + name + " N " + std::to_string(ndof[0]) + " vs " +
              std::to_string(ndof[1]) + " (ratio " + fmt(ratio) + ", cells " +
              std::to_string(cells[0]) + " vs " + std::to_string(cells[1]) + "); ";
  }
  return {ok, detail};
}

Outcome criterion6(const Case1Run& r) {
  double worst = 0;
  for (double e : r.identity_error) worst = std::max(worst, e);
  // congruent squares: M = 1 everywhere, so the two kinds coincide exactly
  const auto tc = case1();
  const Discretization disc(initial_mesh(8), 1);
  const auto u = solve(assemble(disc, tc.f, tc.u));
  const auto proj = project_solution(disc, u);
  const auto rec = recover(disc.mesh(), proj);
  const auto ind = estimate(disc, proj, u, tc.f, EstimatorKind::Heuristic, &rec);
  const bool exact = ind.theory == ind.heuristic;
  return {worst <= 1e-10 && exact,
          "max relative identity error " + fmt(worst) + " over " +
              std::to_string(r.identity_error.size()) + " iterations; squares " +
              (exact ? "exact" : "differ by " + fmt(ind.theory - ind.heuristic))};
}

Outcome criterion7(const Case1Run& r) {
  std::vector<Mesh> meshes;
  for (unsigned seed = 1; seed <= 5; ++seed) meshes.push_back(randomly_split(3, 40, seed));
  if (r.snapshot) meshes.push_back(*r.snapshot);
  const ScalarField lin = [](const Point2d& x) { return 1.5 + 2 * x.x() - 3 * x.y(); };
  const ScalarField zero = [](const Point2d&) { return 0.0; };
  double worst_g = 0, worst_w = 0;
  for (int k : {1, 2})
    for (const auto& mesh : meshes) {
      const Discretization disc(mesh, k);
      const auto u = disc.interpolate(lin);
      const auto proj = project_solution(disc, u);
      const auto rec = recover(mesh, proj);
      for (const auto& g : rec.g)
        worst_g = std::max({worst_g, std::abs(g.m11), std::abs(g.m12), std::abs(g.m22)});
      const auto ind = estimate(disc, proj, u, zero, EstimatorKind::Heuristic, &rec);
      for (double w : ind.weight) worst_w = std::max(worst_w, std::abs(w));
    }
  return {worst_g < 1e-12 && worst_w < 1e-12,
          std::to_string(2 * meshes.size()) + " (mesh, order) pairs; max |G| " + fmt(worst_g) +
              ", max w " + fmt(worst_w)};
}

Outcome criterion8() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> unit(0, 1);
  int agree = 0, ties = 0, g_cuts = 0;
  const int total = 50;
  for (int i = 0; i < total; ++i) {
    const double phi_g = std::numbers::pi * unit(rng);
    Polygon2d poly({{0, 0}, {1, 0}, {0, 1}});
    SymMat2d cov;
    double g1 = 0, g2 = 0;
    const bool tie = i % 8 == 0;
    if (i % 2 == 0) {
      // rotated rectangle
      const double a = 1 + 4 * unit(rng), b = 1;
      const double phi_k = std::numbers::pi * unit(rng);
      const Point2d e1(std::cos(phi_k), std::sin(phi_k)), e2(-e1.y(), e1.x());
      const Point2d o(unit(rng), unit(rng));
      poly = Polygon2d({o, o + a * e1, o + a * e1 + b * e2, o + b * e2});
      cov = {e1.x() * e1.x() * a * a / 12 + e2.x() * e2.x() * b * b / 12,
             e1.x() * e1.y() * a * a / 12 + e2.x() * e2.y() * b * b / 12,
             e1.y() * e1.y() * a * a / 12 + e2.y() * e2.y() * b * b / 12};
      if (tie) {
        g2 = 0.5;
        g1 = g2 * (a / b) * (a / b);
      }
    } else {
      const Point2d p(unit(rng), unit(rng));
      const Point2d q = p + Point2d(0.2 + 2 * unit(rng), 0.3 * unit(rng) - 0.15);
      const Point2d r = p + Point2d(2 * unit(rng) - 1, 0.1 + 1.5 * unit(rng));
      poly = Polygon2d({p, q, r});
      cov = triangle_covariance(p, q, r);
    }
    const auto k = closed_form_eigen(cov.m11, cov.m12, cov.m22);
    if (!tie) {
      // keep away from the tie by a factor of at least 1.2 either way
      g2 = 0.1 + unit(rng);
      const double ratio = k.l1 / k.l2 * (unit(rng) < 0.5 ? 1.2 + 3 * unit(rng) : 0.1 + 0.7 * unit(rng));
      g1 = g2 * std::max(ratio, 1.2);
    }
    const Point2d r1(std::cos(phi_g), std::sin(phi_g));
    const Mat2d gm = g1 * r1 * r1.transpose() + g2 * Point2d(-r1.y(), r1.x()) * Point2d(-r1.y(), r1.x()).transpose();
    const SymMat2d g = SymMat2d::from(gm);
    const auto ge = closed_form_eigen(g.m11, g.m12, g.m22);
    const bool use_g = tie || ge.l1 / ge.l2 >= k.l1 / k.l2;
    const Point2d expected = use_g ? ge.r2 : k.r2;
    const auto got = cut_direction(poly, g, EstimatorKind::Heuristic);
    const bool same_source = got.source == (use_g ? CutSource::G : CutSource::K);
    const double sine = std::abs(expected.x() * got.direction.y() - expected.y() * got.direction.x());
    if (same_source && sine <= 1e-9 && std::abs(got.direction.norm() - 1) <= 1e-12) ++agree;
    ties += tie;
    g_cuts += use_g;
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree (" +
                              std::to_string(ties) + " ties, " + std::to_string(g_cuts) +
                              " expected G cuts)"};
}

Outcome criterion9(const Case1Run& r) {
  double lo = INFINITY, hi = 0;
  for (const auto& row : r.log.rows) {
    const double eff = row.heuristic / row.err;
    lo = std::min(lo, eff);
    hi = std::max(hi, eff);
  }
  const auto n = r.log.rows.size();
  return {n >= 12 && hi / lo <= 3,
          std::to_string(n) + " iterations; effectivity in [" + fmt(lo) + ", " + fmt(hi) +
              "], spread " + fmt(hi / lo)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  int failed = 0;
  try {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    auto report = [&](int id, const Outcome& o) {
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
                << " [" << fmt(secs) << " s]" << std::endl;
      failed += !o.pass;
      t0 = clock::now();
    };
    report(1, criterion1());
    const auto c1 = run_case1();
    std::cout << "(shared case-1 run: " << c1.log.rows.size() << " iterations, "
              << std::chrono::duration<double>(clock::now() - t0).count() << " s)" << std::endl;
    t0 = clock::now();
    report(2, criterion2(c1));
    report(3, criterion3(c1));
    report(4, criterion4());
    report(5, criterion5());
    report(6, criterion6(c1));
    report(7, criterion7(c1));
    report(8, criterion8());
    report(9, criterion9(c1));
  } catch (const std::exception& e) {
    std::cout << "harness error: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : "all criteria passed")
            << std::endl;
  return strict && failed ? 1 : 0;
}
