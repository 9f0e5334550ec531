#include <doctest.h>

#include <cmath>
#include <random>

#include "avem/cases.hpp"
#include "avem/errors.hpp"

using namespace avem;

namespace {

double fd_laplacian(const ScalarField& u, const Point2d& p, double h) {
  const Point2d ex(h, 0), ey(0, h);
  return (u(p + ex) + u(p - ex) + u(p + ey) + u(p - ey) - 4 * u(p)) / (h * h);
}

Point2d fd_gradient(const ScalarField& u, const Point2d& p, double h) {
  const Point2d ex(h, 0), ey(0, h);
  return Point2d(u(p + ex) - u(p - ex), u(p + ey) - u(p - ey)) / (2 * h);
}

}  // namespace

TEST_CASE("forcing and gradient match finite differences") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> coord(0.01, 0.99);
  for (const auto& tc : {case1(), case2(), case3(), patch_case(1), patch_case(2)}) {
    CAPTURE(tc.name);
    for (int i = 0; i < 1000; ++i) {
      const Point2d p(coord(rng), coord(rng));
      const double f = tc.f(p);
      // relative, with an absolute floor where f crosses zero
      CHECK(std::abs(-fd_laplacian(tc.u, p, 1e-4) - f) <= 1e-4 * std::max(std::abs(f), 1.0));
      const Point2d g = tc.grad_u(p);
      CHECK((fd_gradient(tc.u, p, 1e-6) - g).norm() <= 1e-6 * std::max(g.norm(), 1.0));
    }
  }
}

TEST_CASE("homogeneous cases vanish on the boundary") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(0, 1);
  for (const auto& tc : {case1(), case2(), case3()}) {
    CAPTURE(tc.name);
    CHECK(tc.homogeneous);
    double peak = 0;
    for (int i = 0; i <= 100; ++i)
      for (int j = 0; j <= 100; ++j) peak = std::max(peak, std::abs(tc.u({i / 100.0, j / 100.0})));
    for (int i = 0; i < 1000; ++i) {
      const double s = t(rng);
      const Point2d p = i % 4 == 0 ? Point2d(s, 0)
                      : i % 4 == 1 ? Point2d(1, s)
                      : i % 4 == 2 ? Point2d(s, 1)
                                   : Point2d(0, s);
      CHECK(std::abs(tc.u(p)) <= 1e-12 * peak);
    }
  }
}

TEST_CASE("case 1 peaks towards the top-right corner") {
  const auto tc = case1();
  CHECK(tc.u({0.9, 0.9}) > tc.u({0.5, 0.5}));
  CHECK(tc.u({0.5, 0.5}) > 0);
  CHECK(tc.u({0.0, 0.3}) == 0.0);
  CHECK(tc.u({0.3, 0.0}) == 0.0);
}

TEST_CASE("case 2 has a layer in x") {
  const auto tc = case2();
  const Point2d g = tc.grad_u({0.95, 0.5});
  CHECK(std::abs(g.x()) > 100 * std::abs(g.y()));
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) CHECK(std::isfinite(tc.f({i / 20.0, j / 20.0})));
}

TEST_CASE("case 3 is case 2 plus a bubble") {
  const auto c2 = case2(), c3 = case3();
  const auto bubble = [](const Point2d& p) {
    const double x = p.x(), y = p.y();
    return 50 * x * (1 - y) * y * (0.9 - x) * (1 - x);
  };
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> coord(0, 1);
  for (int i = 0; i < 200; ++i) {
    const Point2d p(coord(rng), coord(rng));
    CHECK(c3.u(p) - bubble(p) == doctest::Approx(c2.u(p)).epsilon(1e-10).scale(1.0));
  }

  // the bubble gives an interior extremum on the left; the layer sits at x = 1
  double best = 0, where = 0;
  for (int i = 1; i < 700; ++i) {
    const double x = i / 1000.0;
    const double v = std::abs(c3.u({x, 0.5}));
    if (v > best) best = v, where = x;
  }
  // x(0.9-x)(1-x) is stationary at the smaller root of 3x^2 - 3.8x + 0.9
  const double bubble_peak = (3.8 - std::sqrt(3.8 * 3.8 - 10.8)) / 6;
  CHECK(std::abs(where - bubble_peak) < 0.02);
  CHECK(std::abs(c3.grad_u({0.99, 0.5}).x()) > 10 * std::abs(c3.grad_u({where, 0.5}).x()));
}

TEST_CASE("case lookup") {
  CHECK(make_case("2", 1).name == "2");
  CHECK(make_case("patch", 2).f({0.3, 0.4}) == -6.0);
  CHECK_THROWS_AS(make_case("4", 1), InvalidConfig);
  CHECK_THROWS_AS(patch_case(3), UnsupportedDegree);
}
