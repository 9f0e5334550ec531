#include "avem/cases.hpp"

#include <cmath>

#include "avem/errors.hpp"

namespace avem {

namespace {

// Each problem is a product P(x) Q(y); f = -(P'' Q + P Q'').
struct Factor {
  double (*v)(double);
  double (*d1)(double);
  double (*d2)(double);
};

TestCase separable(std::string name, double scale, Factor px, Factor qy) {
  TestCase tc;
  tc.name = std::move(name);
  tc.u = [=](const Point2d& p) { return scale * px.v(p.x()) * qy.v(p.y()); };
  tc.grad_u = [=](const Point2d& p) {
    return Point2d(scale * px.d1(p.x()) * qy.v(p.y()), scale * px.v(p.x()) * qy.d1(p.y()));
  };
  tc.f = [=](const Point2d& p) {
    const double x = p.x(), y = p.y();
    return -scale * (px.d2(x) * qy.v(y) + px.v(x) * qy.d2(y));
  };
  return tc;
}

// x(1-x)(e^{10x}-1)
double layer(double x) { return x * (1 - x) * std::expm1(10 * x); }
double layer_d1(double x) {
  const double e = std::exp(10 * x);
  return (1 - 2 * x) * (e - 1) + (x - x * x) * 10 * e;
}
double layer_d2(double x) {
  const double e = std::exp(10 * x);
  return -2 * (e - 1) + 2 * (1 - 2 * x) * 10 * e + (x - x * x) * 100 * e;
}

// (1-y)(e^{10y}-1)
double edge_layer(double y) { return (1 - y) * std::expm1(10 * y); }
double edge_layer_d1(double y) {
  const double e = std::exp(10 * y);
  return -(e - 1) + (1 - y) * 10 * e;
}
double edge_layer_d2(double y) {
  const double e = std::exp(10 * y);
  return -20 * e + (1 - y) * 100 * e;
}

// y(1-y)
double bump(double y) { return y * (1 - y); }
double bump_d1(double y) { return 1 - 2 * y; }
double bump_d2(double) { return -2; }

// x(1-x)(e^{10x}-5000x+4499)
double shifted(double x) { return x * (1 - x) * (std::exp(10 * x) - 5000 * x + 4499); }
double shifted_d1(double x) {
  const double e = std::exp(10 * x);
  return (1 - 2 * x) * (e - 5000 * x + 4499) + (x - x * x) * (10 * e - 5000);
}
double shifted_d2(double x) {
  const double e = std::exp(10 * x);
  return -2 * (e - 5000 * x + 4499) + 2 * (1 - 2 * x) * (10 * e - 5000) + (x - x * x) * 100 * e;
}

}  // namespace

TestCase case1() {
  return separable("1", 1e-6, {layer, layer_d1, layer_d2},
                   {edge_layer, edge_layer_d1, edge_layer_d2});
}

TestCase case2() {
  return separable("2", 1e-2, {layer, layer_d1, layer_d2}, {bump, bump_d1, bump_d2});
}

TestCase case3() {
  // xy(x-1)(y-1) = x(1-x) y(1-y)
  return separable("3", 1e-2, {shifted, shifted_d1, shifted_d2}, {bump, bump_d1, bump_d2});
}

TestCase patch_case(int order) {
  TestCase tc;
  tc.name = "patch";
  tc.homogeneous = false;
  if (order == 1) {
    tc.u = [](const Point2d& p) { return 1 + 2 * p.x() - 3 * p.y(); };
    tc.grad_u = [](const Point2d&) { return Point2d(2, -3); };
    tc.f = [](const Point2d&) { return 0.0; };
  } else if (order == 2) {
    tc.u = [](const Point2d& p) {
      const double x = p.x(), y = p.y();
      return 1 + x - 2 * y + x * x + 3 * x * y + 2 * y * y;
    };
    tc.grad_u = [](const Point2d& p) {
      return Point2d(1 + 2 * p.x() + 3 * p.y(), -2 + 3 * p.x() + 4 * p.y());
    };
    tc.f = [](const Point2d&) { return -6.0; };
  } else {
    throw UnsupportedDegree("patch case defined for order 1 and 2");
  }
  return tc;
}

TestCase make_case(const std::string& name, int order) {
  if (name == "1") return case1();
  if (name == "2") return case2();
  if (name == "3") return case3();
  if (name == "patch") return patch_case(order);
  throw InvalidConfig("unknown case '" + name + "'");
}

}  // namespace avem
