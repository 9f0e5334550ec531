#pragma once

// Manufactured problems on the unit square with known solutions.

#include <string>

#include "avem/vem.hpp"

namespace avem {

struct TestCase {
  std::string name;
  ScalarField u;
  VectorField grad_u;
  ScalarField f;  ///< -lap u
  /// When false, boundary DOFs take the interpolant of u instead of zero.
  bool homogeneous{true};
};

/// 1e-6 x(1-x)(1-y)(e^{10x}-1)(e^{10y}-1): layers along x = 1 and y = 1.
TestCase case1();
/// 1e-2 xy(1-x)(1-y)(e^{10x}-1): a layer along x = 1.
TestCase case2();
/// 1e-2 xy(x-1)(y-1)(e^{10x}-5000x+4499): case 2 plus an isotropic bubble.
TestCase case3();
/// A polynomial of degree `order` with non-zero boundary values.
TestCase patch_case(int order);

/// Looks up "1", "2", "3" or "patch"; throws InvalidConfig otherwise.
TestCase make_case(const std::string& name, int order);

}  // namespace avem
