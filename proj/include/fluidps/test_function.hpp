#pragma once

// Test functions for the dynamic equation: bounded C^1 functions on [0,inf)
// with g(0) = 0 and g'(0) = 0.

#include <functional>
#include <string>
#include <vector>

namespace fluidps {

struct TestFunction {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
  double sup_g = 0.0;
  double sup_g_prime = 0.0;
  // Nonincreasing envelopes for sup over [X, inf) of |g| / |g'|; null means
  // the constant sup bound.  Used to cut off tail integrals with a certificate.
  std::function<double(double)> tail_sup_g;
  std::function<double(double)> tail_sup_g_prime;

  double tail_bound_g(double X) const;
  double tail_bound_g_prime(double X) const;

  // Throws test_function_invalid when g(0) or g'(0) is off zero, or a sampled
  // value exceeds its declared sup bound.
  void validate() const;

  TestFunction scaled(double factor) const;
};

// Six functions spanning fast/slow tails and convex/sigmoid shapes.
const std::vector<TestFunction>& standard_test_functions();

}  // namespace fluidps
