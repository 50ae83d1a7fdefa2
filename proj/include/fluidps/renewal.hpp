#pragma once

// Renewal function of the excess-lifetime process: solves the renewal-density
// equation m = f_e + f_e * m on a uniform grid and integrates to
// U(u) = 1 + int_0^u m.  dU carries a unit atom at 0 plus the density m; the
// atom is kept explicit everywhere, never smeared into the first cell.

#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/distribution.hpp"

namespace fluidps {

struct RenewalFunction {
  Grid grid;
  std::vector<double> values;   // U at nodes; values[0] = 1
  std::vector<double> density;  // m at nodes
  double beta_e = 0.0;          // long-run slope of U (0 for heavy tails)
  double residual_cert = 0.0;   // max grid residual of U = 1 + F_e * dU

  double value_at(double u) const;    // piecewise linear
  double density_at(double u) const;  // piecewise linear
};

// Implicit trapezoid scheme, O(n^2) with the convolution window clipped to
// the support of f_e.  Fails with divergent_scheme when 1 - (h/2) f_e(0) <= 0.
RenewalFunction compute_renewal_function(const ServiceDistribution& d, double h,
                                         double u_max);

// U(t+s) - U(t) - beta_e * s for s in [0,1]; refuses when beta_e = 0 since
// the linear centering is meaningless there.
double blackwell_discrepancy(const RenewalFunction& U, double t, double s);

// (g * dU)(u) on the grid: g(u) from the atom at 0 plus the trapezoid
// convolution with the density.  g must be tabulated on U's grid.
std::vector<double> convolve_with_renewal(const RenewalFunction& U,
                                          const std::vector<double>& g);

}  // namespace fluidps
