#pragma once

// Distances between finite measures on the half line: the extended Prohorov
// metric (bisection over the dilation radius with an exact cell-union sweep)
// and total variation (exact for piecewise-linear densities), plus power-law
// rate fitting and the mass-bound root used by the convergence estimates.

#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/measure.hpp"

namespace fluidps {

// rho(z1, z2) with certified error +-(2h + tail mass of both measures).
// Measures on different grids are aligned first; alignment requires the
// coarser step to be a whole multiple of the finer and fails with
// grid_resample_failure otherwise.
CertValue prohorov(const GridMeasure& z1, const GridMeasure& z2);

// ||z1 - z2||_TV: sum of |cell mass differences| over the shared grid; the
// unresolved tails contribute between |t1 - t2| and t1 + t2, reported as
// value +- error.
CertValue total_variation(const GridMeasure& z1, const GridMeasure& z2);

struct RateReport {
  std::vector<double> times;      // samples inside the window
  std::vector<double> distances;  // matching distances (zeros included)
  double slope = 0.0;             // least-squares log-log slope
  double constant = 0.0;          // majorizing C: d(t) <= C t^slope on window
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> excluded_times;  // zero-distance samples left out
  bool exact_convergence = false;      // every window sample was zero
};

// Fits d(t) ~ C t^slope on the window.  Requires >= 5 samples in the window;
// zero distances are excluded from the fit and reported.
RateReport fit_rate(const std::vector<double>& times,
                    const std::vector<double>& distances, double window_lo,
                    double window_hi);

// Unique positive root of y^2 - (M + 4C) y - 2C, the a-priori bound on the
// mass ratio used by the rate estimates.  Requires M > 0, C >= 1.
double mass_bound_constant(double M, double C);

// Reference pieces for cross-checking the Prohorov implementation against
// small atomic instances.
struct AtomicMeasure {
  std::vector<double> xs;  // atom positions
  std::vector<double> ws;  // atom weights (>= 0)
};

// Exhaustive subset enumeration + bisection; exponential in the number of
// atoms, intended for instances with at most ~12 atoms.
double prohorov_atoms_exhaustive(const AtomicMeasure& a,
                                 const AtomicMeasure& b);

// Replaces each atom by a uniform density over the grid cell starting at its
// position (moves mass by at most h, so rho shifts by at most h per side).
GridMeasure smear_atoms(const AtomicMeasure& a, const Grid& grid);

}  // namespace fluidps
