#pragma once

// Fluid-model solution built from the convolution representation: the state
// at time t is read off from T'(u) = (H'_xi * dU)(u), the inverse time change
// S(t), and closed-form excess-lifetime kernels.  No time stepping; every
// evaluation is a quadrature against precomputed grid tables.

#include <memory>
#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/distribution.hpp"
#include "fluidps/measure.hpp"
#include "fluidps/renewal.hpp"
#include "fluidps/test_function.hpp"

namespace fluidps {

struct SolveOptions {
  // Grid snapshots are reported on; its step must be an integer multiple of
  // the solve step.  Default (h = 0): solve step, extent min(u_max, 50).
  Grid snapshot_grid{};
  // When set, T is extended past u_max with its long-run slope kappa instead
  // of raising beyond_grid.  Off by default so extrapolation is auditable.
  bool extrapolate = false;
};

struct StationarityGap {
  double value = 0.0;         // lower estimate of the mass of |T' - kappa|
  double truncated_at = 0.0;  // integral stops at this u (the grid end)
};

class FluidSolution {
 public:
  bool degenerate() const { return degenerate_; }
  double kappa() const { return kappa_; }
  CertValue initial_workload() const { return workload_; }
  // Largest time reachable without extrapolation.
  double horizon() const { return Tbar_.back(); }
  const Grid& grid() const { return grid_; }
  const Grid& snapshot_grid() const { return snap_; }
  bool extrapolate() const { return extrapolate_; }
  const GridMeasure& initial() const { return xi_; }
  const ServiceDistribution& dist() const { return dist_; }
  const RenewalFunction& renewal() const;
  const std::vector<double>& T_bar() const { return Tbar_; }
  const std::vector<double>& T_bar_prime() const { return Tp_; }

  double T_bar_at(double u) const;
  double T_bar_prime_at(double u) const;
  double S_bar(double t) const;  // inverse of T by monotone interpolation
  double Z_bar(double t) const;  // total mass at time t

  // State at time t as a measure on the snapshot grid, with the mass and
  // first moment beyond the grid carried as exact tail bounds.
  GridMeasure measure_at(double t) const;

  // <chi, state at t> through the exact workload identity (not via
  // measure_at), so conservation can be checked against an independent path.
  double workload_at(double t) const;

  // Residual of the defining dynamic equation for test function g at time t.
  double dynamic_residual(const TestFunction& g, double t) const;

  // int_r^{u_max} |T'(u) - kappa| du; a lower estimate of the deviation of
  // the occupation measure from its stationary slope, truncated at the grid.
  StationarityGap stationarity_gap(double r) const;

  // The long-time limit kappa * nu_e on the snapshot grid (zero measure in
  // the heavy-tail case beta_e = 0).
  GridMeasure limit_state() const;

 private:
  friend FluidSolution solve(const GridMeasure&, const ServiceDistribution&,
                             double, double, const SolveOptions&);
  friend FluidSolution solve(const GridMeasure&, const ServiceDistribution&,
                             std::shared_ptr<const RenewalFunction>,
                             const SolveOptions&);

  FluidSolution(GridMeasure xi, ServiceDistribution d)
      : xi_(std::move(xi)), dist_(std::move(d)) {}

  GridMeasure xi_;
  ServiceDistribution dist_;
  std::shared_ptr<const RenewalFunction> U_;
  Grid grid_;
  Grid snap_;
  std::size_t snap_mult_ = 1;  // snapshot step as a multiple of the solve step
  bool extrapolate_ = false;
  bool degenerate_ = false;
  std::vector<double> Tbar_;
  std::vector<double> Tp_;
  double kappa_ = 0.0;
  CertValue workload_{};

  double Tp_lattice(std::size_t k) const;  // T' at node k, kappa past the end
  void build(const Grid& grid, const SolveOptions& opts);
};

FluidSolution solve(const GridMeasure& xi, const ServiceDistribution& d,
                    double h, double u_max, const SolveOptions& opts = {});

// Variant reusing a renewal function shared across initial conditions.
FluidSolution solve(const GridMeasure& xi, const ServiceDistribution& d,
                    std::shared_ptr<const RenewalFunction> U,
                    const SolveOptions& opts = {});

}  // namespace fluidps
