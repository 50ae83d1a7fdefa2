#pragma once

// Atomless finite measures on [0, inf): piecewise-linear CDF on a uniform
// grid, plus an explicit scalar mass beyond the grid carrying certified
// tail-moment bounds.  Everything downstream (convolutions, metrics,
// snapshots) consumes this one representation.

#include <map>
#include <string>
#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/distribution.hpp"

namespace fluidps {

enum class Ball { rho, tv };

class GridMeasure {
 public:
  GridMeasure() = default;

  static GridMeasure zero(const Grid& grid);
  static GridMeasure uniform_density(double a, double b, double mass,
                                     const Grid& grid);
  // mass times the Pareto(xm, p) law: CDF mass*(1 - (xm/x)^p) above xm.
  static GridMeasure pareto_tail(double xm, double p, double mass,
                                 const Grid& grid);
  // Two-column x,CDF file; strictly increasing x starting at 0,0; the whole
  // measure must fit inside the grid.
  static GridMeasure from_csv(const std::string& path, const Grid& grid);
  // Raw constructor used by the solver and the simulator.  tail_bounds maps
  // gamma to an upper bound on the tail moment beyond x_max; tail_exact
  // records whether those bounds are exact values rather than brackets.
  static GridMeasure from_cdf_nodes(const Grid& grid, std::vector<double> cdf,
                                    double tail_mass,
                                    std::map<double, double> tail_bounds,
                                    bool tail_exact);

  const Grid& grid() const { return grid_; }
  double h() const { return grid_.h; }
  double x_max() const { return grid_.x_max(); }
  const std::vector<double>& cdf() const { return cdf_; }
  double tail_mass() const { return tail_mass_; }
  bool tail_exact() const { return tail_exact_; }
  const std::map<double, double>& tail_moment_bounds() const {
    return tail_bounds_;
  }

  double total_mass() const { return cdf_.back() + tail_mass_; }
  // CDF value; beyond the grid requires tail_mass = 0 (then clamps).
  double cdf_at(double x) const;

  // <chi^gamma, zeta> with a certified error bar.  The grid part is exact for
  // the piecewise-linear CDF; the tail part brackets between
  // tail_mass * x_max^gamma and the registered bound.
  CertValue moment(double gamma) const;

  double truncated_workload(double x) const;  // <chi ^ x, zeta>
  double tail_mass_at(double x) const;        // <1_(x,inf), zeta>

  // Max of the moments a ball constraint requires (mass, first, 1+eps; for
  // tv also second, 2+eps), each taken as value + certified error, <= M.
  // A missing tail bound means the moment is unbounded: returns false.
  bool in_moment_ball(double M, double eps, Ball which) const;

  // Piecewise-linear resample onto another uniform grid.  Extending past
  // x_max with tail mass present is refused (the tail shape is unknown).
  GridMeasure resampled(const Grid& to) const;

  // Inverse CDF within the grid part; u in [0, cdf.back()].
  double quantile(double u) const;

 private:
  Grid grid_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
  std::map<double, double> tail_bounds_;
  bool tail_exact_ = true;
};

// The invariant-shape state c * nu_e on the given grid, with exact tails.
GridMeasure scaled_excess(const ServiceDistribution& d, double c,
                          const Grid& grid);

// Mixture (sum) of two measures on the same grid.
GridMeasure add(const GridMeasure& a, const GridMeasure& b);

// Measure spec: '+'-separated terms of
//   zero | uniformdensity:a=,b=,mass= | scaledexcess:c= |
//   paretotail:xm=,p=,mass= | csv:path=FILE
// scaledexcess needs the distribution argument.
GridMeasure make_measure(const std::string& spec, const Grid& grid,
                         const ServiceDistribution* dist = nullptr);

}  // namespace fluidps
