#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>

#include "fluidps/common.hpp"
#include "fluidps/distribution.hpp"
#include "fluidps/fluid.hpp"
#include "fluidps/measure.hpp"
#include "fluidps/metrics.hpp"
#include "fluidps/renewal.hpp"
#include "fluidps/test_function.hpp"

using namespace fluidps;

namespace {

template <typename F>
std::optional<Errc> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Unit uniform-density initial condition with exponential service: T', T, S
// and the gap all have elementary closed forms to pin the solver against.
FluidSolution closed_form_pair(double u_max, bool extrapolate = false) {
  SolveOptions opts;
  opts.snapshot_grid = Grid(0.01, 20.0);
  opts.extrapolate = extrapolate;
  const auto xi = GridMeasure::uniform_density(0.0, 2.0, 1.0, Grid(0.01, 4.0));
  return solve(xi, ServiceDistribution::exponential(1.0), 0.01, u_max, opts);
}

}  // namespace

TEST_CASE("excess-shaped start is a fixed point") {
  const auto d = ServiceDistribution::exponential(1.0);
  const auto xi = scaled_excess(d, 1.0, Grid(0.01, 30.0));
  SolveOptions opts;
  opts.snapshot_grid = Grid(0.01, 5.0);
  const auto sol = solve(xi, d, 0.01, 25.0, opts);
  CHECK_FALSE(sol.degenerate());
  CHECK(sol.kappa() == doctest::Approx(1.0).epsilon(2e-3));
  for (double u : {0.5, 5.0, 20.0})
    CHECK(sol.T_bar_at(u) == doctest::Approx(u).epsilon(1e-3));
  CHECK(sol.T_bar_prime_at(12.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(sol.Z_bar(7.0) == doctest::Approx(1.0).epsilon(1e-3));
  const auto rho = prohorov(sol.measure_at(5.0), sol.limit_state());
  CHECK(rho.value <= 0.02);
}

TEST_CASE("closed-form trajectory") {
  const auto sol = closed_form_pair(25.0);
  CHECK(sol.T_bar_at(0.0) == 0.0);
  CHECK(sol.T_bar_prime_at(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.Z_bar(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // T(u) = u + u^2/4 - u^3/12 inside the support, then slope 1
  CHECK(sol.T_bar_at(1.0) == doctest::Approx(1.0 + 0.25 - 1.0 / 12).epsilon(5e-3));
  CHECK(sol.T_bar_at(3.0) == doctest::Approx(10.0 / 3.0).epsilon(5e-3));
  CHECK(sol.S_bar(3.0) == doctest::Approx(8.0 / 3.0).epsilon(5e-3));
  CHECK(sol.S_bar(7.0 / 6.0) == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(sol.Z_bar(7.0 / 6.0) == doctest::Approx(1.25).epsilon(5e-3));
  CHECK(sol.kappa() == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(sol.horizon() == doctest::Approx(7.0 / 3.0 + 23.0).epsilon(5e-3));
  CHECK(sol.initial_workload().value == doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("inverse round trip") {
    for (double t : {0.3, 1.0, 2.0, 3.0, 5.0, 8.0, 20.0})
      CHECK(std::fabs(sol.T_bar_at(sol.S_bar(t)) - t) <= 2.0 * 0.01);
    // S grows at least linearly once the transient ends
    for (double t : {5.0, 10.0, 20.0}) CHECK(sol.S_bar(t) >= t / 2.0);
  }

  SUBCASE("stationarity gap") {
    const auto g0 = sol.stationarity_gap(0.0);
    CHECK(g0.value == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
    CHECK(g0.truncated_at == doctest::Approx(25.0));
    CHECK(sol.stationarity_gap(2.0).value <= 5e-3);
    CHECK(sol.stationarity_gap(25.0).value == 0.0);
    CHECK(code_of([&] { sol.stationarity_gap(-1.0); }) ==
          Errc::invalid_argument);
    CHECK(code_of([&] { sol.stationarity_gap(26.0); }) == Errc::out_of_range);
  }

  SUBCASE("conservation and collapse") {
    for (double t : {0.0, 1.0, 3.0, 7.0})
      CHECK(sol.workload_at(t) == doctest::Approx(1.0).epsilon(5e-3));
    const auto target = scaled_excess(sol.dist(), 1.0, sol.snapshot_grid());
    for (double t : {7.0 / 3.0, 3.0, 5.0})
      CHECK(prohorov(sol.measure_at(t), target).value <= 0.02);
    const auto z = sol.measure_at(1.5);
    CHECK(z.total_mass() == doctest::Approx(sol.Z_bar(1.5)).epsilon(1e-3));
    CHECK(z.grid().same_as(sol.snapshot_grid()));
  }

  SUBCASE("dynamic equation residual") {
    for (const auto& g : standard_test_functions()) {
      CAPTURE(g.name);
      CHECK(sol.dynamic_residual(g, 0.0) == 0.0);
      for (double t : {0.5, 2.0}) {
        const double res = sol.dynamic_residual(g, t);
        CHECK(std::fabs(res) <= 1e-2 * (1.0 + t));
      }
    }
  }

  SUBCASE("horizon is enforced") {
    CHECK(code_of([&] { (void)sol.S_bar(sol.horizon() + 1.0); }) ==
          Errc::beyond_grid);
    CHECK(code_of([&] { (void)sol.T_bar_at(26.0); }) == Errc::beyond_grid);
    CHECK(code_of([&] { (void)sol.measure_at(40.0); }) == Errc::beyond_grid);
    CHECK(code_of([&] { (void)sol.S_bar(-2.0); }) == Errc::invalid_argument);
  }
}

TEST_CASE("extrapolation extends T linearly") {
  const auto sol = closed_form_pair(10.0, true);
  const double top = sol.horizon();
  const double t = top + 3.0;
  const double S = sol.S_bar(t);
  CHECK(S > 10.0);
  CHECK(sol.T_bar_at(S) == doctest::Approx(t).epsilon(1e-9));
  CHECK(sol.Z_bar(t) == doctest::Approx(sol.kappa()).epsilon(1e-12));
  CHECK(sol.T_bar_prime_at(15.0) == doctest::Approx(sol.kappa()));
}

TEST_CASE("zero initial condition") {
  const auto sol = solve(GridMeasure::zero(Grid(0.01, 2.0)),
                         ServiceDistribution::exponential(1.0), 0.01, 5.0);
  CHECK(sol.degenerate());
  CHECK(sol.kappa() == 0.0);
  CHECK(sol.Z_bar(3.0) == 0.0);
  CHECK(sol.workload_at(4.0) == 0.0);
  CHECK(sol.measure_at(2.0).total_mass() == 0.0);
  CHECK(sol.limit_state().total_mass() == 0.0);
  CHECK(sol.horizon() == 0.0);
  CHECK(code_of([&] { (void)sol.S_bar(1.0); }) == Errc::invalid_argument);
  CHECK(code_of([&] { (void)sol.renewal(); }) == Errc::invalid_argument);
  CHECK(code_of([&] {
          (void)sol.dynamic_residual(standard_test_functions()[0], 1.0);
        }) == Errc::invalid_argument);
}

TEST_CASE("heavy-tailed service: zero rate, mass still drains") {
  const auto d = ServiceDistribution::pareto(0.5, 2.0);
  const auto xi = GridMeasure::uniform_density(0.0, 1.0, 0.5, Grid(0.05, 2.0));
  SolveOptions opts;
  opts.snapshot_grid = Grid(0.05, 2.0);
  opts.extrapolate = true;
  const auto sol = solve(xi, d, 0.05, 30.0, opts);
  CHECK_FALSE(sol.degenerate());
  CHECK(sol.kappa() == 0.0);
  CHECK(sol.renewal().beta_e == 0.0);
  const double z0 = sol.Z_bar(0.0);
  CHECK(z0 == doctest::Approx(0.5).epsilon(1e-9));
  // mass may bulge transiently but must be well below its start late on
  const double z_late = sol.Z_bar(0.9 * sol.horizon());
  CHECK(z_late < 0.4);
  CHECK(z_late > 0.0);
  CHECK(sol.limit_state().total_mass() == 0.0);
  // extrapolation needs a positive long-run slope, so the horizon still binds
  CHECK(code_of([&] { (void)sol.S_bar(sol.horizon() + 5.0); }) ==
        Errc::beyond_grid);
  // workload is conserved even though the mass drains away
  CHECK(sol.workload_at(sol.horizon() * 0.9) ==
        doctest::Approx(sol.initial_workload().value).epsilon(1e-2));
}

TEST_CASE("solver argument validation") {
  const auto d = ServiceDistribution::exponential(1.0);
  // initial tail mass present but the grid is not covered
  const auto shortxi = scaled_excess(d, 1.0, Grid(0.01, 5.0));
  CHECK(code_of([&] { solve(shortxi, d, 0.01, 10.0); }) == Errc::beyond_grid);

  const auto xi = GridMeasure::uniform_density(0.0, 2.0, 1.0, Grid(0.01, 4.0));
  SolveOptions bad;
  bad.snapshot_grid = Grid(0.015, 3.0);
  CHECK(code_of([&] { solve(xi, d, 0.01, 5.0, bad); }) == Errc::grid_mismatch);

  SolveOptions coarse;
  coarse.snapshot_grid = Grid(0.02, 4.0);
  const auto sol = solve(xi, d, 0.01, 5.0, coarse);
  CHECK(sol.measure_at(1.0).grid().h == doctest::Approx(0.02));

  // workload must be bounded before anything else makes sense;
  // tail index 1 puts the first moment exactly on the divergent side
  const auto heavy_xi = GridMeasure::pareto_tail(0.5, 1.0, 1.0, Grid(0.01, 2.0));
  CHECK(code_of([&] { solve(heavy_xi, d, 0.01, 2.0); }) ==
        Errc::workload_infinite);

  CHECK(code_of([&] { solve(xi, d, nullptr, {}); }) == Errc::invalid_argument);
}

TEST_CASE("shared renewal function across initial conditions") {
  const auto d = ServiceDistribution::exponential(1.0);
  const auto U = std::make_shared<const RenewalFunction>(
      compute_renewal_function(d, 0.01, 10.0));
  const auto xi1 = GridMeasure::uniform_density(0.0, 2.0, 1.0, Grid(0.01, 4.0));
  const auto xi2 = GridMeasure::uniform_density(0.0, 1.0, 2.0, Grid(0.01, 4.0));
  const auto s1 = solve(xi1, d, U, {});
  const auto s2 = solve(xi2, d, U, {});
  CHECK(&s1.renewal() == U.get());
  CHECK(s1.grid().x_max() == doctest::Approx(10.0));
  CHECK(s1.Z_bar(0.0) == doctest::Approx(1.0));
  CHECK(s2.Z_bar(0.0) == doctest::Approx(2.0));
  CHECK(s1.T_bar_at(5.0) != s2.T_bar_at(5.0));
  // rate scales with the initial workload: kappa = beta_e * <chi, xi>
  CHECK(s2.kappa() == doctest::Approx(s2.initial_workload().value).epsilon(2e-3));
}

TEST_CASE("state snapshot agrees across the convolution size cutoff") {
  // Same model, two snapshot resolutions: the coarse one stays on the direct
  // per-abscissa sums, the fine one crosses into the single-FFT evaluation.
  // At shared abscissas both compute the same lattice sums, so the snapshots
  // must agree to roundoff, not just to quadrature error.
  const auto d = ServiceDistribution::exponential(1.0);
  const auto xi =
      GridMeasure::uniform_density(0.0, 1.0, 2.0, Grid(0.001, 4.0));
  SolveOptions fine, coarse;
  fine.snapshot_grid = Grid(0.01, 8.0);
  coarse.snapshot_grid = Grid(0.04, 8.0);
  const auto sf = solve(xi, d, 0.001, 40.0, fine);
  const auto sc = solve(xi, d, 0.001, 40.0, coarse);
  const double t = 30.0;
  const auto mf = sf.measure_at(t);
  const auto mc = sc.measure_at(t);
  CHECK(sf.S_bar(t) > 25.0);
  for (std::size_t j = 0; j <= 200; ++j) {
    const double x = 0.04 * static_cast<double>(j);
    CHECK(std::fabs(mf.cdf_at(x) - mc.cdf_at(x)) <= 1e-11);
  }
  CHECK(std::fabs(mf.tail_mass() - mc.tail_mass()) <= 1e-11);
}
