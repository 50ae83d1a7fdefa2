#include "fluidps/fluid.hpp"

#include <algorithm>
#include <cmath>

namespace fluidps {

// Shared assembly used by both solve() overloads once the renewal function
// question is settled.  U_ may be null only for the zero initial condition.
void FluidSolution::build(const Grid& grid, const SolveOptions& opts) {
  grid_ = grid;
  if (grid.h <= 0.0 || grid.n == 0)
    fail(Errc::invalid_argument, "solve: grid must have positive extent");

  snap_ = opts.snapshot_grid.h > 0.0
              ? opts.snapshot_grid
              : Grid(grid.h, std::min(grid.x_max(), 50.0));
  const double ratio = snap_.h / grid.h;
  const auto mult = static_cast<std::size_t>(std::llround(ratio));
  if (mult < 1 ||
      std::fabs(static_cast<double>(mult) * grid.h - snap_.h) > 1e-9 * snap_.h)
    fail(Errc::grid_mismatch,
         "solve: snapshot step must be an integer multiple of the solve step");
  snap_mult_ = mult;
  extrapolate_ = opts.extrapolate;

  try {
    workload_ = xi_.moment(1.0);
  } catch (const Error& e) {
    if (e.code() == Errc::tail_bound_missing)
      fail(Errc::workload_infinite,
           "solve: initial workload unbounded on the declared tail");
    throw;
  }
  degenerate_ = xi_.total_mass() <= 0.0;
  if (!degenerate_ && xi_.tail_mass() > 0.0 &&
      xi_.x_max() < grid.x_max() * (1.0 - 1e-12))
    fail(Errc::beyond_grid,
         "solve: initial measure with tail mass must cover the solve horizon");

  const std::size_t n = grid.n;
  if (degenerate_) {
    Tp_.assign(n + 1, 0.0);
    Tbar_.assign(n + 1, 0.0);
    kappa_ = 0.0;
    return;
  }

  std::vector<double> hxi(n + 1);
  for (std::size_t k = 0; k <= n; ++k) hxi[k] = xi_.tail_mass_at(grid.node(k));
  Tp_ = convolve_with_renewal(*U_, hxi);
  Tbar_ = cumtrapz(Tp_, grid.h);
  kappa_ = U_->beta_e * workload_.value;
}

const RenewalFunction& FluidSolution::renewal() const {
  if (!U_)
    fail(Errc::invalid_argument,
         "degenerate solution carries no renewal function");
  return *U_;
}

double FluidSolution::T_bar_at(double u) const {
  if (u < -1e-12) fail(Errc::invalid_argument, "T: negative argument");
  const double umax = grid_.x_max();
  if (u > umax * (1.0 + 1e-12) + 1e-12) {
    if (extrapolate_ && kappa_ > 0.0)
      return Tbar_.back() + kappa_ * (u - umax);
    fail(Errc::beyond_grid, "T evaluated past the solved grid");
  }
  return pl_value(Tbar_, grid_.h, std::clamp(u, 0.0, umax));
}

double FluidSolution::T_bar_prime_at(double u) const {
  if (u < -1e-12) fail(Errc::invalid_argument, "T': negative argument");
  const double umax = grid_.x_max();
  if (u > umax * (1.0 + 1e-12) + 1e-12) {
    if (extrapolate_ && kappa_ > 0.0) return kappa_;
    fail(Errc::beyond_grid, "T' evaluated past the solved grid");
  }
  return pl_value(Tp_, grid_.h, std::clamp(u, 0.0, umax));
}

double FluidSolution::Tp_lattice(std::size_t k) const {
  return k <= grid_.n ? Tp_[k] : kappa_;
}

double FluidSolution::S_bar(double t) const {
  if (t < -1e-12) fail(Errc::invalid_argument, "S: negative time");
  if (degenerate_)
    fail(Errc::invalid_argument,
         "S is undefined for the zero initial condition");
  if (t <= 0.0) return 0.0;
  const double top = Tbar_.back();
  if (t >= top) {
    if (t <= top * (1.0 + 1e-12) + 1e-12) return grid_.x_max();
    if (extrapolate_ && kappa_ > 0.0)
      return grid_.x_max() + (t - top) / kappa_;
    fail(Errc::beyond_grid,
         "time beyond the solved horizon (enlarge u_max or extrapolate)");
  }
  auto it = std::lower_bound(Tbar_.begin(), Tbar_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - Tbar_.begin());
  // Tbar_[0] = 0 < t, so k >= 1 here.
  const double lo = Tbar_[k - 1], hi = Tbar_[k];
  const double w = hi > lo ? (t - lo) / (hi - lo) : 1.0;
  return grid_.node(k - 1) + w * grid_.h;
}

double FluidSolution::Z_bar(double t) const {
  if (degenerate_) return 0.0;
  if (t <= 0.0) return Tp_[0];
  return T_bar_prime_at(S_bar(t));
}

GridMeasure FluidSolution::measure_at(double t) const {
  if (degenerate_) return GridMeasure::zero(snap_);
  const double S = S_bar(t);
  const double ZS = T_bar_prime_at(S);
  const double h = grid_.h;
  const auto m = static_cast<std::size_t>(std::floor(S / h + 1e-12));
  const double frac = std::max(S - static_cast<double>(m) * h, 0.0);
  const std::size_t c = snap_mult_;
  const std::size_t nx = snap_.n;
  const double X = snap_.x_max();

  // Excess-lifetime kernels on the lattice frac + i*h shared by every
  // snapshot abscissa (each x_j is a whole number of solve cells).
  const std::size_t L = m + nx * c;
  std::vector<double> fe_lat(L + 1), fet_lat(L + 1);
  parallel_for(L + 1, [&](std::size_t i) {
    const double x = frac + static_cast<double>(i) * h;
    fe_lat[i] = dist_.excess_density(x);
    fet_lat[i] = dist_.excess_tail(x);
  });
  std::vector<double> fe0(nx + 1);
  for (std::size_t j = 0; j <= nx; ++j)
    fe0[j] = dist_.excess_density(snap_.node(j));

  // J[j] = int_0^S f_e(x_j + y) T'(S - y) dy via z = S - y, so every kernel
  // argument lands on the shared lattice; the leftover cell [mh, S] is a
  // short trapezoid with exact endpoints.  All nx+1 sums read the same
  // kernel at shifted offsets, so past a size cutoff one full convolution
  // replaces the direct loops (same sums, fast arithmetic).
  std::vector<double> J(nx + 1);
  if (m >= 1 &&
      static_cast<double>(nx + 1) * static_cast<double>(m) > 2e7) {
    std::vector<double> tp(m + 1);
    for (std::size_t k = 0; k <= m; ++k) tp[k] = Tp_lattice(k);
    const std::vector<double> z = fft_convolve(fe_lat, tp);
    for (std::size_t j = 0; j <= nx; ++j) {
      const std::size_t jc = j * c;
      const double sum = z[m + jc] - 0.5 * fe_lat[m + jc] * tp[0] -
                         0.5 * fe_lat[jc] * tp[m];
      J[j] = h * sum + 0.5 * frac * (fe_lat[jc] * tp[m] + fe0[j] * ZS);
    }
  } else {
    parallel_for(nx + 1, [&](std::size_t j) {
      const std::size_t jc = j * c;
      double sum = 0.0;
      if (m >= 1) {
        sum =
            0.5 * (fe_lat[m + jc] * Tp_lattice(0) + fe_lat[jc] * Tp_lattice(m));
        for (std::size_t k = 1; k < m; ++k)
          sum += fe_lat[m - k + jc] * Tp_lattice(k);
      }
      J[j] = h * sum +
             0.5 * frac * (fe_lat[jc] * Tp_lattice(m) + fe0[j] * ZS);
    });
  }

  const double xiS = xi_.cdf_at(S);
  std::vector<double> cdf(nx + 1, 0.0);
  for (std::size_t j = 1; j <= nx; ++j) {
    const double raw = (xi_.cdf_at(S + snap_.node(j)) - xiS) + (J[0] - J[j]);
    cdf[j] = std::max(cdf[j - 1], raw);
  }

  const double xi_tail = xi_.tail_mass_at(S + X);
  const double tail = xi_tail + J[nx];

  // First moment beyond X: translated-initial part plus the served-mass
  // kernel integral, each split as (x - X)^+ contribution + X * mass.
  double conv = 0.0;
  const std::size_t off = nx * c;
  if (m >= 1) {
    conv = 0.5 * (fet_lat[m + off] * Tp_lattice(0) +
                  fet_lat[off] * Tp_lattice(m));
    for (std::size_t k = 1; k < m; ++k)
      conv += fet_lat[m - k + off] * Tp_lattice(k);
  }
  const double tail_excess =
      h * conv +
      0.5 * frac * (fet_lat[off] * Tp_lattice(m) + dist_.excess_tail(X) * ZS);
  const double w_tail = (workload_.value - xi_.truncated_workload(S + X)) +
                        X * xi_tail + tail_excess + X * J[nx];

  std::map<double, double> bounds{{0.0, tail}, {1.0, w_tail}};
  return GridMeasure::from_cdf_nodes(snap_, std::move(cdf), tail,
                                     std::move(bounds), xi_.tail_exact());
}

double FluidSolution::workload_at(double t) const {
  if (degenerate_) return 0.0;
  const double S = S_bar(t);
  const double ZS = T_bar_prime_at(S);
  const double h = grid_.h;
  const auto m = static_cast<std::size_t>(std::floor(S / h + 1e-12));
  const double frac = std::max(S - static_cast<double>(m) * h, 0.0);
  std::vector<double> fet0(m + 1);
  parallel_for(m + 1, [&](std::size_t i) {
    fet0[i] = dist_.excess_tail(frac + static_cast<double>(i) * h);
  });
  double sum = 0.0;
  if (m >= 1) {
    sum = 0.5 * (fet0[m] * Tp_lattice(0) + fet0[0] * Tp_lattice(m));
    for (std::size_t k = 1; k < m; ++k) sum += fet0[m - k] * Tp_lattice(k);
  }
  const double served =
      h * sum + 0.5 * frac * (fet0[0] * Tp_lattice(m) + 1.0 * ZS);
  return (workload_.value - xi_.truncated_workload(S)) + served;
}

double FluidSolution::dynamic_residual(const TestFunction& g, double t) const {
  if (degenerate_)
    fail(Errc::invalid_argument,
         "dynamic residual needs a nonzero initial condition");
  if (t < 0.0) fail(Errc::invalid_argument, "dynamic residual: negative time");
  if (xi_.tail_mass() > 0.0)
    fail(Errc::beyond_grid,
         "dynamic residual: initial measure must be fully resolved on its grid");
  if (t == 0.0) return 0.0;

  const double St = S_bar(t);
  const double h = grid_.h;
  const double alpha = dist_.alpha();

  // <phi, mu(s)> restricted to the translated initial part: integrate
  // phi(v - S) against the piecewise-constant density of xi beyond S.
  const auto& cd = xi_.cdf();
  const double hx = xi_.h();
  auto xi_part = [&](double S, const std::function<double(double)>& phi) {
    double acc = 0.0;
    std::size_t k0 =
        S <= 0.0 ? 0
                 : std::min(static_cast<std::size_t>(std::floor(S / hx)),
                            xi_.grid().n);
    for (std::size_t k = k0; k + 1 < cd.size(); ++k) {
      const double d = cd[k + 1] - cd[k];
      if (d <= 0.0) continue;
      const double l = std::max(xi_.grid().node(k), S);
      const double r = xi_.grid().node(k + 1);
      if (r <= l) continue;
      const double mid = 0.5 * (l + r);
      acc += d / hx * (r - l) / 6.0 *
             (phi(l - S) + 4.0 * phi(mid - S) + phi(r - S));
    }
    return acc;
  };

  // Phi tables against the service density on the y-lattice: Phi_phi(y) =
  // int phi(x) f(x + y) dx, smooth in y, interpolated where needed.
  const double support = dist_.support_end();
  auto cut_for = [&](const std::function<double(double)>& envelope) {
    if (std::isfinite(support)) return support;
    double X = 64.0;
    while (envelope(X) * (1.0 - dist_.cdf(X)) > 1e-12 && X < 1e9) X *= 2.0;
    return X;
  };
  const std::vector<double> dbp = dist_.density_breakpoints();
  auto phi_table = [&](const std::function<double(double)>& phi, double X,
                       std::size_t count) {
    std::vector<double> tab(count);
    parallel_for(count, [&](std::size_t k) {
      const double y = static_cast<double>(k) * h;
      const double top = std::isfinite(support) ? std::max(support - y, 0.0) : X;
      if (top <= 0.0) {
        tab[k] = 0.0;
        return;
      }
      std::vector<double> bps;
      for (double b : dbp)
        if (b - y > 0.0 && b - y < top) bps.push_back(b - y);
      tab[k] = integrate([&](double x) { return phi(x) * dist_.density(x + y); },
                         0.0, top, 1e-9, bps);
    });
    return tab;
  };
  const auto mt = static_cast<std::size_t>(std::floor(St / h + 1e-12));
  const std::size_t count = mt + 2;
  const std::vector<double> phi_g =
      phi_table(g.g, cut_for([&](double X) { return g.tail_bound_g(X); }),
                count);
  const std::vector<double> phi_gp = phi_table(
      g.g_prime, cut_for([&](double X) { return g.tail_bound_g_prime(X); }),
      count);

  auto conv_with = [&](double S, const std::vector<double>& phi) {
    const auto mi = static_cast<std::size_t>(std::floor(S / h + 1e-12));
    const double fr = std::max(S - static_cast<double>(mi) * h, 0.0);
    double sum = 0.0;
    if (mi >= 1) {
      sum = 0.5 * (T_bar_prime_at(S) * phi[0] + T_bar_prime_at(fr) * phi[mi]);
      for (std::size_t k = 1; k < mi; ++k)
        sum += T_bar_prime_at(S - static_cast<double>(k) * h) * phi[k];
    }
    double val = h * sum;
    if (fr > 0.0) {
      const double phiS = pl_value(phi, h, S);
      val += 0.5 * fr * (T_bar_prime_at(fr) * phi[mi] + Tp_[0] * phiS);
    }
    return val;
  };

  const double g_xi = xi_part(0.0, g.g);
  const double g_mu_t = xi_part(St, g.g) + alpha * conv_with(St, phi_g);
  const double g_nu = phi_g[0];

  const auto nt = static_cast<std::size_t>(std::ceil(t / h - 1e-12));
  const double ht = t / static_cast<double>(nt);
  double integral = 0.0;
  for (std::size_t i = 0; i <= nt; ++i) {
    const double s = i == nt ? t : static_cast<double>(i) * ht;
    const double Ss = i == 0 ? 0.0 : S_bar(s);
    const double Zs = i == 0 ? Tp_[0] : T_bar_prime_at(Ss);
    const double Is = xi_part(Ss, g.g_prime) + alpha * conv_with(Ss, phi_gp);
    const double w = (i == 0 || i == nt) ? 0.5 : 1.0;
    integral += w * Is / Zs;
  }
  integral *= ht;

  return g_mu_t - g_xi + integral - alpha * t * g_nu;
}

StationarityGap FluidSolution::stationarity_gap(double r) const {
  if (r < -1e-12)
    fail(Errc::invalid_argument, "stationarity gap: negative start");
  const double umax = grid_.x_max();
  if (r > umax * (1.0 + 1e-12) + 1e-12)
    fail(Errc::out_of_range, "stationarity gap: start beyond the grid");
  r = std::clamp(r, 0.0, umax);
  const double h = grid_.h;
  auto k0 = static_cast<std::size_t>(std::ceil(r / h - 1e-12));
  k0 = std::min(k0, grid_.n);
  double value = 0.0;
  if (grid_.node(k0) > r && k0 >= 1) {
    const double a = std::fabs(pl_value(Tp_, h, r) - kappa_);
    const double b = std::fabs(Tp_[k0] - kappa_);
    value += 0.5 * (grid_.node(k0) - r) * (a + b);
  }
  for (std::size_t k = k0; k < grid_.n; ++k)
    value += 0.5 * h *
             (std::fabs(Tp_[k] - kappa_) + std::fabs(Tp_[k + 1] - kappa_));
  return {value, umax};
}

GridMeasure FluidSolution::limit_state() const {
  return scaled_excess(dist_, kappa_, snap_);
}

FluidSolution solve(const GridMeasure& xi, const ServiceDistribution& d,
                    double h, double u_max, const SolveOptions& opts) {
  FluidSolution sol(xi, d);
  if (xi.total_mass() > 0.0)
    sol.U_ = std::make_shared<const RenewalFunction>(
        compute_renewal_function(d, h, u_max));
  sol.build(Grid(h, u_max), opts);
  return sol;
}

FluidSolution solve(const GridMeasure& xi, const ServiceDistribution& d,
                    std::shared_ptr<const RenewalFunction> U,
                    const SolveOptions& opts) {
  if (!U) fail(Errc::invalid_argument, "solve: missing renewal function");
  FluidSolution sol(xi, d);
  sol.U_ = std::move(U);
  sol.build(sol.U_->grid, opts);
  return sol;
}

}  // namespace fluidps
