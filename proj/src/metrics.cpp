#include "fluidps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

namespace fluidps {

namespace {

// Brings two measures onto one grid: finer step (the coarser must be a whole
// multiple), larger extent.  Evaluating a piecewise-linear CDF on a nested
// finer grid is exact, so alignment loses nothing.
std::pair<GridMeasure, GridMeasure> align(const GridMeasure& a,
                                          const GridMeasure& b) {
  if (a.grid().same_as(b.grid())) return {a, b};
  const double hf = std::min(a.h(), b.h());
  const double hc = std::max(a.h(), b.h());
  const double ratio = hc / hf;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-9 * ratio)
    fail(Errc::grid_resample_failure,
         "incommensurate grid steps (no common refinement)");
  const Grid common(hf, std::max(a.x_max(), b.x_max()));
  try {
    return {a.resampled(common), b.resampled(common)};
  } catch (const Error& e) {
    if (e.code() == Errc::beyond_grid)
      fail(Errc::grid_resample_failure,
           "cannot extend a measure with unresolved tail onto the common grid");
    throw;
  }
}

// One direction of the Prohorov feasibility test at radius delta:
//   sup over unions of grid cells B of  zi(B) - zj(B^delta)
// computed by a linear sweep.  f(k) is the best objective over unions whose
// last run ends with cell k; a new run either merges its dilation with the
// previous run's (gap < 2 delta, sliding-window max over f(m) + Mj(r_m +
// delta)) or sits clear of it (prefix max over expired f(m), plus the fresh
// left-edge credit Mj(l_k - delta)).
double sweep_excess(const std::vector<double>& cdf_i,
                    const std::vector<double>& cdf_j, double h, double delta) {
  const std::size_t n = cdf_i.size() - 1;  // cells
  const double top_j = cdf_j.back();
  const double xmax = h * static_cast<double>(n);
  auto Mj = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= xmax) return top_j;
    return pl_value(cdf_j, h, x);
  };

  std::deque<std::pair<std::size_t, double>> window;  // (m, f(m)+Mj(r_m+delta))
  double expired_best = 0.0;  // max over expired f(m), empty union included
  double best = 0.0;
  std::vector<double> f(n + 1, 0.0);
  // Retirement must scan every m in order, not just deque survivors: an entry
  // dropped from the deque back (dominated as f(m)+Mj(r_m+delta)) can still
  // carry the largest bare f(m), which is what a fresh start reads.
  std::size_t retire = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    const double r_k = static_cast<double>(k) * h;
    const double l_k = r_k - h;
    // Cells m with r_m + delta < l_k - delta can no longer merge with k.
    while (retire < k) {
      const double r_m = static_cast<double>(retire) * h;
      if (r_m + delta >= l_k - delta - 1e-15) break;
      expired_best = std::max(expired_best, f[retire]);
      ++retire;
    }
    while (!window.empty() && window.front().first < retire)
      window.pop_front();
    double cand = expired_best + Mj(l_k - delta);
    if (!window.empty()) cand = std::max(cand, window.front().second);
    const double a_k = cdf_i[k] - cdf_i[k - 1];
    f[k] = a_k - Mj(r_k + delta) + cand;
    best = std::max(best, f[k]);
    const double entry = f[k] + Mj(r_k + delta);
    while (!window.empty() && window.back().second <= entry) window.pop_back();
    window.emplace_back(k, entry);
  }
  return best;
}

bool feasible(const std::vector<double>& c1, const std::vector<double>& c2,
              double h, double delta) {
  const double slack = delta + 1e-15;
  return sweep_excess(c1, c2, h, delta) <= slack &&
         sweep_excess(c2, c1, h, delta) <= slack;
}

}  // namespace

CertValue prohorov(const GridMeasure& z1, const GridMeasure& z2) {
  auto [a, b] = align(z1, z2);
  const double h = a.h();
  const std::vector<double>& c1 = a.cdf();
  const std::vector<double>& c2 = b.cdf();
  double lo = 0.0;
  double hi = std::max(a.total_mass(), b.total_mass());
  if (hi <= 0.0) return {0.0, a.tail_mass() + b.tail_mass()};
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(c1, c2, h, mid))
      hi = mid;
    else
      lo = mid;
  }
  const double cert = 2.0 * h + a.tail_mass() + b.tail_mass() + (hi - lo);
  return {0.5 * (lo + hi), cert};
}

CertValue total_variation(const GridMeasure& z1, const GridMeasure& z2) {
  auto [a, b] = align(z1, z2);
  const std::vector<double>& c1 = a.cdf();
  const std::vector<double>& c2 = b.cdf();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < c1.size(); ++k)
    sum += std::fabs((c1[k + 1] - c1[k]) - (c2[k + 1] - c2[k]));
  const double t1 = a.tail_mass(), t2 = b.tail_mass();
  // The unresolved tails contribute somewhere in [|t1-t2|, t1+t2].
  return {sum + std::max(t1, t2), std::min(t1, t2)};
}

RateReport fit_rate(const std::vector<double>& times,
                    const std::vector<double>& distances, double window_lo,
                    double window_hi) {
  if (times.size() != distances.size())
    fail(Errc::invalid_argument, "fit_rate: times/distances length mismatch");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      fail(Errc::invalid_argument, "fit_rate: times must be strictly increasing");

  RateReport rep;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_lo || times[i] > window_hi) continue;
    if (!(times[i] > 0.0))
      fail(Errc::invalid_argument, "fit_rate: window times must be positive");
    if (distances[i] < 0.0)
      fail(Errc::invalid_argument, "fit_rate: negative distance");
    rep.times.push_back(times[i]);
    rep.distances.push_back(distances[i]);
  }
  if (rep.times.size() < 5)
    fail(Errc::insufficient_samples,
         "fit_rate: need at least 5 samples in the window");

  std::vector<double> lt, ld;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.distances[i] > 0.0) {
      lt.push_back(std::log(rep.times[i]));
      ld.push_back(std::log(rep.distances[i]));
    } else {
      rep.excluded_times.push_back(rep.times[i]);
    }
  }
  if (lt.empty()) {
    rep.exact_convergence = true;
    return rep;
  }
  if (lt.size() < 2)
    fail(Errc::insufficient_samples,
         "fit_rate: need at least 2 nonzero distances to fit");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    mx += lt[i];
    my += ld[i];
  }
  mx /= static_cast<double>(lt.size());
  my /= static_cast<double>(lt.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    sxx += (lt[i] - mx) * (lt[i] - mx);
    sxy += (lt[i] - mx) * (ld[i] - my);
  }
  if (sxx <= 0.0)
    fail(Errc::insufficient_samples, "fit_rate: degenerate time samples");
  rep.slope = sxy / sxx;
  double c = 0.0;
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    if (rep.distances[i] > 0.0)
      c = std::max(c, rep.distances[i] / std::pow(rep.times[i], rep.slope));
  rep.constant = c;
  return rep;
}

double mass_bound_constant(double M, double C) {
  if (!(M > 0.0) || !(C >= 1.0))
    fail(Errc::invalid_argument, "mass bound: need M > 0 and C >= 1");
  const double b = M + 4.0 * C;
  return 0.5 * (b + std::sqrt(b * b + 8.0 * C));
}

double prohorov_atoms_exhaustive(const AtomicMeasure& a,
                                 const AtomicMeasure& b) {
  if (a.xs.size() != a.ws.size() || b.xs.size() != b.ws.size())
    fail(Errc::invalid_argument, "atomic measure: mismatched arrays");
  if (a.xs.size() > 20 || b.xs.size() > 20)
    fail(Errc::invalid_argument, "atomic oracle: too many atoms");
  auto direction_ok = [](const AtomicMeasure& p, const AtomicMeasure& q,
                         double delta) {
    const std::size_t n = p.xs.size();
    for (std::size_t mask = 1; mask < (1u << n); ++mask) {
      double pm = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) pm += p.ws[i];
      double qm = 0.0;
      for (std::size_t j = 0; j < q.xs.size(); ++j) {
        bool close = false;
        for (std::size_t i = 0; i < n && !close; ++i)
          close = (mask & (1u << i)) &&
                  std::fabs(q.xs[j] - p.xs[i]) <= delta + 1e-15;
        if (close) qm += q.ws[j];
      }
      if (pm > qm + delta + 1e-15) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 0.0;
  for (double w : a.ws) hi += w;
  double hb = 0.0;
  for (double w : b.ws) hb += w;
  hi = std::max(hi, hb);
  if (hi <= 0.0) return 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (direction_ok(a, b, mid) && direction_ok(b, a, mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

GridMeasure smear_atoms(const AtomicMeasure& a, const Grid& grid) {
  if (a.xs.size() != a.ws.size())
    fail(Errc::invalid_argument, "atomic measure: mismatched arrays");
  // Each atom (x, w) becomes mass w spread uniformly over its grid cell.
  std::vector<double> inc(grid.n, 0.0);
  for (std::size_t i = 0; i < a.xs.size(); ++i) {
    const double x = a.xs[i];
    const double w = a.ws[i];
    if (w < 0.0) fail(Errc::negative_mass, "atomic measure: negative weight");
    if (x < 0.0 || x >= grid.x_max())
      fail(Errc::out_of_range, "atom outside the smearing grid");
    const auto cell = std::min(
        static_cast<std::size_t>(std::floor(x / grid.h + 1e-12)), grid.n - 1);
    inc[cell] += w;
  }
  std::vector<double> cdf(grid.nodes(), 0.0);
  for (std::size_t k = 0; k < grid.n; ++k) cdf[k + 1] = cdf[k] + inc[k];
  return GridMeasure::from_cdf_nodes(grid, std::move(cdf), 0.0, {}, true);
}

}  // namespace fluidps
