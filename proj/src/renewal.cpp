#include "fluidps/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fluidps {

namespace {

// Index one past the last strictly positive entry, so convolution loops can
// skip the exactly-zero part of a kernel with bounded support.
std::size_t support_window(const std::vector<double>& kernel) {
  std::size_t w = kernel.size();
  while (w > 0 && kernel[w - 1] == 0.0) --w;
  return w;
}

// Direct evaluation above this many multiply-adds is replaced by the FFT
// paths below; the crossover is rough, both sides are exact evaluations of
// the same sums.
constexpr double kDirectBudget = 1e8;

// State shared by the divide-and-conquer evaluation of the density
// recursion.  acc[k] carries sum_{1 <= j < l} fe[k-j] m[j] whenever a block
// starting at l is entered, so the block only ever looks at its own indices.
struct CdqState {
  const std::vector<double>& fe;
  std::vector<double>& m;
  std::vector<double> acc;
  double h;
  double denom;
  std::size_t wf;
};

constexpr std::size_t kCdqBase = 512;

void cdq_solve(CdqState& st, std::size_t l, std::size_t r) {
  if (r - l + 1 <= kCdqBase) {
    for (std::size_t k = l; k <= r; ++k) {
      double s = st.acc[k] + 0.5 * st.fe[k] * st.m[0];
      const std::size_t jlo = std::max(l, k + 1 > st.wf ? k + 1 - st.wf : 1);
      for (std::size_t j = jlo; j < k; ++j) s += st.fe[k - j] * st.m[j];
      st.m[k] = (st.fe[k] + st.h * s) / st.denom;
    }
    return;
  }
  const std::size_t mid = l + (r - l) / 2;
  cdq_solve(st, l, mid);
  // push m[l..mid] into acc[mid+1..r]; offsets k-j live in [1, r-l], and the
  // kernel is zero at or past wf
  if (st.wf > 1) {
    const std::size_t klen = std::min(r - l, st.wf - 1);
    const std::size_t xlen = mid - l + 1;
    if (static_cast<double>(xlen) * static_cast<double>(klen) <= 65536.0) {
      for (std::size_t k = mid + 1; k <= r; ++k) {
        const std::size_t jlo = std::max(l, k > klen ? k - klen : std::size_t{0});
        for (std::size_t j = jlo; j <= mid; ++j)
          st.acc[k] += st.fe[k - j] * st.m[j];
      }
    } else {
      std::vector<double> x(st.m.begin() + static_cast<std::ptrdiff_t>(l),
                            st.m.begin() + static_cast<std::ptrdiff_t>(mid + 1));
      std::vector<double> y(st.fe.begin() + 1,
                            st.fe.begin() + static_cast<std::ptrdiff_t>(klen + 1));
      const std::vector<double> z = fft_convolve(x, y);
      // z[t] collects fe[k-j] m[j] for k = l + 1 + t
      for (std::size_t k = mid + 1; k <= r; ++k) {
        const std::size_t t = k - l - 1;
        if (t < z.size()) st.acc[k] += z[t];
      }
    }
  }
  cdq_solve(st, mid + 1, r);
}

// out[k] = sum_{j=0..k} a[k-j] b[j] for k <= n, evaluated directly or by one
// FFT pass depending on size.
std::vector<double> full_convolution(const std::vector<double>& a,
                                     const std::vector<double>& b,
                                     std::size_t wa) {
  const std::size_t n = a.size() - 1;
  std::vector<double> out(n + 1, 0.0);
  const double cost = static_cast<double>(n + 1) *
                      static_cast<double>(std::min(wa, n + 1));
  if (cost <= kDirectBudget) {
    parallel_for(n + 1, [&](std::size_t k) {
      double s = 0.0;
      const std::size_t jlo = k + 1 > wa ? k + 1 - wa : 0;
      for (std::size_t j = jlo; j <= k; ++j) s += a[k - j] * b[j];
      out[k] = s;
    });
    return out;
  }
  const std::vector<double> z = fft_convolve(a, b);
  for (std::size_t k = 0; k <= n; ++k) out[k] = z[k];
  return out;
}

}  // namespace

double RenewalFunction::value_at(double u) const {
  return pl_value(values, grid.h, u);
}

double RenewalFunction::density_at(double u) const {
  return pl_value(density, grid.h, u);
}

RenewalFunction compute_renewal_function(const ServiceDistribution& d, double h,
                                         double u_max) {
  if (!(h > 0.0)) fail(Errc::invalid_argument, "renewal: step must be positive");
  if (!(u_max >= 1.0)) fail(Errc::invalid_argument, "renewal: u_max must be >= 1");

  RenewalFunction out;
  out.grid = Grid(h, u_max);
  const std::size_t n = out.grid.n;

  std::vector<double> fe(n + 1);
  for (std::size_t k = 0; k <= n; ++k) fe[k] = d.excess_density(out.grid.node(k));
  const double denom = 1.0 - 0.5 * h * fe[0];
  if (denom <= 0.0)
    fail(Errc::divergent_scheme,
         "renewal: step too large for the implicit trapezoid scheme (h*alpha/2 >= 1)");
  const std::size_t wf = support_window(fe);

  std::vector<double>& m = out.density;
  m.assign(n + 1, 0.0);
  m[0] = fe[0];
  const double solve_cost = static_cast<double>(n) *
                            static_cast<double>(std::min(wf, n + 1));
  if (n >= 1 && solve_cost <= kDirectBudget) {
    for (std::size_t k = 1; k <= n; ++k) {
      double s = 0.5 * fe[k] * m[0];
      const std::size_t jlo = k + 1 > wf ? k + 1 - wf : 1;
      for (std::size_t j = jlo; j < k; ++j) s += fe[k - j] * m[j];
      m[k] = (fe[k] + h * s) / denom;
    }
  } else if (n >= 1) {
    CdqState st{fe, m, std::vector<double>(n + 1, 0.0), h, denom, wf};
    cdq_solve(st, 1, n);
  }

  out.values = cumtrapz(m, h);
  for (double& v : out.values) v += 1.0;
  out.beta_e = d.beta_e();

  // Residual of U = 1 + F_e * dU, rewritten through U - 1 = int m as
  // int_0^u (1 - F_e)(u - s) m(s) ds - F_e(u); the same trapezoid weights
  // make the two forms algebraically identical.
  std::vector<double> tail(n + 1), fcdf(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    tail[k] = d.excess_tail(out.grid.node(k));
    fcdf[k] = d.excess_cdf(out.grid.node(k));
  }
  const std::size_t wt = support_window(tail);
  const std::vector<double> full = full_convolution(tail, m, wt);
  double cert = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double s = full[k] - 0.5 * tail[k] * m[0] - 0.5 * tail[0] * m[k];
    cert = std::max(cert, std::fabs(h * s - fcdf[k]));
  }
  out.residual_cert = cert;
  return out;
}

double blackwell_discrepancy(const RenewalFunction& U, double t, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    fail(Errc::invalid_argument, "blackwell discrepancy: s must be in [0,1]");
  if (!(t >= 0.0) || t + s > U.grid.x_max() * (1.0 + 1e-12) + 1e-12)
    fail(Errc::out_of_range, "blackwell discrepancy: t + s beyond the grid");
  if (U.beta_e <= 0.0)
    fail(Errc::invalid_argument,
         "blackwell discrepancy: renewal rate is zero (infinite excess mean), "
         "the linear centering is undefined");
  return U.value_at(t + s) - U.value_at(t) - U.beta_e * s;
}

std::vector<double> convolve_with_renewal(const RenewalFunction& U,
                                          const std::vector<double>& g) {
  if (g.size() != U.values.size())
    fail(Errc::grid_mismatch, "convolve: function not tabulated on U's grid");
  const std::size_t n = U.grid.n;
  const double h = U.grid.h;
  const std::vector<double>& m = U.density;
  const std::size_t wg = support_window(g);
  const std::vector<double> full = full_convolution(g, m, wg);
  std::vector<double> out(n + 1, 0.0);
  out[0] = g[0];
  for (std::size_t k = 1; k <= n; ++k) {
    const double s = full[k] - 0.5 * g[k] * m[0] - 0.5 * g[0] * m[k];
    out[k] = g[k] + h * s;
  }
  return out;
}

}  // namespace fluidps
