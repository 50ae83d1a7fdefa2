#include "fluidps/common.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace fluidps {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_spec: return "malformed_spec";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::mass_at_origin: return "mass_at_origin";
    case Errc::infinite_mean: return "infinite_mean";
    case Errc::atom_in_spec: return "atom_in_spec";
    case Errc::negative_mass: return "negative_mass";
    case Errc::infinite_mass: return "infinite_mass";
    case Errc::tail_bound_missing: return "tail_bound_missing";
    case Errc::divergent_scheme: return "divergent_scheme";
    case Errc::grid_mismatch: return "grid_mismatch";
    case Errc::out_of_range: return "out_of_range";
    case Errc::beyond_grid: return "beyond_grid";
    case Errc::workload_infinite: return "workload_infinite";
    case Errc::test_function_invalid: return "test_function_invalid";
    case Errc::grid_resample_failure: return "grid_resample_failure";
    case Errc::insufficient_samples: return "insufficient_samples";
    case Errc::invalid_scale: return "invalid_scale";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& msg)
    : std::runtime_error(std::string("[") + errc_name(code) + "] " + msg),
      code_(code) {}

void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

Grid::Grid(double step, double x_max) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(Errc::invalid_argument, "grid step must be positive and finite");
  }
  if (!(x_max > 0.0) || !std::isfinite(x_max)) {
    fail(Errc::invalid_argument, "grid extent must be positive and finite");
  }
  h = step;
  n = static_cast<std::size_t>(std::llround(x_max / step));
  if (n == 0) n = 1;
  if (std::fabs(node(n) - x_max) > 1e-6 * std::max(1.0, x_max)) {
    fail(Errc::invalid_argument, "grid extent is not a whole number of steps");
  }
}

bool Grid::same_as(const Grid& o) const {
  return n == o.n && std::fabs(h - o.h) <= 1e-12 * std::max(h, o.h);
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt12(const ExtReal& v) {
  return v.is_infinite ? std::string("inf") : fmt12(v.value);
}

double trapz(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double acc = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
  return acc * h;
}

std::vector<double> cumtrapz(const std::vector<double>& y, double h) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 1; i < y.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
  }
  return out;
}

namespace {

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        // resync the twiddle periodically; pure accumulation drifts at
        // length ~1e6
        if ((j & 255u) == 0u && j != 0u)
          w = std::polar(1.0, ang * static_cast<double>(j));
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

}  // namespace

// Both spectra come out of one transform (a in the real lane, b in the
// imaginary lane), multiplied in place pairwise.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t nfft = std::bit_ceil(out_len);
  std::vector<std::complex<double>> p(nfft);
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = {a[i], 0.0};
  for (std::size_t i = 0; i < b.size(); ++i)
    p[i] += std::complex<double>(0.0, b[i]);
  fft(p, false);
  const std::size_t mask = nfft - 1;
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const std::size_t kk = (nfft - k) & mask;
    const std::complex<double> pk = p[k];
    const std::complex<double> qk = std::conj(p[kk]);
    const std::complex<double> xs = 0.5 * (pk + qk);
    const std::complex<double> ys = std::complex<double>(0.0, -0.5) * (pk - qk);
    const std::complex<double> z = xs * ys;
    p[k] = z;
    if (kk != k) p[kk] = std::conj(z);
  }
  fft(p, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = p[i].real();
  return out;
}

double pl_value(const std::vector<double>& y, double h, double x) {
  if (y.empty()) fail(Errc::invalid_argument, "pl_value on empty table");
  const double x_max = h * static_cast<double>(y.size() - 1);
  const double slack = 1e-9 * std::max(h, 1.0);
  if (x < -slack || x > x_max + slack) {
    fail(Errc::out_of_range, "pl_value: x=" + fmt12(x) + " outside [0," +
                                 fmt12(x_max) + "]");
  }
  const double clamped = std::clamp(x, 0.0, x_max);
  const double pos = clamped / h;
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= y.size() - 1) k = y.size() - 2;
  const double w = pos - static_cast<double>(k);
  return y[k] + w * (y[k + 1] - y[k]);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// force > 0 keeps subdividing even when the error estimate looks converged;
// integrands concentrated far from the initial sample points (for instance
// a sharp bump on a long interval) would otherwise be mistaken for zero.
double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double m, double fm, double whole,
             double tol, int depth, int force) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || (force <= 0 && std::fabs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1,
               force - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1,
               force - 1);
}

double integrate_piece(const std::function<double(double)>& f, double a,
                       double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  return adapt(f, a, fa, b, fb, m, fm, whole, tol, 48, 8);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, const std::vector<double>& breakpoints) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    total += integrate_piece(f, cuts[i], cuts[i + 1], tol * len / (b - a));
  }
  return total;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_number(const std::string& token) {
  if (token.empty()) fail(Errc::malformed_spec, "empty number");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) {
    fail(Errc::malformed_spec, "not a number: '" + token + "'");
  }
  return v;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replica,
                          std::uint64_t purpose) {
  std::uint64_t s = seed;
  std::uint64_t z = splitmix64(s);
  s ^= replica + 0x632BE59BD9B4E019ULL;
  z ^= splitmix64(s);
  s ^= purpose + 0x9E6C63D0876A9A47ULL;
  z ^= splitmix64(s);
  return z;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("FLUIDPS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fluidps
