#pragma once

// Shared plumbing for the fluid-model library: uniform grids, error codes,
// certified values, extended reals, quadrature helpers and seeding.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluidps {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Errc {
  malformed_spec,
  invalid_argument,
  mass_at_origin,
  infinite_mean,
  atom_in_spec,
  negative_mass,
  infinite_mass,
  tail_bound_missing,
  divergent_scheme,
  grid_mismatch,
  out_of_range,
  beyond_grid,
  workload_infinite,
  test_function_invalid,
  grid_resample_failure,
  insufficient_samples,
  invalid_scale,
  io_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& msg);

// Uniform grid over [0, n*h].  x_max passed to the constructor is snapped to
// the nearest whole number of cells so node(n) is always exactly n*h.
struct Grid {
  double h = 0.0;
  std::size_t n = 0;

  Grid() = default;
  Grid(double step, double x_max);

  double node(std::size_t k) const { return h * static_cast<double>(k); }
  double x_max() const { return node(n); }
  std::size_t nodes() const { return n + 1; }
  bool same_as(const Grid& o) const;
};

// Value plus a certified bound on its absolute error.
struct CertValue {
  double value = 0.0;
  double error = 0.0;
};

// A nonnegative quantity that may be +infinity (moments of heavy tails).
struct ExtReal {
  double value = 0.0;
  bool is_infinite = false;

  static ExtReal finite(double v) { return {v, false}; }
  static ExtReal infinite() { return {kInf, true}; }
};

// Shortest round-trip-ish formatting used by every CSV/JSON writer so output
// is byte-stable across runs.
std::string fmt12(double v);
std::string fmt12(const ExtReal& v);

double trapz(const std::vector<double>& y, double h);
std::vector<double> cumtrapz(const std::vector<double>& y, double h);

// Full linear convolution of two real sequences, out[k] = sum_j a[j] b[k-j],
// length a.size()+b.size()-1.  Radix-2 FFT under the hood; this is fast exact
// arithmetic for large sums, not a change of discretisation, so callers keep
// their own quadrature weights and endpoint corrections.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

// Piecewise-linear value of samples y on the uniform grid with step h.
// x must lie in [0, (y.size()-1)*h] up to rounding slack.
double pl_value(const std::vector<double>& y, double h, double x);

// Adaptive Simpson on [a,b].  Breakpoints inside (a,b) split the interval so
// kinks sit on subinterval ends; tol is split across pieces by length.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, const std::vector<double>& breakpoints = {});

// Splits on sep; keeps empty fields.  parse_number is strict: the whole
// token must consume, otherwise malformed_spec.
std::vector<std::string> split(const std::string& s, char sep);
double parse_number(const std::string& token);

std::uint64_t splitmix64(std::uint64_t& state);

// Stable 64-bit seed for (seed, replica, purpose) triples; used so simulator
// replicas are reproducible no matter how work is chunked across threads.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replica,
                          std::uint64_t purpose);

// Thread budget: FLUIDPS_THREADS if set (clamped to >=1), else hardware.
unsigned thread_budget();

// Runs body(i) for i in [0,n).  Work is split into contiguous chunks, one per
// thread, so any per-index output is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fluidps
