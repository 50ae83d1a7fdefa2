#include "fluidps/measure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <utility>

namespace fluidps {

namespace {

constexpr double kStandardTailKeys[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};

double power_integral(double gamma, double u, double v) {
  return (std::pow(v, gamma + 1.0) - std::pow(u, gamma + 1.0)) / (gamma + 1.0);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// key=value list separated by commas; values stay strings (csv paths).
std::map<std::string, std::string> parse_kv(const std::string& payload,
                                            const std::string& ctx) {
  std::map<std::string, std::string> out;
  for (const std::string& item : split(payload, ',')) {
    const std::string tok = trim(item);
    if (tok.empty()) fail(Errc::malformed_spec, ctx + ": empty item");
    std::size_t eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(Errc::malformed_spec, ctx + ": expected key=value, got '" + tok + "'");
    std::string key = trim(tok.substr(0, eq));
    std::string val = trim(tok.substr(eq + 1));
    if (!out.emplace(key, val).second)
      fail(Errc::malformed_spec, ctx + ": duplicate key '" + key + "'");
  }
  return out;
}

double kv_number(const std::map<std::string, std::string>& kv,
                 const std::string& key, const std::string& ctx) {
  auto it = kv.find(key);
  if (it == kv.end()) fail(Errc::malformed_spec, ctx + ": missing '" + key + "'");
  return parse_number(it->second);
}

void expect_keys(const std::map<std::string, std::string>& kv,
                 std::initializer_list<const char*> allowed,
                 const std::string& ctx) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || (k == a);
    if (!ok) fail(Errc::malformed_spec, ctx + ": unknown key '" + k + "'");
  }
}

}  // namespace

GridMeasure GridMeasure::from_cdf_nodes(const Grid& grid,
                                        std::vector<double> cdf,
                                        double tail_mass,
                                        std::map<double, double> tail_bounds,
                                        bool tail_exact) {
  if (grid.h <= 0.0 || grid.n == 0)
    fail(Errc::invalid_argument, "measure grid must have positive extent");
  if (cdf.size() != grid.nodes())
    fail(Errc::grid_mismatch, "cdf node count does not match the grid");
  for (double v : cdf)
    if (!std::isfinite(v)) fail(Errc::infinite_mass, "non-finite cdf value");
  if (!std::isfinite(tail_mass)) fail(Errc::infinite_mass, "non-finite tail mass");
  if (cdf[0] != 0.0) {
    if (std::fabs(cdf[0]) > 1e-12)
      fail(Errc::atom_in_spec, "cdf(0) must be 0 (atomless at the origin)");
    cdf[0] = 0.0;
  }
  const double scale = std::max(1.0, std::fabs(cdf.back()));
  for (std::size_t k = 1; k < cdf.size(); ++k) {
    if (cdf[k] < cdf[k - 1] - 1e-12 * scale)
      fail(Errc::negative_mass, "cdf decreases between nodes");
    cdf[k] = std::max(cdf[k], cdf[k - 1]);
  }
  if (tail_mass < -1e-12 * scale)
    fail(Errc::negative_mass, "negative tail mass");
  tail_mass = std::max(tail_mass, 0.0);

  GridMeasure z;
  z.grid_ = grid;
  z.cdf_ = std::move(cdf);
  z.tail_mass_ = tail_mass;
  z.tail_exact_ = tail_exact;
  if (tail_mass > 0.0) {
    tail_bounds.emplace(0.0, tail_mass);  // no-op when already present
    for (auto& [gamma, bound] : tail_bounds) {
      if (!std::isfinite(bound))
        fail(Errc::infinite_mass, "non-finite tail moment bound");
      // Consistency floor: all tail mass sits at x_max or beyond.
      bound = std::max(bound, tail_mass * std::pow(grid.x_max(), gamma));
    }
    z.tail_bounds_ = std::move(tail_bounds);
  }
  return z;
}

GridMeasure GridMeasure::zero(const Grid& grid) {
  return from_cdf_nodes(grid, std::vector<double>(grid.nodes(), 0.0), 0.0, {},
                        true);
}

GridMeasure GridMeasure::uniform_density(double a, double b, double mass,
                                         const Grid& grid) {
  if (!(a >= 0.0) || !(b > a))
    fail(Errc::invalid_argument, "uniform density needs 0 <= a < b");
  if (!std::isfinite(mass)) fail(Errc::infinite_mass, "non-finite mass");
  if (mass < 0.0) fail(Errc::negative_mass, "negative mass");
  std::vector<double> cdf(grid.nodes());
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    double x = grid.node(k);
    cdf[k] = mass * std::clamp((x - a) / (b - a), 0.0, 1.0);
  }
  double tail_mass = 0.0;
  std::map<double, double> bounds;
  const double xm = grid.x_max();
  if (b > xm && mass > 0.0) {
    const double lo = std::max(a, xm);
    const double density = mass / (b - a);
    tail_mass = density * (b - lo);
    for (double g : kStandardTailKeys)
      bounds[g] = density * power_integral(g, lo, b);
  }
  return from_cdf_nodes(grid, std::move(cdf), tail_mass, std::move(bounds),
                        true);
}

GridMeasure GridMeasure::pareto_tail(double xm, double p, double mass,
                                     const Grid& grid) {
  if (!(xm > 0.0) || !(p > 0.0))
    fail(Errc::invalid_argument, "pareto tail needs xm > 0 and p > 0");
  if (!std::isfinite(mass)) fail(Errc::infinite_mass, "non-finite mass");
  if (mass < 0.0) fail(Errc::negative_mass, "negative mass");
  std::vector<double> cdf(grid.nodes());
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    double x = grid.node(k);
    cdf[k] = x <= xm ? 0.0 : mass * (1.0 - std::pow(xm / x, p));
  }
  double tail_mass = 0.0;
  std::map<double, double> bounds;
  if (mass > 0.0) {
    const double lo = std::max(xm, grid.x_max());
    tail_mass = mass * std::pow(xm / lo, p);
    for (double g : kStandardTailKeys) {
      if (g >= p - 1e-9) break;  // moment infinite from here on
      bounds[g] = mass * p * std::pow(xm, p) * std::pow(lo, g - p) / (p - g);
    }
  }
  return from_cdf_nodes(grid, std::move(cdf), tail_mass, std::move(bounds),
                        true);
}

GridMeasure GridMeasure::from_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open measure file: " + path);
  std::vector<double> xs, fs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (first) {
      first = false;
      const char c = t[0];
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
            c == '+' || c == '.'))
        continue;  // header row
    }
    std::vector<std::string> cols = split(t, ',');
    if (cols.size() != 2)
      fail(Errc::malformed_spec, "measure csv rows need two columns: " + path);
    xs.push_back(parse_number(trim(cols[0])));
    fs.push_back(parse_number(trim(cols[1])));
  }
  if (xs.size() < 2)
    fail(Errc::malformed_spec, "measure csv needs at least two rows: " + path);
  if (xs[0] != 0.0)
    fail(Errc::malformed_spec, "measure csv must start at x = 0: " + path);
  if (fs[0] != 0.0)
    fail(Errc::atom_in_spec, "measure csv has mass at the origin: " + path);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1]))
      fail(Errc::malformed_spec, "measure csv x not strictly increasing");
    if (fs[i] < fs[i - 1] - 1e-12)
      fail(Errc::negative_mass, "measure csv cdf decreases");
    if (!std::isfinite(fs[i]) || !std::isfinite(xs[i]))
      fail(Errc::infinite_mass, "measure csv has a non-finite entry");
  }
  if (xs.back() > grid.x_max() * (1.0 + 1e-12) + 1e-12)
    fail(Errc::beyond_grid, "measure csv support extends past the grid");

  std::vector<double> cdf(grid.nodes());
  std::size_t j = 0;
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    const double x = grid.node(k);
    while (j + 1 < xs.size() && xs[j + 1] <= x) ++j;
    if (j + 1 >= xs.size() || x <= xs[0]) {
      cdf[k] = x >= xs.back() ? fs.back() : fs[0];
    } else {
      const double w = (x - xs[j]) / (xs[j + 1] - xs[j]);
      cdf[k] = fs[j] + w * (fs[j + 1] - fs[j]);
    }
  }
  return from_cdf_nodes(grid, std::move(cdf), 0.0, {}, true);
}

double GridMeasure::cdf_at(double x) const {
  if (x < -1e-12) fail(Errc::invalid_argument, "cdf_at: negative argument");
  if (x <= 0.0) return 0.0;
  const double xm = x_max();
  if (x >= xm) {
    if (tail_mass_ > 0.0 && x > xm * (1.0 + 1e-12) + 1e-12)
      fail(Errc::beyond_grid, "cdf_at: point beyond the grid with tail mass");
    return cdf_.back();
  }
  return pl_value(cdf_, grid_.h, x);
}

CertValue GridMeasure::moment(double gamma) const {
  if (!(gamma >= 0.0)) fail(Errc::invalid_argument, "moment: gamma must be >= 0");
  double grid_part = 0.0;
  for (std::size_t k = 0; k + 1 < cdf_.size(); ++k) {
    const double d = cdf_[k + 1] - cdf_[k];
    if (d > 0.0)
      grid_part +=
          d / grid_.h * power_integral(gamma, grid_.node(k), grid_.node(k + 1));
  }
  if (tail_mass_ <= 0.0) return {grid_part, 0.0};
  if (gamma == 0.0) return {grid_part + tail_mass_, 0.0};

  const double xm = x_max();
  // Upper bound from the registered keys: exact hit, or log-convex
  // interpolation between the bracketing keys.
  double upper = -1.0;
  bool exact_hit = false;
  auto hit = tail_bounds_.lower_bound(gamma - 1e-12);
  if (hit != tail_bounds_.end() && std::fabs(hit->first - gamma) <= 1e-12) {
    upper = hit->second;
    exact_hit = true;
  } else {
    auto up = tail_bounds_.upper_bound(gamma);
    if (up == tail_bounds_.end())
      fail(Errc::tail_bound_missing,
           "no tail moment bound registered at or above gamma");
    if (up == tail_bounds_.begin())
      fail(Errc::tail_bound_missing, "no tail moment bound below gamma");
    auto lo = std::prev(up);
    const double theta = (up->first - gamma) / (up->first - lo->first);
    upper = std::pow(lo->second, theta) * std::pow(up->second, 1.0 - theta);
  }
  if (exact_hit && tail_exact_) return {grid_part + upper, 0.0};

  double lower = tail_mass_ * std::pow(xm, gamma);
  if (tail_exact_) {
    // Registered values are exact, so each key below gamma lifts the floor.
    for (auto it = tail_bounds_.begin();
         it != tail_bounds_.end() && it->first <= gamma + 1e-12; ++it)
      lower = std::max(lower, it->second * std::pow(xm, gamma - it->first));
  }
  lower = std::min(lower, upper);
  return {grid_part + 0.5 * (upper + lower), 0.5 * (upper - lower)};
}

double GridMeasure::truncated_workload(double x) const {
  if (x < -1e-12) fail(Errc::invalid_argument, "truncated_workload: x < 0");
  const double xm = x_max();
  if (x > xm * (1.0 + 1e-12) + 1e-12) {
    if (tail_mass_ > 0.0)
      fail(Errc::beyond_grid,
           "truncated_workload: point beyond the grid with tail mass");
    x = xm;  // integrand is zero past the support
  }
  x = std::clamp(x, 0.0, xm);
  const double total = total_mass();
  const std::size_t kfull = std::min(
      static_cast<std::size_t>(std::floor(x / grid_.h + 1e-12)), grid_.n);
  double acc = 0.0;
  for (std::size_t k = 0; k < kfull; ++k)
    acc += grid_.h * (total - 0.5 * (cdf_[k] + cdf_[k + 1]));
  const double t = x - grid_.node(kfull);
  if (kfull < grid_.n && t > 0.0) {
    const double slope = (cdf_[kfull + 1] - cdf_[kfull]) / grid_.h;
    acc += t * (total - cdf_[kfull]) - 0.5 * slope * t * t;
  }
  return acc;
}

double GridMeasure::tail_mass_at(double x) const {
  if (x <= 0.0) return total_mass();
  const double xm = x_max();
  if (x >= xm) {
    if (tail_mass_ > 0.0 && x > xm * (1.0 + 1e-12) + 1e-12)
      fail(Errc::beyond_grid,
           "tail_mass_at: point beyond the grid with tail mass");
    return tail_mass_;
  }
  return total_mass() - pl_value(cdf_, grid_.h, x);
}

bool GridMeasure::in_moment_ball(double M, double eps, Ball which) const {
  if (!(M > 0.0) || !(eps > 0.0))
    fail(Errc::invalid_argument, "in_moment_ball: M and eps must be positive");
  std::vector<double> gammas = {0.0, 1.0, 1.0 + eps};
  if (which == Ball::tv) {
    gammas.push_back(2.0);
    gammas.push_back(2.0 + eps);
  }
  for (double g : gammas) {
    CertValue m;
    try {
      m = moment(g);
    } catch (const Error& e) {
      if (e.code() == Errc::tail_bound_missing) return false;
      throw;
    }
    if (m.value + m.error > M) return false;
  }
  return true;
}

GridMeasure GridMeasure::resampled(const Grid& to) const {
  if (to.same_as(grid_)) return *this;
  if (to.x_max() > x_max() * (1.0 + 1e-12) + 1e-12 && tail_mass_ > 0.0)
    fail(Errc::beyond_grid,
         "resampled: cannot extend a measure whose tail shape is unknown");

  std::vector<double> cdf(to.nodes());
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    const double x = std::min(to.node(k), x_max());
    cdf[k] = pl_value(cdf_, grid_.h, x);
  }
  double tail_mass = tail_mass_;
  std::map<double, double> bounds = tail_bounds_;
  if (to.x_max() < x_max() * (1.0 - 1e-12)) {
    const double cut = to.x_max();
    const double strip = cdf_.back() - pl_value(cdf_, grid_.h, cut);
    tail_mass += strip;
    // Exact piecewise-linear moments of the strip (cut, x_max].
    auto strip_moment = [&](double g) {
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < cdf_.size(); ++k) {
        const double r = grid_.node(k + 1);
        if (r <= cut) continue;
        const double l = std::max(grid_.node(k), cut);
        const double d = cdf_[k + 1] - cdf_[k];
        if (d > 0.0) acc += d / grid_.h * power_integral(g, l, r);
      }
      return acc;
    };
    if (tail_mass_ > 0.0) {
      for (auto& [g, b] : bounds) b += strip_moment(g);
    } else {
      bounds.clear();
      for (double g : kStandardTailKeys) bounds[g] = strip_moment(g);
    }
  }
  return from_cdf_nodes(to, std::move(cdf), tail_mass, std::move(bounds),
                        tail_exact_);
}

double GridMeasure::quantile(double u) const {
  const double top = cdf_.back();
  if (u < -1e-12 || u > top + 1e-12)
    fail(Errc::out_of_range, "quantile: level outside [0, grid mass]");
  u = std::clamp(u, 0.0, top);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  if (k == 0) return 0.0;
  const double lo = cdf_[k - 1], hi = cdf_[k];
  const double w = hi > lo ? (u - lo) / (hi - lo) : 0.0;
  return grid_.node(k - 1) + w * grid_.h;
}

GridMeasure scaled_excess(const ServiceDistribution& d, double c,
                          const Grid& grid) {
  if (!(c >= 0.0)) fail(Errc::negative_mass, "scaled excess: c must be >= 0");
  if (c == 0.0) return GridMeasure::zero(grid);
  std::vector<double> cdf(grid.nodes());
  for (std::size_t k = 0; k < cdf.size(); ++k)
    cdf[k] = c * d.excess_cdf(grid.node(k));
  const double tail_mass = c * d.excess_tail(grid.x_max());
  std::map<double, double> bounds;
  if (tail_mass > 0.0) {
    for (int k = 0; k <= 3; ++k) {
      ExtReal m = d.excess_tail_moment(k, grid.x_max());
      if (!m.is_infinite) bounds[static_cast<double>(k)] = c * m.value;
    }
  }
  return GridMeasure::from_cdf_nodes(grid, std::move(cdf), tail_mass,
                                     std::move(bounds), true);
}

GridMeasure add(const GridMeasure& a, const GridMeasure& b) {
  if (!a.grid().same_as(b.grid()))
    fail(Errc::grid_mismatch, "add: measures live on different grids");
  std::vector<double> cdf(a.cdf().size());
  for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = a.cdf()[k] + b.cdf()[k];
  const double tail = a.tail_mass() + b.tail_mass();
  std::map<double, double> bounds;
  bool exact = a.tail_exact() && b.tail_exact();
  if (a.tail_mass() == 0.0) {
    bounds = b.tail_moment_bounds();
    exact = b.tail_exact();
  } else if (b.tail_mass() == 0.0) {
    bounds = a.tail_moment_bounds();
    exact = a.tail_exact();
  } else {
    for (const auto& [g, bound] : a.tail_moment_bounds()) {
      auto it = b.tail_moment_bounds().find(g);
      if (it != b.tail_moment_bounds().end()) bounds[g] = bound + it->second;
    }
  }
  return GridMeasure::from_cdf_nodes(a.grid(), std::move(cdf), tail,
                                     std::move(bounds), exact);
}

GridMeasure make_measure(const std::string& spec, const Grid& grid,
                         const ServiceDistribution* dist) {
  GridMeasure acc = GridMeasure::zero(grid);
  bool any = false;
  for (const std::string& raw : split(spec, '+')) {
    const std::string term = trim(raw);
    if (term.empty()) fail(Errc::malformed_spec, "empty measure term");
    const std::size_t colon = term.find(':');
    const std::string head = term.substr(0, colon);
    const std::string payload =
        colon == std::string::npos ? "" : term.substr(colon + 1);
    GridMeasure part;
    if (head == "zero") {
      if (!payload.empty())
        fail(Errc::malformed_spec, "zero measure takes no parameters");
      part = GridMeasure::zero(grid);
    } else if (head == "uniformdensity") {
      auto kv = parse_kv(payload, head);
      expect_keys(kv, {"a", "b", "mass"}, head);
      part = GridMeasure::uniform_density(kv_number(kv, "a", head),
                                          kv_number(kv, "b", head),
                                          kv_number(kv, "mass", head), grid);
    } else if (head == "paretotail") {
      auto kv = parse_kv(payload, head);
      expect_keys(kv, {"xm", "p", "mass"}, head);
      part = GridMeasure::pareto_tail(kv_number(kv, "xm", head),
                                      kv_number(kv, "p", head),
                                      kv_number(kv, "mass", head), grid);
    } else if (head == "scaledexcess") {
      auto kv = parse_kv(payload, head);
      expect_keys(kv, {"c"}, head);
      if (dist == nullptr)
        fail(Errc::invalid_argument,
             "scaledexcess requires a service distribution");
      part = scaled_excess(*dist, kv_number(kv, "c", head), grid);
    } else if (head == "csv") {
      auto kv = parse_kv(payload, head);
      expect_keys(kv, {"path"}, head);
      auto it = kv.find("path");
      if (it == kv.end()) fail(Errc::malformed_spec, "csv: missing 'path'");
      part = GridMeasure::from_csv(it->second, grid);
    } else {
      fail(Errc::malformed_spec, "unknown measure term '" + head + "'");
    }
    acc = any ? add(acc, part) : part;
    any = true;
  }
  if (!any) fail(Errc::malformed_spec, "empty measure spec");
  return acc;
}

}  // namespace fluidps
