#include "fluidps/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fluidps {

namespace {

// x^(k+1)/(k+1) antiderivative helper for polynomial pieces.
double powint(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// Exact integral of x^g over [lo, hi] (g > -1).
double power_integral(double g, double lo, double hi) {
  return (std::pow(hi, g + 1.0) - std::pow(lo, g + 1.0)) / (g + 1.0);
}

// Exact integral of x^k (u + v x) over [lo, hi], k an integer >= 0.
double poly_lin_integral(int k, double u, double v, double lo, double hi) {
  const double p1 = (powint(hi, k + 1) - powint(lo, k + 1)) / (k + 1.0);
  const double p2 = (powint(hi, k + 2) - powint(lo, k + 2)) / (k + 2.0);
  return u * p1 + v * p2;
}

// Exact integral of x^g (u + v x) over [lo, hi] for real g >= 0.
double power_lin_integral(double g, double u, double v, double lo, double hi) {
  return u * power_integral(g, lo, hi) + v * power_integral(g + 1.0, lo, hi);
}

// integral_X^inf x^k exp(-r x) dx = exp(-r X) sum_{j<=k} (k!/j!) X^j / r^{k+1-j}
double exp_tail_poly(int k, double r, double X) {
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  double sum = 0.0;
  double jfact = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j >= 2) jfact *= j;
    sum += fact / jfact * powint(X, j) / std::pow(r, k + 1 - j);
  }
  return std::exp(-r * X) * sum;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void ServiceDistribution::finalize() {
  if (!(mean_ > 0.0) || !std::isfinite(mean_)) {
    fail(Errc::infinite_mean, describe() + ": mean must be positive and finite");
  }
  alpha_ = 1.0 / mean_;
  if (cdf(0.0) > 0.0) {
    fail(Errc::mass_at_origin, describe() + ": F(0) must be 0");
  }
}

ServiceDistribution ServiceDistribution::exponential(double rate) {
  if (!(rate > 0.0)) fail(Errc::malformed_spec, "exp: rate must be > 0");
  ServiceDistribution d;
  d.family_ = Family::exponential;
  d.rate_ = rate;
  d.mean_ = 1.0 / rate;
  d.finalize();
  return d;
}

ServiceDistribution ServiceDistribution::uniform(double a, double b) {
  if (!(a >= 0.0) || !(b > a)) {
    fail(Errc::malformed_spec, "uniform: need 0 <= a < b");
  }
  ServiceDistribution d;
  d.family_ = Family::uniform;
  d.a_ = a;
  d.b_ = b;
  d.mean_ = 0.5 * (a + b);
  d.finalize();
  return d;
}

ServiceDistribution ServiceDistribution::pareto(double xm, double p) {
  if (!(xm > 0.0)) fail(Errc::malformed_spec, "pareto: xm must be > 0");
  if (!(p > 0.0)) fail(Errc::malformed_spec, "pareto: p must be > 0");
  if (p <= 1.0) {
    fail(Errc::infinite_mean, "pareto: p <= 1 gives an infinite mean");
  }
  ServiceDistribution d;
  d.family_ = Family::pareto;
  d.xm_ = xm;
  d.p_ = p;
  d.mean_ = p * xm / (p - 1.0);
  d.finalize();
  return d;
}

ServiceDistribution ServiceDistribution::hyperexponential(
    std::vector<double> weights, std::vector<double> rates) {
  if (weights.empty() || weights.size() != rates.size()) {
    fail(Errc::malformed_spec, "hyperexp: need equally many weights and rates");
  }
  double wsum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      fail(Errc::malformed_spec, "hyperexp: weights must be > 0");
    }
    if (!(rates[i] > 0.0)) {
      fail(Errc::malformed_spec, "hyperexp: rates must be > 0");
    }
    wsum += weights[i];
  }
  if (std::fabs(wsum - 1.0) > 1e-6) {
    fail(Errc::malformed_spec, "hyperexp: weights must sum to 1");
  }
  for (double& w : weights) w /= wsum;
  ServiceDistribution d;
  d.family_ = Family::hyperexponential;
  d.weights_ = std::move(weights);
  d.rates_ = std::move(rates);
  d.mean_ = 0.0;
  for (std::size_t i = 0; i < d.weights_.size(); ++i) {
    d.mean_ += d.weights_[i] / d.rates_[i];
  }
  d.finalize();
  return d;
}

ServiceDistribution ServiceDistribution::from_cdf_table(
    std::vector<double> xs, std::vector<double> Fs) {
  if (xs.size() != Fs.size() || xs.size() < 2) {
    fail(Errc::malformed_spec, "grid: need >= 2 (x, F) rows of equal length");
  }
  if (xs.front() != 0.0) {
    fail(Errc::malformed_spec, "grid: table must start at x = 0");
  }
  if (Fs.front() != 0.0) {
    fail(Errc::mass_at_origin, "grid: F(0) must be 0");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      fail(Errc::malformed_spec, "grid: x column must be strictly increasing");
    }
    if (Fs[i] < Fs[i - 1]) {
      fail(Errc::malformed_spec, "grid: F column must be nondecreasing");
    }
  }
  if (std::fabs(Fs.back() - 1.0) > 1e-9) {
    fail(Errc::malformed_spec, "grid: F must reach 1 at the last row");
  }
  Fs.back() = 1.0;
  ServiceDistribution d;
  d.family_ = Family::grid;
  d.xs_ = std::move(xs);
  d.Fs_ = std::move(Fs);
  // mean = integral of (1 - F); exact for the polygon, accumulated backwards
  // so the suffix integrals give non-cancelling excess tails.
  d.grid_tail_int_.assign(d.xs_.size(), 0.0);
  for (std::size_t i = d.xs_.size() - 1; i-- > 0;) {
    const double seg = (d.xs_[i + 1] - d.xs_[i]) *
                       (1.0 - 0.5 * (d.Fs_[i] + d.Fs_[i + 1]));
    d.grid_tail_int_[i] = d.grid_tail_int_[i + 1] + seg;
  }
  d.mean_ = d.grid_tail_int_.front();
  d.finalize();
  return d;
}

std::string ServiceDistribution::describe() const {
  switch (family_) {
    case Family::exponential:
      return "exp:rate=" + fmt12(rate_);
    case Family::uniform:
      return "uniform:a=" + fmt12(a_) + ",b=" + fmt12(b_);
    case Family::pareto:
      return "pareto:xm=" + fmt12(xm_) + ",p=" + fmt12(p_);
    case Family::hyperexponential: {
      std::string w, r;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (i) {
          w += ",";
          r += ",";
        }
        w += fmt12(weights_[i]);
        r += fmt12(rates_[i]);
      }
      return "hyperexp:w=" + w + ";r=" + r;
    }
    case Family::grid:
      return "grid:" + std::to_string(xs_.size()) + " nodes, x_max=" +
             fmt12(xs_.back());
  }
  return "?";
}

double ServiceDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  switch (family_) {
    case Family::exponential:
      return -std::expm1(-rate_ * x);
    case Family::uniform:
      if (x <= a_) return 0.0;
      if (x >= b_) return 1.0;
      return (x - a_) / (b_ - a_);
    case Family::pareto:
      if (x <= xm_) return 0.0;
      return 1.0 - std::pow(xm_ / x, p_);
    case Family::hyperexponential: {
      double tail = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        tail += weights_[i] * std::exp(-rates_[i] * x);
      }
      return 1.0 - tail;
    }
    case Family::grid: {
      if (x >= xs_.back()) return 1.0;
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
      const double w = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
      return Fs_[k] + w * (Fs_[k + 1] - Fs_[k]);
    }
  }
  return 0.0;
}

double ServiceDistribution::density(double x) const {
  if (x < 0.0) return 0.0;
  switch (family_) {
    case Family::exponential:
      return rate_ * std::exp(-rate_ * x);
    case Family::uniform:
      return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
    case Family::pareto:
      if (x < xm_) return 0.0;
      return p_ * std::pow(xm_, p_) / std::pow(x, p_ + 1.0);
    case Family::hyperexponential: {
      double f = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        f += weights_[i] * rates_[i] * std::exp(-rates_[i] * x);
      }
      return f;
    }
    case Family::grid: {
      if (x >= xs_.back()) return 0.0;
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t k =
          it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
      return (Fs_[k + 1] - Fs_[k]) / (xs_[k + 1] - xs_[k]);
    }
  }
  return 0.0;
}

double ServiceDistribution::excess_density(double x) const {
  if (x < 0.0) fail(Errc::invalid_argument, "excess_density: x < 0");
  switch (family_) {
    case Family::exponential:
      return alpha_ * std::exp(-rate_ * x);
    case Family::uniform:
      if (x >= b_) return 0.0;
      if (x <= a_) return alpha_;
      return alpha_ * (b_ - x) / (b_ - a_);
    case Family::pareto:
      if (x <= xm_) return alpha_;
      return alpha_ * std::pow(xm_ / x, p_);
    case Family::hyperexponential: {
      double tail = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        tail += weights_[i] * std::exp(-rates_[i] * x);
      }
      return alpha_ * tail;
    }
    case Family::grid:
      if (x >= xs_.back()) return 0.0;
      return alpha_ * (1.0 - cdf(x));
  }
  return 0.0;
}

double ServiceDistribution::excess_tail(double x) const {
  if (x <= 0.0) return 1.0;
  switch (family_) {
    case Family::exponential:
      return std::exp(-rate_ * x);
    case Family::uniform: {
      if (x >= b_) return 0.0;
      // alpha * integral_x^b (1-F) with (1-F) = 1 on [0,a], linear on [a,b].
      if (x <= a_) {
        return alpha_ * (a_ - x + 0.5 * (b_ - a_));
      }
      const double w = b_ - x;
      return alpha_ * 0.5 * w * w / (b_ - a_);
    }
    case Family::pareto: {
      // alpha * integral_x^inf (1-F); for x >= xm the tail is a pure power.
      if (x >= xm_) {
        return alpha_ * xm_ * std::pow(xm_ / x, p_ - 1.0) / (p_ - 1.0);
      }
      return alpha_ * (xm_ - x + xm_ / (p_ - 1.0));
    }
    case Family::hyperexponential: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        s += weights_[i] / rates_[i] * std::exp(-rates_[i] * x);
      }
      return alpha_ * s;
    }
    case Family::grid: {
      if (x >= xs_.back()) return 0.0;
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
      // suffix integral from xs_[k+1], plus the exact trapezoid piece
      // [x, xs_[k+1]] of the linear segment.
      const double Fx = cdf(x);
      const double seg =
          (xs_[k + 1] - x) * (1.0 - 0.5 * (Fx + Fs_[k + 1]));
      return alpha_ * (grid_tail_int_[k + 1] + seg);
    }
  }
  return 0.0;
}

double ServiceDistribution::excess_cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (family_ == Family::exponential) return -std::expm1(-rate_ * x);
  return 1.0 - excess_tail(x);
}

double ServiceDistribution::support_end() const {
  switch (family_) {
    case Family::uniform:
      return b_;
    case Family::grid:
      return xs_.back();
    default:
      return kInf;
  }
}

ExtReal ServiceDistribution::moment(double gamma, Which which) const {
  if (!(gamma > 0.0)) fail(Errc::invalid_argument, "moment: gamma must be > 0");
  const bool excess = which == Which::nu_e;
  switch (family_) {
    case Family::exponential:
      // Both nu and nu_e are exponential(rate).
      return ExtReal::finite(std::tgamma(gamma + 1.0) /
                             std::pow(rate_, gamma));
    case Family::uniform: {
      if (!excess) {
        return ExtReal::finite(power_integral(gamma, a_, b_) / (b_ - a_));
      }
      // f_e = alpha on [0,a], alpha (b-x)/(b-a) on [a,b].
      const double flat = alpha_ * power_integral(gamma, 0.0, a_);
      const double slope = alpha_ / (b_ - a_) *
                           power_lin_integral(gamma, b_, -1.0, a_, b_);
      return ExtReal::finite(flat + slope);
    }
    case Family::pareto: {
      if (!excess) {
        if (gamma >= p_) return ExtReal::infinite();
        return ExtReal::finite(p_ * std::pow(xm_, gamma) / (p_ - gamma));
      }
      if (gamma >= p_ - 1.0) return ExtReal::infinite();
      return ExtReal::finite(alpha_ * std::pow(xm_, gamma + 1.0) *
                             (1.0 / (gamma + 1.0) + 1.0 / (p_ - gamma - 1.0)));
    }
    case Family::hyperexponential: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double powr = std::pow(rates_[i], excess ? gamma + 1.0 : gamma);
        s += weights_[i] / powr;
      }
      s *= std::tgamma(gamma + 1.0);
      return ExtReal::finite(excess ? alpha_ * s : s);
    }
    case Family::grid: {
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
        const double dx = xs_[k + 1] - xs_[k];
        if (!excess) {
          const double dens = (Fs_[k + 1] - Fs_[k]) / dx;
          total += dens * power_integral(gamma, xs_[k], xs_[k + 1]);
        } else {
          // f_e(x) = alpha(1 - F(x)) is linear on the segment: u + v x.
          const double v = -(Fs_[k + 1] - Fs_[k]) / dx;
          const double u = (1.0 - Fs_[k]) - v * xs_[k];
          total += alpha_ *
                   power_lin_integral(gamma, u, v, xs_[k], xs_[k + 1]);
        }
      }
      return ExtReal::finite(total);
    }
  }
  return ExtReal::finite(0.0);
}

double ServiceDistribution::beta_e() const {
  const ExtReal m1 = moment(1.0, Which::nu_e);
  if (m1.is_infinite) return 0.0;
  return 1.0 / m1.value;
}

ExtReal ServiceDistribution::excess_tail_moment(int k, double X) const {
  if (k < 0 || k > 3) fail(Errc::invalid_argument, "excess_tail_moment: k in [0,3]");
  if (X < 0.0) X = 0.0;
  switch (family_) {
    case Family::exponential:
      return ExtReal::finite(alpha_ * exp_tail_poly(k, rate_, X));
    case Family::uniform: {
      if (X >= b_) return ExtReal::finite(0.0);
      double total = 0.0;
      if (X < a_) {
        total += alpha_ * poly_lin_integral(k, 1.0, 0.0, X, a_);
      }
      const double lo = std::max(X, a_);
      const double v = -1.0 / (b_ - a_);
      const double u = b_ / (b_ - a_);
      total += alpha_ * poly_lin_integral(k, u, v, lo, b_);
      return ExtReal::finite(total);
    }
    case Family::pareto: {
      if (k >= p_ - 1.0) return ExtReal::infinite();
      double total = 0.0;
      if (X < xm_) {
        total += alpha_ * poly_lin_integral(k, 1.0, 0.0, X, xm_);
      }
      const double lo = std::max(X, xm_);
      // integral_lo^inf x^k (xm/x)^p dx = xm^p lo^{k+1-p} / (p-k-1)
      total += alpha_ * std::pow(xm_, p_) * std::pow(lo, k + 1.0 - p_) /
               (p_ - k - 1.0);
      return ExtReal::finite(total);
    }
    case Family::hyperexponential: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        s += weights_[i] * exp_tail_poly(k, rates_[i], X);
      }
      return ExtReal::finite(alpha_ * s);
    }
    case Family::grid: {
      if (X >= xs_.back()) return ExtReal::finite(0.0);
      double total = 0.0;
      for (std::size_t seg = 0; seg + 1 < xs_.size(); ++seg) {
        const double hi = xs_[seg + 1];
        if (hi <= X) continue;
        const double lo = std::max(X, xs_[seg]);
        const double dx = xs_[seg + 1] - xs_[seg];
        const double v = -(Fs_[seg + 1] - Fs_[seg]) / dx;
        const double u = (1.0 - Fs_[seg]) - v * xs_[seg];
        total += alpha_ * poly_lin_integral(k, u, v, lo, hi);
      }
      return ExtReal::finite(total);
    }
  }
  return ExtReal::finite(0.0);
}

double ServiceDistribution::quantile(double u) const {
  if (!(u >= 0.0) || u >= 1.0) fail(Errc::invalid_argument, "quantile: u in [0,1)");
  switch (family_) {
    case Family::exponential:
      return -std::log1p(-u) / rate_;
    case Family::uniform:
      return a_ + (b_ - a_) * u;
    case Family::pareto:
      return xm_ * std::pow(1.0 - u, -1.0 / p_);
    case Family::hyperexponential:
      fail(Errc::invalid_argument,
           "hyperexp quantile has no closed form; use sample()");
    case Family::grid: {
      const auto it = std::upper_bound(Fs_.begin(), Fs_.end(), u);
      std::size_t k = static_cast<std::size_t>(it - Fs_.begin());
      if (k == 0) return xs_.front();
      if (k >= Fs_.size()) return xs_.back();
      const double span = Fs_[k] - Fs_[k - 1];
      if (span <= 0.0) return xs_[k - 1];
      return xs_[k - 1] + (u - Fs_[k - 1]) / span * (xs_[k] - xs_[k - 1]);
    }
  }
  return 0.0;
}

double ServiceDistribution::sample(std::mt19937_64& rng) const {
  const double floor_u = 0x1.0p-53;
  if (family_ == Family::hyperexponential) {
    const double pick = uniform01(rng);
    double acc = 0.0;
    std::size_t idx = weights_.size() - 1;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      acc += weights_[i];
      if (pick < acc) {
        idx = i;
        break;
      }
    }
    const double u = std::max(uniform01(rng), floor_u);
    return -std::log1p(-u) / rates_[idx];
  }
  const double u = std::max(uniform01(rng), floor_u);
  return quantile(u);
}

ServiceDistribution make_service_dist(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string payload =
      colon == std::string::npos ? "" : spec.substr(colon + 1);

  // payload is ';'-separated groups of key=v1,v2,...
  std::map<std::string, std::vector<double>> kv;
  std::map<std::string, std::string> kstr;
  if (!payload.empty()) {
    for (const std::string& group : split(payload, ';')) {
      std::string key;
      for (const std::string& item : split(group, ',')) {
        const std::size_t eq = item.find('=');
        if (eq != std::string::npos) {
          key = item.substr(0, eq);
          const std::string val = item.substr(eq + 1);
          if (key == "path") {
            kstr[key] = val;
          } else {
            kv[key].push_back(parse_number(val));
          }
        } else {
          if (key.empty() || kstr.count(key)) {
            fail(Errc::malformed_spec, "dist spec: stray value '" + item + "'");
          }
          kv[key].push_back(parse_number(item));
        }
      }
    }
  }
  auto one = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.size() != 1) {
      fail(Errc::malformed_spec,
           "dist spec '" + head + "': need exactly one " + key + "=");
    }
    return it->second.front();
  };
  auto expect_keys = [&](std::initializer_list<const char*> allowed) {
    auto known = [&](const std::string& k) {
      for (const char* a : allowed)
        if (k == a) return true;
      return false;
    };
    for (const auto& [k, vals] : kv) {
      if (!known(k))
        fail(Errc::malformed_spec,
             "dist spec '" + head + "': unknown key '" + k + "'");
    }
    for (const auto& [k, val] : kstr) {
      if (!known(k))
        fail(Errc::malformed_spec,
             "dist spec '" + head + "': unknown key '" + k + "'");
    }
  };

  if (head == "exp") {
    expect_keys({"rate"});
    return ServiceDistribution::exponential(one("rate"));
  }
  if (head == "uniform") {
    expect_keys({"a", "b"});
    return ServiceDistribution::uniform(one("a"), one("b"));
  }
  if (head == "pareto") {
    expect_keys({"xm", "p"});
    return ServiceDistribution::pareto(one("xm"), one("p"));
  }
  if (head == "hyperexp") {
    expect_keys({"w", "r"});
    auto w = kv.find("w");
    auto r = kv.find("r");
    if (w == kv.end() || r == kv.end()) {
      fail(Errc::malformed_spec, "hyperexp: need w=... and r=...");
    }
    return ServiceDistribution::hyperexponential(w->second, r->second);
  }
  if (head == "grid") {
    expect_keys({"path"});
    auto it = kstr.find("path");
    if (it == kstr.end()) fail(Errc::malformed_spec, "grid: need path=file");
    std::ifstream in(it->second);
    if (!in) fail(Errc::io_error, "grid: cannot open " + it->second);
    std::vector<double> xs, Fs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cols = split(line, ',');
      if (cols.size() != 2) {
        fail(Errc::malformed_spec, "grid csv: need two columns");
      }
      if (xs.empty() && !cols[0].empty() &&
          !std::isdigit(static_cast<unsigned char>(cols[0][0])) &&
          cols[0][0] != '-' && cols[0][0] != '.' && cols[0][0] != '+') {
        continue;  // header row
      }
      xs.push_back(parse_number(cols[0]));
      Fs.push_back(parse_number(cols[1]));
    }
    return ServiceDistribution::from_cdf_table(std::move(xs), std::move(Fs));
  }
  fail(Errc::malformed_spec, "unknown distribution family '" + head + "'");
}

std::vector<double> ServiceDistribution::density_breakpoints() const {
  switch (family_) {
    case Family::uniform:
      return {a_, b_};
    case Family::pareto:
      return {xm_};
    case Family::grid:
      return xs_;
    default:
      return {};
  }
}

double excess_duality_residual(const ServiceDistribution& d,
                               const TestFunction& g) {
  if (std::fabs(g.g(0.0)) > 1e-12 || std::fabs(g.g_prime(0.0)) > 1e-12) {
    fail(Errc::test_function_invalid,
         g.name + ": requires g(0) = 0 and g'(0) = 0");
  }
  const double tol = 1e-10;
  const double tail_budget = 0.25 * tol;
  const std::vector<double> breakpoints = d.density_breakpoints();

  // Side A: alpha * integral g(x) f(x) dx, cut off where
  // sup_{x>=X}|g| * (1 - F(X)) is below the tail budget.
  double XA = std::min(64.0, d.support_end());
  if (!std::isfinite(d.support_end())) {
    XA = 64.0;
    while (g.tail_bound_g(XA) * (1.0 - d.cdf(XA)) * d.alpha() > tail_budget &&
           XA < 1e9) {
      XA *= 2.0;
    }
  }
  const double A =
      d.alpha() * integrate([&](double x) { return g.g(x) * d.density(x); },
                            0.0, XA, tol, breakpoints);

  // Side B: integral g'(x) f_e(x) dx with the analogous excess-tail cutoff.
  double XB = std::min(64.0, d.support_end());
  if (!std::isfinite(d.support_end())) {
    XB = 64.0;
    while (g.tail_bound_g_prime(XB) * d.excess_tail(XB) > tail_budget &&
           XB < 1e9) {
      XB *= 2.0;
    }
  }
  const double B =
      integrate([&](double x) { return g.g_prime(x) * d.excess_density(x); },
                0.0, XB, tol, breakpoints);

  return A - B;
}

}  // namespace fluidps
