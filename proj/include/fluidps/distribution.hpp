#pragma once

// Critical data (alpha, nu): a service distribution nu with no mass at the
// origin and finite mean, paired with the arrival rate alpha = 1/mean that
// balances the load exactly.  Exposes the excess-lifetime objects derived
// from it: f_e = alpha(1-F), F_e, the excess measure nu_e, and beta_e.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/test_function.hpp"

namespace fluidps {

enum class Family { exponential, uniform, pareto, hyperexponential, grid };

enum class Which { nu, nu_e };

class ServiceDistribution {
 public:
  static ServiceDistribution exponential(double rate);
  static ServiceDistribution uniform(double a, double b);
  static ServiceDistribution pareto(double xm, double p);
  static ServiceDistribution hyperexponential(std::vector<double> weights,
                                              std::vector<double> rates);
  // Piecewise-linear CDF through (xs, Fs); xs strictly increasing from 0,
  // Fs from 0 up to 1.  The stored distribution is exactly that polygon.
  static ServiceDistribution from_cdf_table(std::vector<double> xs,
                                            std::vector<double> Fs);

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  double mean() const { return mean_; }
  std::string describe() const;

  double cdf(double x) const;
  double density(double x) const;  // density of nu where it exists
  double excess_density(double x) const;  // f_e(x) = alpha (1 - F(x))
  double excess_cdf(double x) const;      // F_e
  double excess_tail(double x) const;     // 1 - F_e, non-cancelling form
  double support_end() const;             // sup of nu's support (inf allowed)

  // <chi^gamma, nu> or <chi^gamma, nu_e>; infinities detected symbolically.
  ExtReal moment(double gamma, Which which) const;
  double beta_e() const;  // 1/<chi, nu_e>, 0 when that moment is infinite

  // Exact integral_X^inf x^k f_e(x) dx for integer k in [0, 3].
  ExtReal excess_tail_moment(int k, double X) const;

  double quantile(double u) const;  // u in [0, 1)
  double sample(std::mt19937_64& rng) const;

  // Points where the density (and hence f_e') has a kink; quadratures split
  // their intervals here.
  std::vector<double> density_breakpoints() const;

 private:
  ServiceDistribution() = default;
  void finalize();  // computes alpha from mean, validates invariants

  Family family_ = Family::exponential;
  double alpha_ = 0.0;
  double mean_ = 0.0;
  // exponential: rate_; uniform: a_, b_; pareto: xm_, p_;
  // hyperexponential: weights_, rates_; grid: xs_, Fs_ plus prefix tables.
  double rate_ = 0.0;
  double a_ = 0.0, b_ = 0.0;
  double xm_ = 0.0, p_ = 0.0;
  std::vector<double> weights_, rates_;
  std::vector<double> xs_, Fs_;
  std::vector<double> grid_tail_int_;  // suffix integrals of (1-F) at xs_
};

// Parses spec strings like "exp:rate=1", "uniform:a=0,b=2",
// "pareto:xm=0.75,p=4", "hyperexp:w=0.5,0.5;r=0.5,2", "grid:path=F.csv".
ServiceDistribution make_service_dist(const std::string& spec);

// Residual of the integration-by-parts identity alpha<g,nu> = <g',nu_e>,
// each side via adaptive quadrature with a certified tail cutoff.
double excess_duality_residual(const ServiceDistribution& d,
                               const TestFunction& g);

}  // namespace fluidps
