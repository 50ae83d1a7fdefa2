// Command-line front end: experiment drivers around the fluid solver, the
// renewal machinery, the metrics and the queue simulator.  Every numeric
// field goes through fmt12, so identical configs reproduce byte-identical
// files.  Exit codes: 0 ok, 1 validation/usage error, 2 a certified error
// bar (or a configured value threshold) was breached.

#include <clocale>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fluidps/acceptance.hpp"
#include "fluidps/distribution.hpp"
#include "fluidps/fluid.hpp"
#include "fluidps/measure.hpp"
#include "fluidps/metrics.hpp"
#include "fluidps/psq.hpp"
#include "fluidps/renewal.hpp"

namespace {

using namespace fluidps;

struct Opts {
  std::string dist;
  std::vector<std::string> init;
  double h = 0.01;
  double umax = 50.0;
  double xmax = 0.0;  // snapshot extent; 0 = solver default
  double hx = 0.0;    // snapshot step; 0 = solve step
  std::string times;
  std::string rsweep;
  std::string cs = "0.5,1,2";
  double r = 100.0;
  std::uint64_t seed = 1;
  unsigned replicas = 1;
  double eps = 0.5;
  double M = 4.0;
  std::string metric = "rho";
  std::string window;
  bool extrapolate = false;
  double cert_threshold = kInf;
  double rho_threshold = 0.02;
  std::string out;
  std::string aux_out;
};

// "a:step:b" inclusive range, otherwise a comma list.
std::vector<double> parse_values(const std::string& spec) {
  if (spec.empty()) fail(Errc::invalid_argument, "empty value list");
  std::vector<double> vals;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3)
      fail(Errc::malformed_spec, "range must be first:step:last");
    const double a = parse_number(parts[0]);
    const double s = parse_number(parts[1]);
    const double b = parse_number(parts[2]);
    if (!(s > 0.0) || b < a)
      fail(Errc::invalid_argument, "range needs step > 0 and last >= first");
    for (double v = a; v <= b + 1e-9 * s; v += s) vals.push_back(v);
  } else {
    for (const auto& tok : split(spec, ',')) vals.push_back(parse_number(tok));
  }
  for (std::size_t i = 0; i + 1 < vals.size(); ++i)
    if (!(vals[i] < vals[i + 1]))
      fail(Errc::invalid_argument, "values must be strictly increasing");
  return vals;
}

std::string join_init(const std::vector<std::string>& init) {
  if (init.empty()) fail(Errc::invalid_argument, "--init is required");
  std::string spec;
  for (std::size_t i = 0; i < init.size(); ++i)
    spec += (i ? "+" : "") + init[i];
  return spec;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i)
      body_ += (i ? "," : "") + header[i];
    body_ += "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      body_ += (i ? "," : "") + cells[i];
    body_ += "\n";
  }
  void write(const std::string& path) const {
    if (path.empty()) {
      std::fwrite(body_.data(), 1, body_.size(), stdout);
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(Errc::io_error, "cannot open output file: " + path);
    f.write(body_.data(), static_cast<std::streamsize>(body_.size()));
    if (!f) fail(Errc::io_error, "short write: " + path);
  }

 private:
  std::string body_;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io_error, "cannot open output file: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) fail(Errc::io_error, "short write: " + path);
}

Grid snapshot_grid(const Opts& o) {
  const double hx = o.hx > 0.0 ? o.hx : o.h;
  const double xmax = o.xmax > 0.0 ? o.xmax : std::min(o.umax, 50.0);
  return Grid(hx, xmax);
}

FluidSolution solve_from(const Opts& o, const ServiceDistribution& d,
                         const GridMeasure& xi) {
  SolveOptions opts;
  opts.snapshot_grid = snapshot_grid(o);
  opts.extrapolate = o.extrapolate;
  return solve(xi, d, o.h, o.umax, opts);
}

// The initial measure must cover every point the trajectory evaluates it at:
// S(t) + x with S <= umax and x inside the snapshot window.
Grid init_grid(const Opts& o) {
  return Grid(o.h, o.umax + snapshot_grid(o).x_max());
}

int breach_exit(bool value_breach, double worst_err, const Opts& o) {
  if (value_breach || worst_err > o.cert_threshold) return 2;
  return 0;
}

int run_renewal(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const RenewalFunction u = compute_renewal_function(d, o.h, o.umax);
  Csv csv({"u", "Ue"});
  for (std::size_t k = 0; k < u.values.size(); ++k)
    csv.row({fmt12(u.grid.node(k)), fmt12(u.values[k])});
  csv.write(o.out);
  if (!o.aux_out.empty()) {
    const std::vector<double> ts =
        o.times.empty() ? std::vector<double>{10.0, 80.0}
                        : parse_values(o.times);
    Csv bw({"t", "s", "D"});
    for (double t : ts)
      for (int i = 0; i <= 100; ++i) {
        const double s = 0.01 * i;
        bw.row({fmt12(t), fmt12(s), fmt12(blackwell_discrepancy(u, t, s))});
      }
    bw.write(o.aux_out);
  }
  return breach_exit(false, u.residual_cert, o);
}

int run_solve(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const GridMeasure xi = make_measure(join_init(o.init), init_grid(o), &d);
  const FluidSolution sol = solve_from(o, d, xi);
  const GridMeasure limit = sol.limit_state();
  const std::vector<double> ts = parse_values(o.times);
  Csv csv({"t", "Sbar", "Zbar", "workload", "snapshot_mass", "rho_limit",
           "rho_limit_err"});
  std::optional<Csv> snaps;
  if (!o.aux_out.empty()) snaps.emplace(std::vector<std::string>{
      "t", "x", "cdf", "tail_mass"});
  double worst_err = 0.0;
  for (double t : ts) {
    const GridMeasure mu = sol.measure_at(t);
    const CertValue rho = prohorov(mu, limit);
    worst_err = std::max(worst_err, rho.error);
    const double sbar = sol.degenerate() ? 0.0 : sol.S_bar(t);
    csv.row({fmt12(t), fmt12(sbar), fmt12(sol.Z_bar(t)),
             fmt12(sol.workload_at(t)), fmt12(mu.total_mass()),
             fmt12(rho.value), fmt12(rho.error)});
    if (snaps) {
      const auto& cdf = mu.cdf();
      for (std::size_t k = 0; k < cdf.size(); ++k)
        snaps->row({fmt12(t), fmt12(mu.grid().node(k)), fmt12(cdf[k]),
                    fmt12(mu.tail_mass())});
    }
  }
  csv.write(o.out);
  if (snaps) snaps->write(o.aux_out);
  return breach_exit(false, worst_err, o);
}

int run_invariant_check(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const std::vector<double> ts =
      o.times.empty() ? parse_values("0:1:20") : parse_values(o.times);
  const Grid snap = snapshot_grid(o);
  Csv csv({"c", "t", "rho", "rho_err"});
  double worst = 0.0, worst_err = 0.0;
  for (double c : parse_values(o.cs)) {
    const GridMeasure xi = scaled_excess(d, c, init_grid(o));
    const FluidSolution sol = solve_from(o, d, xi);
    const GridMeasure target = scaled_excess(d, c, snap);
    for (double t : ts) {
      const CertValue rho = prohorov(sol.measure_at(t), target);
      worst = std::max(worst, rho.value);
      worst_err = std::max(worst_err, rho.error);
      csv.row({fmt12(c), fmt12(t), fmt12(rho.value), fmt12(rho.error)});
    }
  }
  csv.write(o.out);
  return breach_exit(worst > o.rho_threshold, worst_err, o);
}

CertValue metric_distance(const std::string& metric, const GridMeasure& a,
                          const GridMeasure& b) {
  if (metric == "rho") return prohorov(a, b);
  if (metric == "tv") return total_variation(a, b);
  fail(Errc::invalid_argument, "--metric must be rho or tv");
}

int run_converge(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const GridMeasure xi = make_measure(join_init(o.init), init_grid(o), &d);
  const FluidSolution sol = solve_from(o, d, xi);
  const GridMeasure limit = sol.limit_state();
  Csv csv({"t", "distance", "distance_err", "metric"});
  double worst_err = 0.0;
  for (double t : parse_values(o.times)) {
    const CertValue dv = metric_distance(o.metric, sol.measure_at(t), limit);
    worst_err = std::max(worst_err, dv.error);
    csv.row({fmt12(t), fmt12(dv.value), fmt12(dv.error), o.metric});
  }
  csv.write(o.out);
  return breach_exit(false, worst_err, o);
}

int run_rates(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const GridMeasure xi = make_measure(join_init(o.init), init_grid(o), &d);
  const Ball ball = o.metric == "tv" ? Ball::tv : Ball::rho;
  const bool in_ball = xi.in_moment_ball(o.M, o.eps, ball);
  const FluidSolution sol = solve_from(o, d, xi);
  const GridMeasure limit = sol.limit_state();
  const std::vector<double> ts = parse_values(o.times);
  std::vector<double> ds;
  for (double t : ts)
    ds.push_back(metric_distance(o.metric, sol.measure_at(t), limit).value);
  double lo = ts.front(), hi = ts.back();
  if (!o.window.empty()) {
    const auto w = split(o.window, ':');
    if (w.size() != 2) fail(Errc::malformed_spec, "--window must be lo:hi");
    lo = parse_number(w[0]);
    hi = parse_number(w[1]);
  }
  const RateReport rep = fit_rate(ts, ds, lo, hi);
  std::ostringstream js;
  js << "{\n"
     << "  \"metric\": \"" << o.metric << "\",\n"
     << "  \"eps\": " << fmt12(o.eps) << ",\n"
     << "  \"M\": " << fmt12(o.M) << ",\n"
     << "  \"in_ball\": " << (in_ball ? "true" : "false") << ",\n"
     << "  \"slope\": " << fmt12(rep.slope) << ",\n"
     << "  \"C\": " << fmt12(rep.constant) << ",\n"
     << "  \"window\": {\"lo\": " << fmt12(rep.window_lo)
     << ", \"hi\": " << fmt12(rep.window_hi) << "},\n"
     << "  \"exact_convergence\": " << (rep.exact_convergence ? "true" : "false")
     << ",\n"
     << "  \"samples\": [";
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    js << (i ? ", " : "") << "{\"t\": " << fmt12(rep.times[i])
       << ", \"d\": " << fmt12(rep.distances[i]) << "}";
  js << "],\n  \"excluded\": [";
  for (std::size_t i = 0; i < rep.excluded_times.size(); ++i)
    js << (i ? ", " : "") << fmt12(rep.excluded_times[i]);
  js << "]\n}\n";
  write_text(o.out, js.str());
  return 0;
}

int run_gap(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const GridMeasure xi = make_measure(join_init(o.init), init_grid(o), &d);
  const FluidSolution sol = solve_from(o, d, xi);
  Csv csv({"r", "gap", "truncated_at"});
  for (double rr : parse_values(o.rsweep)) {
    const StationarityGap g = sol.stationarity_gap(rr);
    csv.row({fmt12(rr), fmt12(g.value), fmt12(g.truncated_at)});
  }
  csv.write(o.out);
  return 0;
}

int run_simulate(const Opts& o) {
  const ServiceDistribution d = make_service_dist(o.dist);
  const GridMeasure xi = make_measure(join_init(o.init), init_grid(o), &d);
  const FluidSolution sol = solve_from(o, d, xi);
  const std::vector<double> ts = parse_values(o.times);
  const Grid snap = snapshot_grid(o);
  if (o.replicas < 1) fail(Errc::invalid_argument, "--replicas must be >= 1");

  std::vector<Trajectory> trajs(o.replicas);
  std::vector<std::vector<FluidComparisonRow>> tables(o.replicas);
  parallel_for(o.replicas, [&](std::size_t k) {
    trajs[k] = simulate(d, xi, o.r, ts, o.seed, snap, k);
    tables[k] = compare_to_fluid(trajs[k], sol);
  });

  Csv csv({"replica", "t", "count", "mass", "rho", "rho_err", "tv", "tv_err",
           "tv_defined"});
  std::optional<Csv> snaps;
  if (!o.aux_out.empty()) snaps.emplace(std::vector<std::string>{
      "replica", "t", "x", "cdf", "tail_mass"});
  double worst_err = 0.0;
  for (unsigned k = 0; k < o.replicas; ++k) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const FluidComparisonRow& row = tables[k][i];
      worst_err = std::max(worst_err, row.rho.error);
      csv.row({std::to_string(k), fmt12(row.t),
               std::to_string(trajs[k].counts[i]),
               fmt12(trajs[k].snapshots[i].total_mass()), fmt12(row.rho.value),
               fmt12(row.rho.error), fmt12(row.tv.value), fmt12(row.tv.error),
               row.tv_defined ? "1" : "0"});
      if (snaps) {
        const GridMeasure& m = trajs[k].snapshots[i];
        for (std::size_t j = 0; j < m.cdf().size(); ++j)
          snaps->row({std::to_string(k), fmt12(row.t),
                      fmt12(m.grid().node(j)), fmt12(m.cdf()[j]),
                      fmt12(m.tail_mass())});
      }
    }
  }
  csv.write(o.out);
  if (snaps) snaps->write(o.aux_out);
  return breach_exit(false, worst_err, o);
}

int run_selftest() {
  const auto results = run_acceptance();
  const std::string report = render_report(results);
  std::fwrite(report.data(), 1, report.size(), stdout);
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"critical processor-sharing fluid model toolkit"};
  // --h is the grid step, so help must not claim the short -h
  app.set_help_flag("--help", "print help and exit");
  app.set_config("--config", "", "config file mirroring the flags");
  app.require_subcommand(1);
  Opts o;

  auto add_grid = [&o](CLI::App* s) {
    s->set_help_flag("--help", "print help and exit");
    s->add_option("--h", o.h, "solver grid step");
    s->add_option("--umax", o.umax, "solver grid extent");
    s->add_option("--xmax", o.xmax, "snapshot grid extent");
    s->add_option("--hx", o.hx, "snapshot grid step");
  };
  auto add_common = [&](CLI::App* s, bool need_init) {
    s->add_option("--dist", o.dist, "service distribution spec")->required();
    if (need_init)
      s->add_option("--init", o.init,
                    "initial measure spec (repeat to sum components)");
    add_grid(s);
    s->add_option("--out", o.out, "output path (default stdout)");
    s->add_option("--cert-threshold", o.cert_threshold,
                  "exit 2 when a certified error bar exceeds this");
  };

  CLI::App* c_renewal = app.add_subcommand("renewal", "renewal function table");
  add_common(c_renewal, false);
  c_renewal->add_option("--t", o.times, "discrepancy sweep times");
  c_renewal->add_option("--blackwell-out", o.aux_out,
                        "write a long-run discrepancy sweep CSV here");

  CLI::App* c_solve = app.add_subcommand("solve", "fluid trajectory");
  add_common(c_solve, true);
  c_solve->add_option("--t", o.times, "snapshot times")->required();
  c_solve->add_flag("--extrapolate", o.extrapolate,
                    "extend the inverse past the grid at slope kappa");
  c_solve->add_option("--snapshots-out", o.aux_out,
                      "write snapshot CDFs here");

  CLI::App* c_inv =
      app.add_subcommand("invariant-check", "fixed points stay put");
  add_common(c_inv, false);
  c_inv->add_option("--c", o.cs, "scaled-excess masses to test");
  c_inv->add_option("--t", o.times, "snapshot times (default 0:1:20)");
  c_inv->add_option("--rho-threshold", o.rho_threshold,
                    "exit 2 when any distance exceeds this");

  CLI::App* c_conv =
      app.add_subcommand("converge", "distance to the limit state over time");
  add_common(c_conv, true);
  c_conv->add_option("--t", o.times, "snapshot times")->required();
  c_conv->add_option("--metric", o.metric, "rho or tv");

  CLI::App* c_rates = app.add_subcommand("rates", "fit a power-law decay");
  add_common(c_rates, true);
  c_rates->add_option("--t", o.times, "sample times")->required();
  c_rates->add_option("--metric", o.metric, "rho or tv");
  c_rates->add_option("--eps", o.eps, "moment-ball exponent offset");
  c_rates->add_option("--M", o.M, "moment-ball size");
  c_rates->add_option("--window", o.window, "fit window lo:hi");

  CLI::App* c_gap =
      app.add_subcommand("gap", "stationarity gap of the inverse slope");
  add_common(c_gap, true);
  c_gap->add_option("--r", o.rsweep, "cutoffs to sweep")->required();

  CLI::App* c_sim = app.add_subcommand("simulate", "queue vs fluid");
  add_common(c_sim, true);
  c_sim->add_option("--t", o.times, "snapshot times")->required();
  c_sim->add_option("--r", o.r, "fluid scale (jobs per unit mass)");
  c_sim->add_option("--seed", o.seed, "base seed");
  c_sim->add_option("--replicas", o.replicas, "independent replications");
  c_sim->add_option("--snapshots-out", o.aux_out,
                    "write empirical snapshot CDFs here");

  app.add_subcommand("selftest", "run the full acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_renewal->parsed()) return run_renewal(o);
    if (c_solve->parsed()) return run_solve(o);
    if (c_inv->parsed()) return run_invariant_check(o);
    if (c_conv->parsed()) return run_converge(o);
    if (c_rates->parsed()) return run_rates(o);
    if (c_gap->parsed()) return run_gap(o);
    if (c_sim->parsed()) return run_simulate(o);
    return run_selftest();
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
