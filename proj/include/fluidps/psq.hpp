#pragma once

// Discrete-event processor-sharing queue and its fluid-scaled snapshots.
//
// The queue serves all present jobs simultaneously, each at rate 1/n.  We
// track a single accumulator s_acc (total service delivered per job so far)
// and store each job as the mark s_acc_at_arrival + service_requirement.  A
// job departs when s_acc reaches its mark, so the next departure is the
// smallest mark and every event costs O(log n).  Residual of a job is always
// mark - s_acc, and total workload is sum(marks) - n * s_acc.

#include <cstdint>
#include <vector>

#include "fluidps/common.hpp"
#include "fluidps/distribution.hpp"
#include "fluidps/fluid.hpp"
#include "fluidps/measure.hpp"

namespace fluidps {

class PsQueue {
 public:
  // Starts with floor(r * mass(xi)) jobs drawn i.i.d. from xi normalized;
  // Poisson arrivals at the distribution's rate with i.i.d. service draws.
  // The three random streams (initial, arrivals, services) are derived from
  // (seed, replica) independently, so replicated runs never share state.
  PsQueue(const ServiceDistribution& d, const GridMeasure& xi, double r,
          std::uint64_t seed, std::uint64_t replica = 0);

  // Advances the unscaled clock to t, processing all events on the way.
  void run_until(double t);

  double clock() const { return clock_; }
  std::size_t count() const { return marks_.size(); }
  double scale() const { return r_; }

  // Sum of residual service times, O(1).
  double workload() const {
    return marks_.empty()
               ? 0.0
               : sum_marks_ - static_cast<double>(marks_.size()) * s_acc_;
  }

  // Residuals materialized in unspecified order (heap order), each > 0.
  std::vector<double> residuals() const;

  // Fluid-scaled empirical measure: each job contributes mass 1/r smeared
  // over its grid cell; jobs at or beyond x_max go to the tail with exact
  // power sums recorded for exponents 0..3.
  GridMeasure snapshot(const Grid& grid) const;

 private:
  void do_arrival();
  void pop_departure();

  ServiceDistribution dist_;
  double r_;
  double alpha_;
  double clock_ = 0.0;
  double s_acc_ = 0.0;
  double sum_marks_ = 0.0;
  double next_arrival_ = 0.0;
  std::vector<double> marks_;  // min-heap
  std::mt19937_64 arr_rng_;
  std::mt19937_64 svc_rng_;
};

struct Trajectory {
  double r = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> times;           // fluid-scale snapshot times
  std::vector<std::size_t> counts;     // job count at each snapshot
  std::vector<GridMeasure> snapshots;  // fluid-scaled, mass = count/r
};

// Runs one replica and records fluid-scaled snapshots at clock r*t for each
// requested t (nondecreasing, >= 0).  Initial measures with unresolved tail
// mass are rejected: the sampler inverts the grid CDF.
Trajectory simulate(const ServiceDistribution& d, const GridMeasure& xi,
                    double r, const std::vector<double>& snapshot_times,
                    std::uint64_t seed, const Grid& snapshot_grid,
                    std::uint64_t replica = 0);

double workload_of(const PsQueue& q);
// Unscales a fluid snapshot back to total residual work, r * <x, snapshot>.
double workload_of(const GridMeasure& snapshot, double r);

struct FluidComparisonRow {
  double t = 0.0;
  CertValue rho;        // Prohorov distance snapshot vs fluid state
  CertValue tv;         // total variation, meaningful when tv_defined
  bool tv_defined = false;
};

// Distances between trajectory snapshots and the fluid state at each time.
// TV is reported as defined only when neither side carries tail mass.
std::vector<FluidComparisonRow> compare_to_fluid(const Trajectory& traj,
                                                 const FluidSolution& sol);

}  // namespace fluidps
