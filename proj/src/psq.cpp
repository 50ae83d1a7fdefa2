#include "fluidps/psq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "fluidps/metrics.hpp"

namespace fluidps {

namespace {

constexpr double kFloorU = 0x1.0p-53;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exp_interarrival(std::mt19937_64& rng, double rate) {
  const double u = std::max(uniform01(rng), kFloorU);
  return -std::log1p(-u) / rate;
}

}  // namespace

PsQueue::PsQueue(const ServiceDistribution& d, const GridMeasure& xi, double r,
                 std::uint64_t seed, std::uint64_t replica)
    : dist_(d), r_(r), alpha_(d.alpha()) {
  if (!(r >= 1.0)) fail(Errc::invalid_scale, "simulation scale must be >= 1");
  if (xi.tail_mass() > 0.0)
    fail(Errc::invalid_argument,
         "initial measure has unresolved tail mass; sampling needs the full "
         "CDF on the grid");
  std::mt19937_64 init_rng(derive_seed(seed, replica, 0));
  arr_rng_.seed(derive_seed(seed, replica, 1));
  svc_rng_.seed(derive_seed(seed, replica, 2));

  const double mass = xi.total_mass();
  const auto n0 =
      static_cast<std::size_t>(std::floor(r * mass + 1e-9));
  marks_.reserve(n0 + 64);
  for (std::size_t i = 0; i < n0; ++i) {
    const double u = std::max(uniform01(init_rng), kFloorU);
    const double x = xi.quantile(u * mass);
    marks_.push_back(x);  // s_acc_ == 0
    sum_marks_ += x;
  }
  std::make_heap(marks_.begin(), marks_.end(), std::greater<>());
  next_arrival_ = exp_interarrival(arr_rng_, alpha_);
}

void PsQueue::do_arrival() {
  const double mark = s_acc_ + dist_.sample(svc_rng_);
  marks_.push_back(mark);
  std::push_heap(marks_.begin(), marks_.end(), std::greater<>());
  sum_marks_ += mark;
  next_arrival_ += exp_interarrival(arr_rng_, alpha_);
}

void PsQueue::pop_departure() {
  const double m = marks_.front();
  std::pop_heap(marks_.begin(), marks_.end(), std::greater<>());
  marks_.pop_back();
  sum_marks_ -= m;
}

void PsQueue::run_until(double t) {
  if (t < clock_ - 1e-12)
    fail(Errc::invalid_argument, "queue clock cannot run backwards");
  for (;;) {
    if (marks_.empty()) {
      if (next_arrival_ > t) break;
      clock_ = next_arrival_;
      do_arrival();
      continue;
    }
    const double n = static_cast<double>(marks_.size());
    const double gap = std::max(marks_.front() - s_acc_, 0.0);
    const double dep_time = clock_ + n * gap;
    if (next_arrival_ <= dep_time && next_arrival_ <= t) {
      s_acc_ += (next_arrival_ - clock_) / n;
      clock_ = next_arrival_;
      do_arrival();
    } else if (dep_time <= t) {
      clock_ = dep_time;
      s_acc_ = marks_.front();  // the departing residual hits exactly zero
      pop_departure();
    } else {
      break;
    }
  }
  if (!marks_.empty() && t > clock_)
    s_acc_ += (t - clock_) / static_cast<double>(marks_.size());
  clock_ = std::max(clock_, t);
}

std::vector<double> PsQueue::residuals() const {
  std::vector<double> out;
  out.reserve(marks_.size());
  for (double m : marks_) out.push_back(m - s_acc_);
  return out;
}

GridMeasure PsQueue::snapshot(const Grid& grid) const {
  // Integer cell counts first, converted by a single division per node, so
  // that grid mass is exactly in_count/r and tail mass exactly tail_count/r.
  std::vector<std::uint64_t> cell_count(grid.n, 0);
  std::uint64_t tail_count = 0;
  double tail_pow[4] = {0.0, 0.0, 0.0, 0.0};
  for (double m : marks_) {
    const double x = m - s_acc_;
    if (x < grid.x_max()) {
      const auto cell = std::min(
          static_cast<std::size_t>(std::floor(x / grid.h + 1e-12)),
          grid.n - 1);
      ++cell_count[cell];
    } else {
      ++tail_count;
      double p = 1.0;
      for (int g = 0; g < 4; ++g) {
        tail_pow[g] += p;
        p *= x;
      }
    }
  }
  std::vector<double> cdf(grid.nodes(), 0.0);
  std::uint64_t cum = 0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    cum += cell_count[k];
    cdf[k + 1] = static_cast<double>(cum) / r_;
  }
  std::map<double, double> bounds;
  for (int g = 0; g < 4; ++g) bounds[static_cast<double>(g)] = tail_pow[g] / r_;
  return GridMeasure::from_cdf_nodes(grid, std::move(cdf),
                                     static_cast<double>(tail_count) / r_,
                                     std::move(bounds), true);
}

Trajectory simulate(const ServiceDistribution& d, const GridMeasure& xi,
                    double r, const std::vector<double>& snapshot_times,
                    std::uint64_t seed, const Grid& snapshot_grid,
                    std::uint64_t replica) {
  if (snapshot_times.empty())
    fail(Errc::invalid_argument, "simulate: need at least one snapshot time");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (!(snapshot_times[i] >= 0.0))
      fail(Errc::invalid_argument, "simulate: snapshot times must be >= 0");
    if (i > 0 && snapshot_times[i] < snapshot_times[i - 1])
      fail(Errc::invalid_argument,
           "simulate: snapshot times must be nondecreasing");
  }
  PsQueue q(d, xi, r, seed, replica);
  Trajectory traj;
  traj.r = r;
  traj.seed = seed;
  traj.times = snapshot_times;
  traj.counts.reserve(snapshot_times.size());
  traj.snapshots.reserve(snapshot_times.size());
  for (double t : snapshot_times) {
    q.run_until(r * t);
    traj.counts.push_back(q.count());
    traj.snapshots.push_back(q.snapshot(snapshot_grid));
  }
  return traj;
}

double workload_of(const PsQueue& q) { return q.workload(); }

double workload_of(const GridMeasure& snapshot, double r) {
  if (!(r >= 1.0)) fail(Errc::invalid_scale, "simulation scale must be >= 1");
  return r * snapshot.moment(1.0).value;
}

std::vector<FluidComparisonRow> compare_to_fluid(const Trajectory& traj,
                                                 const FluidSolution& sol) {
  std::vector<FluidComparisonRow> rows;
  rows.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const GridMeasure mu = sol.measure_at(traj.times[i]);
    const GridMeasure& snap = traj.snapshots[i];
    FluidComparisonRow row;
    row.t = traj.times[i];
    try {
      row.rho = prohorov(snap, mu);
      row.tv_defined = snap.tail_mass() == 0.0 && mu.tail_mass() == 0.0;
      if (row.tv_defined) row.tv = total_variation(snap, mu);
    } catch (const Error& e) {
      if (e.code() == Errc::grid_resample_failure)
        fail(Errc::grid_mismatch,
             "trajectory and fluid snapshot grids have no common refinement");
      throw;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fluidps
