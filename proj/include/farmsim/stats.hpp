#ifndef FARMSIM_STATS_HPP_
#define FARMSIM_STATS_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "farmsim/engine.hpp"

namespace farmsim {

// Sample mean with a two-sided Student-t half-width.
struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;
  int n = 0;

  double relative() const { return mean != 0.0 ? half_width / std::abs(mean) : 0.0; }
};

Estimate StudentT(const std::vector<double>& samples, double confidence = 0.95);

struct Aggregate {
  Estimate throughput;
  Estimate power;
  Estimate energy_efficiency;
  std::vector<Estimate> blocking;
  std::vector<Metrics> replications;
  bool converged = true;
};

// Worker count: FARMSIM_THREADS if set and positive, else the hardware
// concurrency.
int WorkerCount();

// Runs body(i) for i in [0, n) on a bounded pool. Results must be written to
// per-index slots so the outcome is independent of scheduling.
void ParallelFor(int n, const std::function<void(int)>& body);

std::uint64_t ReplicationSeed(std::uint64_t seed, int replication);

// `reps` independent replications with seeds derived from options.seed.
Aggregate RunReplications(const Scenario& scenario, const RunOptions& options, int reps);

// Doubles the replication count, starting from `reps`, until the energy
// efficiency half-width is within `relative_target` of the mean or `max_reps`
// is reached; `converged` reports which.
Aggregate RunUntilPrecise(const Scenario& scenario, const RunOptions& options, int reps,
                          int max_reps, double relative_target = 0.03);

}  // namespace farmsim

#endif  // FARMSIM_STATS_HPP_
