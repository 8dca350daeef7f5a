#ifndef FARMSIM_ENGINE_HPP_
#define FARMSIM_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "farmsim/model.hpp"
#include "farmsim/policy.hpp"
#include "farmsim/rng.hpp"

namespace farmsim {

struct Arrival {
  double time = 0.0;
  int type = 0;  // index into Scenario::job_types
};

// Source of arrivals in nondecreasing time order.
class ArrivalStream {
 public:
  virtual ~ArrivalStream() = default;
  virtual std::optional<Arrival> Next() = 0;
};

// Superposition of independent Poisson streams, one engine per type.
class PoissonArrivals final : public ArrivalStream {
 public:
  PoissonArrivals(std::vector<double> rates, std::uint64_t seed);
  std::optional<Arrival> Next() override;

 private:
  void Draw(std::size_t j, double from);

  std::vector<double> rates_;
  std::vector<Rng> rngs_;
  std::vector<double> next_;
};

using SizeSampler = std::function<double(int type, Rng& rng)>;

using ArrivalFactory =
    std::function<std::unique_ptr<ArrivalStream>(const Scenario&, std::uint64_t seed)>;

double SampleJobSize(const SizeDistribution& dist, Rng& rng);

struct RunOptions {
  PolicyKind policy = PolicyKind::kPAS;
  std::optional<Discipline> discipline;  // defaults to the scenario's
  std::optional<TieBreak> tie_break;     // defaults to the scenario's
  double horizon = 1e4;
  double warmup = -1.0;  // negative: 10% of horizon
  std::uint64_t seed = 1;
  ArrivalFactory arrivals;  // empty: Poisson at the scenario's rates
  SizeSampler sizes;        // empty: each type's size distribution
  double bin_width = 0.0;   // > 0 adds per-bin metrics over the window
  bool track_occupancy = false;
  bool track_servers = false;
  bool record_jobs = false;

  double EffectiveWarmup() const { return warmup < 0.0 ? 0.1 * horizon : warmup; }
};

struct TypeCounts {
  long arrivals = 0;
  long blocked = 0;
  long completed = 0;
};

struct JobRecord {
  int type = 0;
  int server = 0;
  double size = 0.0;
  double arrival = 0.0;
  double departure = 0.0;
};

struct BinMetrics {
  double start = 0.0;
  double end = 0.0;
  double throughput = 0.0;
  double power = 0.0;
  double energy_efficiency = 0.0;
  double completed_work = 0.0;
  std::vector<TypeCounts> types;
};

struct Metrics {
  double window = 0.0;
  double throughput = 0.0;  // delivered service per time
  double power = 0.0;
  double energy_efficiency = 0.0;
  double completed_work = 0.0;      // job sizes finished inside the window
  std::vector<double> blocking;     // per type, 0 when no arrivals
  std::vector<TypeCounts> window_counts;
  std::vector<TypeCounts> total_counts;  // whole run, for flow balance
  std::vector<long> in_system;           // per type at the horizon
  // [group][n]: time-average fraction of the group's servers holding n jobs.
  std::vector<std::vector<double>> occupancy;
  std::vector<double> server_busy_time;  // inside the window
  std::vector<BinMetrics> bins;
  std::vector<JobRecord> jobs;  // completed jobs, whole run, when recorded
  long events = 0;
};

// One replication from the empty state.
Metrics Run(const Scenario& scenario, const RunOptions& options);

}  // namespace farmsim

#endif  // FARMSIM_ENGINE_HPP_
