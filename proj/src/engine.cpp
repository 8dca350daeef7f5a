#include "farmsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace farmsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualTolerance = 1e-9;

struct Job {
  double remaining;
  double size;
  int type;
  long seq;
  double arrival;
};

struct ServerState {
  std::vector<Job> jobs;
  double last_update = 0.0;
  long version = 0;
  int active = -1;  // SRPT: job currently served
};

struct Departure {
  double time;
  long seq;
  int server;
  long version;
};

struct Later {
  bool operator()(const Departure& a, const Departure& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

// Smallest residual, earliest arrival among equals.
int ArgMinResidual(const std::vector<Job>& jobs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(jobs.size()); ++i) {
    const Job& a = jobs[i];
    const Job& b = jobs[best];
    if (a.remaining < b.remaining || (a.remaining == b.remaining && a.seq < b.seq)) best = i;
  }
  return best;
}

class Simulation {
 public:
  Simulation(const Scenario& scenario, const RunOptions& options)
      : scenario_(scenario),
        options_(options),
        discipline_(options.discipline.value_or(scenario.discipline)),
        layout_(scenario),
        policy_(MakePolicy(options.policy, layout_,
                           options.tie_break.value_or(scenario.tie_break))) {
    horizon_ = options.horizon;
    warmup_ = options.EffectiveWarmup();
    if (!(warmup_ >= 0.0) || !(horizon_ > warmup_)) {
      throw ScenarioError("observation window must satisfy horizon > warmup >= 0");
    }
    const std::size_t groups = scenario.groups.size();
    const std::size_t types = scenario.job_types.size();
    servers_.resize(static_cast<std::size_t>(layout_.num_servers()));
    counts_.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      counts_[g].assign(static_cast<std::size_t>(scenario.groups[g].buffer) + 1, 0);
      counts_[g][0] = layout_.group_size(static_cast<int>(g));
    }
    last_flush_.assign(groups, 0.0);
    busy_integral_.assign(groups, 0.0);
    bin_busy_.assign(groups, 0.0);
    if (options.track_occupancy) {
      occupancy_integral_.resize(groups);
      for (std::size_t g = 0; g < groups; ++g) occupancy_integral_[g].assign(counts_[g].size(), 0.0);
    }
    if (options.track_servers) {
      busy_since_.assign(servers_.size(), 0.0);
      busy_time_.assign(servers_.size(), 0.0);
    }
    metrics_.window_counts.assign(types, {});
    metrics_.total_counts.assign(types, {});
    metrics_.in_system.assign(types, 0);
    bin_counts_.assign(types, {});
    size_rngs_.reserve(types);
    for (std::size_t j = 0; j < types; ++j) {
      size_rngs_.push_back(MakeStream(options.seed, StreamKind::kSizes, j));
    }
    if (options.arrivals) {
      arrivals_ = options.arrivals(scenario, options.seed);
    } else {
      std::vector<double> rates(types);
      for (std::size_t j = 0; j < types; ++j) rates[j] = scenario.ArrivalRate(j);
      arrivals_ = std::make_unique<PoissonArrivals>(std::move(rates), options.seed);
    }
  }

  Metrics Execute() {
    if (warmup_ == 0.0) StartWindow(0.0);
    std::optional<Arrival> next_arrival = arrivals_->Next();
    for (;;) {
      while (!calendar_.empty() &&
             calendar_.top().version != servers_[calendar_.top().server].version) {
        calendar_.pop();
      }
      const double t_dep = calendar_.empty() ? kInf : calendar_.top().time;
      const double t_arr = next_arrival ? next_arrival->time : kInf;
      const double t_event = std::min(t_dep, t_arr);
      const double t_control = NextControl();
      if (t_control <= t_event) {
        if (HandleControl(t_control)) break;
        continue;
      }
      if (t_event < now_ - kResidualTolerance * std::max(1.0, now_)) {
        throw InvariantViolation("event calendar went backwards in time");
      }
      now_ = t_event;
      ++metrics_.events;
      if (t_dep <= t_arr) {
        const Departure d = calendar_.top();
        calendar_.pop();
        OnDeparture(d.server);
      } else {
        OnArrival(next_arrival->type);
        next_arrival = arrivals_->Next();
      }
    }
    return Finish();
  }

 private:
  double NextControl() const {
    if (!measuring_) return warmup_;
    if (options_.bin_width > 0.0) return std::min(next_bin_, horizon_);
    return horizon_;
  }

  // Returns true at the horizon.
  bool HandleControl(double t) {
    FlushAll(t);
    if (!measuring_) {
      StartWindow(t);
      return false;
    }
    if (options_.bin_width > 0.0 && t > bin_start_) CloseBin(t);
    return t >= horizon_;
  }

  void StartWindow(double t) {
    measuring_ = true;
    for (double& last : last_flush_) last = t;
    if (!busy_since_.empty()) {
      for (std::size_t s = 0; s < servers_.size(); ++s) busy_since_[s] = t;
    }
    bin_start_ = t;
    next_bin_ = t + options_.bin_width;
  }

  void CloseBin(double end) {
    BinMetrics bin;
    bin.start = bin_start_;
    bin.end = end;
    const double width = end - bin_start_;
    double service = 0.0, controllable = 0.0, idle = 0.0;
    for (std::size_t g = 0; g < scenario_.groups.size(); ++g) {
      const ServerGroup& group = scenario_.groups[g];
      service += group.mu * bin_busy_[g];
      controllable += (group.eps_busy - group.eps_idle) * bin_busy_[g];
      idle += group.eps_idle * layout_.group_size(static_cast<int>(g)) * width;
      bin_busy_[g] = 0.0;
    }
    if (width > 0.0) {
      bin.throughput = service / width;
      bin.power = (idle + controllable) / width;
      bin.energy_efficiency = bin.power > 0.0 ? bin.throughput / bin.power : 0.0;
    }
    bin.completed_work = bin_work_;
    bin.types = bin_counts_;
    metrics_.bins.push_back(std::move(bin));
    bin_work_ = 0.0;
    std::fill(bin_counts_.begin(), bin_counts_.end(), TypeCounts{});
    bin_start_ = end;
    next_bin_ = end + options_.bin_width;
  }

  void Flush(std::size_t g, double t) {
    const double dt = t - last_flush_[g];
    if (measuring_ && dt > 0.0) {
      const std::vector<int>& c = counts_[g];
      const double busy = layout_.group_size(static_cast<int>(g)) - c[0];
      busy_integral_[g] += busy * dt;
      bin_busy_[g] += busy * dt;
      if (!occupancy_integral_.empty()) {
        for (std::size_t n = 0; n < c.size(); ++n) occupancy_integral_[g][n] += c[n] * dt;
      }
    }
    last_flush_[g] = t;
  }

  void FlushAll(double t) {
    for (std::size_t g = 0; g < counts_.size(); ++g) Flush(g, t);
  }

  void ChangeOccupancy(int s, int from, int to) {
    const std::size_t g = static_cast<std::size_t>(layout_.group_of(s));
    Flush(g, now_);
    --counts_[g][from];
    ++counts_[g][to];
    if (!busy_since_.empty()) {
      if (from == 0) {
        busy_since_[s] = now_;
      } else if (to == 0 && measuring_) {
        busy_time_[s] += now_ - std::max(busy_since_[s], window_start());
      }
    }
  }

  double window_start() const { return warmup_; }

  void Advance(int s) {
    ServerState& server = servers_[s];
    const double elapsed = now_ - server.last_update;
    server.last_update = now_;
    if (server.jobs.empty() || elapsed <= 0.0) return;
    const double mu = scenario_.groups[layout_.group_of(s)].mu;
    if (discipline_ == Discipline::kPS) {
      const double d = elapsed * mu / static_cast<double>(server.jobs.size());
      for (Job& job : server.jobs) job.remaining -= d;
    } else {
      server.jobs[server.active].remaining -= elapsed * mu;
    }
    for (const Job& job : server.jobs) {
      if (job.remaining < -kResidualTolerance) throw InvariantViolation("negative residual job size");
    }
  }

  void Reschedule(int s) {
    ServerState& server = servers_[s];
    ++server.version;
    server.active = -1;
    if (server.jobs.empty()) return;
    const double mu = scenario_.groups[layout_.group_of(s)].mu;
    const int i = ArgMinResidual(server.jobs);
    const double r = std::max(0.0, server.jobs[i].remaining);
    double t;
    if (discipline_ == Discipline::kPS) {
      t = now_ + static_cast<double>(server.jobs.size()) * r / mu;
    } else {
      server.active = i;
      t = now_ + r / mu;
    }
    calendar_.push({t, seq_++, s, server.version});
  }

  void OnArrival(int type) {
    const double size = options_.sizes ? options_.sizes(type, size_rngs_[type])
                                       : SampleJobSize(scenario_.job_types[type].size_dist, size_rngs_[type]);
    if (!(size >= 0.0)) throw InvariantViolation("negative job size");
    ++metrics_.total_counts[type].arrivals;
    if (measuring_) {
      ++metrics_.window_counts[type].arrivals;
      ++bin_counts_[type].arrivals;
    }
    const int s = policy_->Assign(type);
    if (s == kBlocked) {
      ++metrics_.total_counts[type].blocked;
      if (measuring_) {
        ++metrics_.window_counts[type].blocked;
        ++bin_counts_[type].blocked;
      }
      return;
    }
    Advance(s);
    const int n = policy_->occupancy(s);
    policy_->Admit(s);
    servers_[s].jobs.push_back({size, size, type, job_seq_++, now_});
    ++metrics_.in_system[type];
    ChangeOccupancy(s, n, n + 1);
    Reschedule(s);
  }

  void OnDeparture(int s) {
    Advance(s);
    ServerState& server = servers_[s];
    const int i = discipline_ == Discipline::kSRPT ? server.active : ArgMinResidual(server.jobs);
    const Job job = server.jobs[i];
    if (job.remaining > kResidualTolerance * std::max(1.0, job.size)) {
      throw InvariantViolation("departure fired before the job finished");
    }
    server.jobs.erase(server.jobs.begin() + i);
    const int n = policy_->occupancy(s);
    policy_->Release(s);
    --metrics_.in_system[job.type];
    ++metrics_.total_counts[job.type].completed;
    if (options_.record_jobs) metrics_.jobs.push_back({job.type, s, job.size, job.arrival, now_});
    if (measuring_) {
      ++metrics_.window_counts[job.type].completed;
      ++bin_counts_[job.type].completed;
      metrics_.completed_work += job.size;
      bin_work_ += job.size;
    }
    ChangeOccupancy(s, n, n - 1);
    Reschedule(s);
  }

  Metrics Finish() {
    const double window = horizon_ - warmup_;
    metrics_.window = window;
    double service = 0.0, power = 0.0;
    for (std::size_t g = 0; g < scenario_.groups.size(); ++g) {
      const ServerGroup& group = scenario_.groups[g];
      service += group.mu * busy_integral_[g];
      power += group.eps_idle * layout_.group_size(static_cast<int>(g)) * window +
               (group.eps_busy - group.eps_idle) * busy_integral_[g];
    }
    metrics_.throughput = service / window;
    metrics_.power = power / window;
    metrics_.energy_efficiency = metrics_.power > 0.0 ? metrics_.throughput / metrics_.power : 0.0;
    for (const TypeCounts& c : metrics_.window_counts) {
      metrics_.blocking.push_back(c.arrivals > 0 ? static_cast<double>(c.blocked) / c.arrivals : 0.0);
    }
    if (!occupancy_integral_.empty()) {
      metrics_.occupancy.resize(counts_.size());
      for (std::size_t g = 0; g < counts_.size(); ++g) {
        const double denom = window * layout_.group_size(static_cast<int>(g));
        for (double v : occupancy_integral_[g]) metrics_.occupancy[g].push_back(v / denom);
      }
    }
    if (!busy_time_.empty()) {
      for (std::size_t s = 0; s < servers_.size(); ++s) {
        if (!servers_[s].jobs.empty()) busy_time_[s] += horizon_ - std::max(busy_since_[s], warmup_);
      }
      metrics_.server_busy_time = busy_time_;
    }
    return std::move(metrics_);
  }

  const Scenario& scenario_;
  const RunOptions& options_;
  Discipline discipline_;
  FarmLayout layout_;
  std::unique_ptr<AssignmentPolicy> policy_;
  std::unique_ptr<ArrivalStream> arrivals_;
  std::vector<Rng> size_rngs_;

  double horizon_ = 0.0;
  double warmup_ = 0.0;
  double now_ = 0.0;
  bool measuring_ = false;
  long seq_ = 0;
  long job_seq_ = 0;

  std::vector<ServerState> servers_;
  std::priority_queue<Departure, std::vector<Departure>, Later> calendar_;

  std::vector<std::vector<int>> counts_;  // [group][n] servers holding n jobs
  std::vector<double> last_flush_;
  std::vector<double> busy_integral_;
  std::vector<std::vector<double>> occupancy_integral_;
  std::vector<double> busy_since_;
  std::vector<double> busy_time_;

  double bin_start_ = 0.0;
  double next_bin_ = kInf;
  std::vector<double> bin_busy_;
  double bin_work_ = 0.0;
  std::vector<TypeCounts> bin_counts_;

  Metrics metrics_;
};

}  // namespace

PoissonArrivals::PoissonArrivals(std::vector<double> rates, std::uint64_t seed)
    : rates_(std::move(rates)), next_(rates_.size(), kInf) {
  rngs_.reserve(rates_.size());
  for (std::size_t j = 0; j < rates_.size(); ++j) {
    rngs_.push_back(MakeStream(seed, StreamKind::kArrivals, j));
    Draw(j, 0.0);
  }
}

void PoissonArrivals::Draw(std::size_t j, double from) {
  if (!(rates_[j] > 0.0)) {
    next_[j] = kInf;
    return;
  }
  next_[j] = from + std::exponential_distribution<double>(rates_[j])(rngs_[j]);
}

std::optional<Arrival> PoissonArrivals::Next() {
  if (next_.empty()) return std::nullopt;
  const std::size_t j =
      static_cast<std::size_t>(std::min_element(next_.begin(), next_.end()) - next_.begin());
  if (next_[j] == kInf) return std::nullopt;
  const Arrival a{next_[j], static_cast<int>(j)};
  Draw(j, next_[j]);
  return a;
}

double SampleJobSize(const SizeDistribution& dist, Rng& rng) {
  switch (dist.kind) {
    case SizeKind::kExponential:
      return std::exponential_distribution<double>(1.0)(rng);
    case SizeKind::kParetoFinite:
    case SizeKind::kParetoInfinite: {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      return dist.ParetoScale() * std::pow(1.0 - u, -1.0 / dist.shape);
    }
    case SizeKind::kDeterministic:
      return 1.0;
  }
  return 1.0;
}

Metrics Run(const Scenario& scenario, const RunOptions& options) {
  scenario.Validate();
  Simulation sim(scenario, options);
  return sim.Execute();
}

}  // namespace farmsim
