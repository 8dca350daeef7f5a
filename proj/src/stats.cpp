#include "farmsim/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace farmsim {

Estimate StudentT(const std::vector<double>& samples, double confidence) {
  Estimate e;
  e.n = static_cast<int>(samples.size());
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double x : samples) sum += x;
  e.mean = sum / e.n;
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / (e.n - 1));
  const boost::math::students_t dist(e.n - 1);
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
  e.half_width = t * sd / std::sqrt(static_cast<double>(e.n));
  return e;
}

int WorkerCount() {
  if (const char* env = std::getenv("FARMSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(int n, const std::function<void(int)>& body) {
  const int workers = std::min(WorkerCount(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t ReplicationSeed(std::uint64_t seed, int replication) {
  return StreamSeed(seed, StreamKind::kReplication, static_cast<std::uint64_t>(replication));
}

namespace {

void Summarize(Aggregate& agg) {
  std::vector<double> l, e, ee;
  for (const Metrics& m : agg.replications) {
    l.push_back(m.throughput);
    e.push_back(m.power);
    ee.push_back(m.energy_efficiency);
  }
  agg.throughput = StudentT(l);
  agg.power = StudentT(e);
  agg.energy_efficiency = StudentT(ee);
  agg.blocking.clear();
  const std::size_t types = agg.replications.empty() ? 0 : agg.replications[0].blocking.size();
  for (std::size_t j = 0; j < types; ++j) {
    std::vector<double> b;
    for (const Metrics& m : agg.replications) b.push_back(m.blocking[j]);
    agg.blocking.push_back(StudentT(b));
  }
}

void Extend(Aggregate& agg, const Scenario& scenario, const RunOptions& options, int total) {
  const int have = static_cast<int>(agg.replications.size());
  if (total <= have) return;
  agg.replications.resize(static_cast<std::size_t>(total));
  ParallelFor(total - have, [&](int i) {
    RunOptions rep = options;
    rep.seed = ReplicationSeed(options.seed, have + i);
    agg.replications[static_cast<std::size_t>(have + i)] = Run(scenario, rep);
  });
}

}  // namespace

Aggregate RunReplications(const Scenario& scenario, const RunOptions& options, int reps) {
  if (reps < 1) throw ScenarioError("replication count must be positive");
  Aggregate agg;
  Extend(agg, scenario, options, reps);
  Summarize(agg);
  return agg;
}

Aggregate RunUntilPrecise(const Scenario& scenario, const RunOptions& options, int reps,
                          int max_reps, double relative_target) {
  if (reps < 2) throw ScenarioError("at least two replications are needed for an interval");
  Aggregate agg;
  int total = std::min(reps, std::max(max_reps, 2));
  for (;;) {
    Extend(agg, scenario, options, total);
    Summarize(agg);
    if (agg.energy_efficiency.half_width <= relative_target * std::abs(agg.energy_efficiency.mean)) {
      agg.converged = true;
      break;
    }
    if (total >= max_reps) {
      agg.converged = false;
      break;
    }
    total = std::min(2 * total, max_reps);
  }
  return agg;
}

}  // namespace farmsim
