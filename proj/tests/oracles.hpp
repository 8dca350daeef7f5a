#ifndef FARMSIM_TESTS_ORACLES_HPP_
#define FARMSIM_TESTS_ORACLES_HPP_

// Brute-force references shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "farmsim/fluid.hpp"
#include "farmsim/policy.hpp"

namespace farmsim::testing {

inline bool Serves(const Scenario& s, int type, int group) {
  const auto& avail = s.job_types[type].available_groups;
  return std::find(avail.begin(), avail.end(), s.groups[group].id) != avail.end();
}

// Direct scan over S_j, independent of the heaps.
inline int NaivePas(const Scenario& s, const FarmLayout& layout, const std::vector<int>& occ, int type,
                    TieBreak tie) {
  int best = kBlocked;
  double best_eff = 0.0;
  for (int server = 0; server < layout.num_servers(); ++server) {
    const int g = layout.group_of(server);
    if (!Serves(s, type, g) || occ[server] >= s.groups[g].buffer) continue;
    const double eff = EffectiveEnergyEfficiency(s.groups[g]);
    bool better = best == kBlocked || eff > best_eff;
    if (!better && eff == best_eff && tie == TieBreak::kShortestQueue) better = occ[server] < occ[best];
    if (better) {
      best = server;
      best_eff = eff;
    }
  }
  return best;
}

inline int NaiveJsq(const Scenario& s, const FarmLayout& layout, const std::vector<int>& occ, int type) {
  int best = kBlocked;
  for (int server = 0; server < layout.num_servers(); ++server) {
    const int g = layout.group_of(server);
    if (!Serves(s, type, g) || occ[server] >= s.groups[g].buffer) continue;
    if (best == kBlocked || occ[server] < occ[best]) best = server;
  }
  return best;
}

// Groups 4 and 6 copy groups 1 and 2, so equal-efficiency ties occur.
inline Scenario TieScenario() {
  Scenario s;
  s.groups = {{1, 4.0, 5.0, 1.0, 3, 4}, {2, 3.0, 6.0, 2.0, 2, 3}, {3, 5.0, 9.0, 1.0, 1, 5},
              {4, 4.0, 5.0, 1.0, 2, 3}, {5, 2.0, 8.0, 3.0, 4, 2}, {6, 3.0, 6.0, 2.0, 3, 4}};
  JobType a;
  a.id = 1;
  a.base_rate = 1.0;
  a.available_groups = {1, 2, 4, 6};
  JobType b = a;
  b.id = 2;
  b.available_groups = {2, 3, 5, 6};
  JobType c = a;
  c.id = 3;
  c.available_groups = {4};
  s.job_types = {a, b, c};
  s.Validate();
  return s;
}

struct PolicyCheck {
  long events = 0;
  long blocked = 0;
  long mismatches = 0;           // policy choice differs from the scan
  long blocked_with_vacancy = 0;
  long occupancy_errors = 0;
  long first_mismatch = -1;
};

// Random arrivals and departures on TieScenario, comparing every decision
// with the naive scan.
inline PolicyCheck CheckPolicyAgainstScan(PolicyKind kind, TieBreak tie, std::uint64_t seed,
                                          long events) {
  const Scenario s = TieScenario();
  const FarmLayout layout(s);
  auto policy = MakePolicy(kind, layout, tie);
  std::vector<int> occ(static_cast<std::size_t>(layout.num_servers()), 0);
  std::vector<int> busy;
  std::mt19937_64 rng(seed);
  PolicyCheck c;
  for (; c.events < events; ++c.events) {
    // Bias toward arrivals so full states are visited often.
    if (busy.empty() || std::uniform_real_distribution<double>(0, 1)(rng) < 0.55) {
      const int type = std::uniform_int_distribution<int>(0, 2)(rng);
      const int expected = kind == PolicyKind::kPAS ? NaivePas(s, layout, occ, type, tie)
                                                    : NaiveJsq(s, layout, occ, type);
      const int got = policy->Assign(type);
      if (got != expected) {
        if (c.first_mismatch < 0) c.first_mismatch = c.events;
        ++c.mismatches;
      }
      if (got == kBlocked) {
        ++c.blocked;
        for (int server : layout.servers_of_type(type)) {
          if (occ[server] < layout.buffer_of(server)) {
            ++c.blocked_with_vacancy;
            break;
          }
        }
        continue;
      }
      policy->Admit(got);
      if (occ[got]++ == 0) busy.push_back(got);
    } else {
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, busy.size() - 1)(rng);
      const int server = busy[i];
      policy->Release(server);
      if (--occ[server] == 0) {
        busy[i] = busy.back();
        busy.pop_back();
      }
    }
    for (int server = 0; server < layout.num_servers(); ++server) {
      if (policy->occupancy(server) != occ[server]) ++c.occupancy_errors;
    }
  }
  return c;
}

struct ThresholdCheck {
  int draws = 0;
  int mismatches = 0;
  int first_mismatch = -1;
};

// Argmax over thresholds m in {-1..B-1} of the relaxed per-server value
// against the index rule: accept everything iff nu is below the index.
inline ThresholdCheck CheckThresholdStructure(int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ThresholdCheck c;
  for (; c.draws < draws; ++c.draws) {
    ServerGroup g;
    g.mu = 1.0 + 9.0 * u(rng);
    g.eps_busy = g.mu / (0.2 + 0.8 * u(rng));
    g.eps_idle = g.eps_busy * 0.9 * u(rng);
    g.buffer = 1 + static_cast<int>(rng() % 6);
    const double e_star = 0.5 * EffectiveEnergyEfficiency(g) * (0.1 + 1.8 * u(rng));
    const double lambda = 0.05 + 20.0 * u(rng);
    const double index = WhittleIndex(g, e_star);
    double nu = index + (u(rng) - 0.5);
    if (std::abs(nu - index) < 1e-6) nu += 1e-3;
    int best = -1;
    double best_value = RelaxedSubproblemValue(g, -1, nu, e_star, lambda);
    for (int m = 0; m < g.buffer; ++m) {
      const double v = RelaxedSubproblemValue(g, m, nu, e_star, lambda);
      if (v > best_value) {
        best = m;
        best_value = v;
      }
    }
    if (best != (nu < index ? g.buffer - 1 : -1)) {
      if (c.first_mismatch < 0) c.first_mismatch = c.draws;
      ++c.mismatches;
    }
  }
  return c;
}

}  // namespace farmsim::testing

#endif  // FARMSIM_TESTS_ORACLES_HPP_
