#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "farmsim/fluid.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace farmsim {
namespace {

using testing::Fixture;
using testing::SingleGroup;

TEST(BirthDeath, Examples) {
  const std::vector<double> third = BirthDeathSteadyState(1.0, 1.0, 2);
  for (double p : third) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const std::vector<double> empty = BirthDeathSteadyState(0.0, 3.0, 4);
  EXPECT_EQ(empty, (std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0}));
  const std::vector<double> half = BirthDeathSteadyState(1.0, 2.0, 1);
  EXPECT_NEAR(half[0], 2.0 / 3.0, 1e-15);
}

TEST(BirthDeath, BalanceAndLargeRatio) {
  for (auto [lambda, mu, buffer] : {std::tuple{0.3, 2.0, 5}, std::tuple{5.0, 1.0, 8},
                                    std::tuple{1e3, 1.0, 50}, std::tuple{1e-3, 1.0, 60}}) {
    const std::vector<double> pi = BirthDeathSteadyState(lambda, mu, buffer);
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-12);
    for (int n = 0; n < buffer; ++n) {
      EXPECT_TRUE(std::isfinite(pi[n]));
      EXPECT_NEAR(lambda * pi[n], mu * pi[n + 1], 1e-12 * std::max(1.0, lambda));
    }
  }
  EXPECT_NEAR(BirthDeathSteadyState(1e3, 1.0, 50).back(), 1.0 - 1e-3, 1e-5);
}

TEST(Availability, SingleServer) {
  const AvailabilityLoad a = ComputeAvailabilityLoad(SingleGroup(1.0, 1.0, 2));
  ASSERT_EQ(a.A.size(), 1u);
  EXPECT_NEAR(a.A[0], 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(a.heavy_traffic);
}

TEST(Availability, MatchesDirectSum) {
  for (const char* name : {"case1.json", "case2.json"}) {
    const Scenario s = Fixture(name);
    const AvailabilityLoad a = ComputeAvailabilityLoad(s);
    bool heavy = true;
    for (std::size_t j = 0; j < s.job_types.size(); ++j) {
      double expected = 0.0;
      for (int id : s.job_types[j].available_groups) {
        const std::size_t k = s.GroupIndex(id);
        const ServerGroup& g = s.groups[k];
        double load = 0.0;
        for (std::size_t i = 0; i < s.job_types.size(); ++i) {
          const auto& av = s.job_types[i].available_groups;
          if (std::find(av.begin(), av.end(), id) != av.end()) load += s.ArrivalRate(i);
        }
        const double r = load / g.mu;
        double den = 0.0;
        for (int n = 0; n <= g.buffer; ++n) den += std::pow(r, n);
        expected += s.ServerCount(k) * (1.0 - std::pow(r, g.buffer) / den);
      }
      EXPECT_NEAR(a.A[j], expected, 1e-12);
      heavy = heavy && expected <= 1.0;
    }
    EXPECT_EQ(a.heavy_traffic, heavy);
  }
}

TEST(Whittle, Examples) {
  const ServerGroup g{1, 2.0, 3.0, 1.0, 2, 1};
  EXPECT_DOUBLE_EQ(WhittleIndex(g, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(WhittleIndex(g, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(WhittleIndex(g, 1.0), 0.0);
}

TEST(Whittle, OrderMatchesEfficiencyOrder) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Scenario s = GenerateScenario(rng(), {});
    const double e = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
    for (std::size_t a = 0; a < s.groups.size(); ++a) {
      for (std::size_t b = 0; b < s.groups.size(); ++b) {
        EXPECT_EQ(WhittleIndex(s.groups[a], e) > WhittleIndex(s.groups[b], e),
                  EffectiveEnergyEfficiency(s.groups[a]) > EffectiveEnergyEfficiency(s.groups[b]));
      }
    }
  }
}

TEST(RelaxedSubproblem, Examples) {
  const ServerGroup g{1, 1.0, 2.0, 1.0, 2, 1};
  EXPECT_EQ(RelaxedSubproblemValue(g, -1, 0.3, 0.5, 1.0), 0.0);
  // nu* = 1 - 0.5 = 0.5; m = 0 accepts in state 0 only: pi(0) = 1/2.
  EXPECT_DOUBLE_EQ(RelaxedSubproblemValue(g, 0, 0.3, 0.5, 1.0), 1.0 * 0.2 * 0.5);
  EXPECT_DOUBLE_EQ(RelaxedSubproblemValue(g, 1, 0.3, 0.5, 1.0), 1.0 * 0.2 * 2.0 / 3.0);
  EXPECT_THROW(RelaxedSubproblemValue(g, 2, 0.3, 0.5, 1.0), ScenarioError);
  EXPECT_THROW(RelaxedSubproblemValue(g, -2, 0.3, 0.5, 1.0), ScenarioError);
}

TEST(RelaxedSubproblem, ThresholdAtIndexIsOptimal) {
  const testing::ThresholdCheck c = testing::CheckThresholdStructure(1000, 2024);
  EXPECT_EQ(c.mismatches, 0) << "first at draw " << c.first_mismatch;
}

TEST(StateOrdering, CaseOne) {
  const std::vector<FluidState> states = StateOrdering(Fixture("case1.json"));
  // Efficiency order of the groups is 1, 2, 3, 4, 5.
  ASSERT_EQ(states.size(), 5u * 2u + 1u + 5u);
  EXPECT_EQ(states[0].group, 0);
  EXPECT_EQ(states[0].n, 0);
  EXPECT_EQ(states[1].group, 0);
  EXPECT_EQ(states[1].n, 1);
  EXPECT_EQ(states[2].group, 1);
  EXPECT_EQ(states[10].group, -1);
  for (int i = 11; i < 16; ++i) {
    EXPECT_EQ(states[i].group, i - 11);
    EXPECT_EQ(states[i].n, 2);
  }
}

// Continuous-time balance for one pooled group with arrival rate a per unit
// mass and level mass spread proportionally: a y_n / open = mu y_{n+1}.
std::vector<double> ProportionalBalance(double a, double mu, int buffer) {
  std::vector<double> y(static_cast<std::size_t>(buffer) + 1, 0.0);
  double open = 1.0;
  for (int it = 0; it < 10000; ++it) {
    const double r = a / (mu * open);
    double total = 0.0, p = 1.0;
    for (int n = 0; n <= buffer; ++n) {
      y[n] = p;
      total += p;
      p *= r;
    }
    for (double& v : y) v /= total;
    const double next = 1.0 - y.back();
    if (std::abs(next - open) < 1e-15) break;
    open = 0.5 * (open + next);
  }
  return y;
}

TEST(Fluid, SingleGroupEquilibria) {
  for (auto [lambda, buffer] : {std::pair{0.6, 2}, std::pair{2.4, 3}, std::pair{1.0, 1}}) {
    const Scenario s = SingleGroup(lambda, 4.0, buffer, 3);
    const double rho = lambda / (3 * 4.0);
    FluidOptions o;
    o.split = FluidSplit::kPackFirst;
    const std::vector<double> pack = SolveFluidEquilibrium(s, o).y[0];
    EXPECT_NEAR(pack[0], 1.0 - rho, 1e-6);
    EXPECT_NEAR(pack[buffer], rho, 1e-6);

    o.split = FluidSplit::kSpreadFirst;
    const std::vector<double> spread = SolveFluidEquilibrium(s, o).y[0];
    EXPECT_NEAR(spread[0], 1.0 - rho, 1e-6);
    EXPECT_NEAR(spread[1], rho, 1e-6);

    // Interior equilibrium: the explicit step carries O(dt) bias here.
    o.split = FluidSplit::kProportional;
    o.dt = 0.002 / 4.0;
    const std::vector<double> prop = SolveFluidEquilibrium(s, o).y[0];
    const std::vector<double> oracle = ProportionalBalance(lambda / 3, 4.0, buffer);
    for (int n = 0; n <= buffer; ++n) EXPECT_NEAR(prop[n], oracle[n], 5e-4) << n;
  }
}

TEST(Fluid, AutoSplitFollowsTieBreak) {
  Scenario s = SingleGroup(0.6, 4.0, 2, 3);
  s.tie_break = TieBreak::kShortestQueue;
  EXPECT_NEAR(SolveFluidEquilibrium(s).y[0][1], 0.05, 1e-6);
  s.tie_break = TieBreak::kLowestLabel;
  EXPECT_NEAR(SolveFluidEquilibrium(s).y[0][2], 0.05, 1e-6);
}

TEST(Fluid, NoArrivalsStaysEmpty) {
  Scenario s = SingleGroup(1.0, 1.0, 3, 2);
  s.job_types[0].base_rate = 0.0;
  FluidModel model(s, FluidSplit::kAuto);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(model.Step(0.1), 0.0);
  EXPECT_EQ(model.y()[0], (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
  const OccupancyVector z = model.ToOccupancy();
  EXPECT_NEAR(z.sum(), 1.0, 1e-15);
  EXPECT_THROW(SolveFluidEquilibrium(s), ScenarioError);
}

TEST(Fluid, ConservesMassAndRoutesEveryArrival) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams p;
    p.mode = trial % 2 ? GeneratorMode::kMultiType : GeneratorMode::kSingleType;
    p.rho = 0.2 + 1.2 * u(rng);
    p.buffer = 1 + static_cast<int>(rng() % 4);
    const Scenario s = Scale(GenerateScenario(rng(), p), 1 + static_cast<int>(rng() % 3));
    for (FluidSplit split : {FluidSplit::kPackFirst, FluidSplit::kSpreadFirst, FluidSplit::kProportional}) {
      FluidModel model(s, split);
      std::vector<std::vector<double>> y = model.y();
      for (auto& level : y) {
        double total = 0.0;
        for (double& v : level) total += (v = u(rng));
        for (double& v : level) v /= total;
      }
      model.set_y(y);
      const double dt = 0.5 / 10.0;
      for (int step = 0; step < 500; ++step) {
        const double dropped = model.Step(dt);
        EXPECT_GE(dropped, -1e-15);
        EXPECT_NEAR(model.last_admitted() + dropped, model.total_arrival_rate() * dt, 1e-12);
      }
      for (const auto& level : model.y()) {
        EXPECT_NEAR(std::accumulate(level.begin(), level.end(), 0.0), 1.0, 1e-9);
        for (double v : level) EXPECT_GE(v, -1e-12);
      }
      EXPECT_NEAR(model.ToOccupancy().sum(), 1.0, 1e-9);
    }
  }
}

// Each group, in efficiency order, absorbs what it is offered up to its
// capacity; overflow is passed on pro rata per type.
struct WaterFill {
  double throughput = 0.0;
  double power = 0.0;
};

WaterFill WaterFilling(const Scenario& s) {
  std::vector<std::size_t> order(s.groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return EffectiveEnergyEfficiency(s.groups[a]) > EffectiveEnergyEfficiency(s.groups[b]);
  });
  const double servers = s.TotalServers();
  std::vector<double> left;
  for (std::size_t j = 0; j < s.job_types.size(); ++j) left.push_back(s.ArrivalRate(j) / servers);
  WaterFill w;
  for (std::size_t k : order) {
    const ServerGroup& g = s.groups[k];
    const double mass = s.ServerCount(k) / servers;
    double offered = 0.0;
    std::vector<std::size_t> mine;
    for (std::size_t j = 0; j < s.job_types.size(); ++j) {
      const auto& av = s.job_types[j].available_groups;
      if (std::find(av.begin(), av.end(), g.id) != av.end()) {
        offered += left[j];
        mine.push_back(j);
      }
    }
    const double taken = std::min(offered, g.mu * mass);
    if (offered > 0.0) {
      for (std::size_t j : mine) left[j] *= 1.0 - taken / offered;
    }
    const double busy = taken / (g.mu * mass);
    w.throughput += taken;
    w.power += mass * (g.eps_idle + (g.eps_busy - g.eps_idle) * busy);
  }
  return w;
}

TEST(Benchmark, MatchesWaterFilling) {
  std::vector<Scenario> cases = {Fixture("case1.json"), Fixture("case2.json")};
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    GeneratorParams p;
    p.mode = i % 2 ? GeneratorMode::kMultiType : GeneratorMode::kSingleType;
    p.rho = 0.3 + 0.05 * i;
    cases.push_back(GenerateScenario(rng(), p));
  }
  for (const Scenario& s : cases) {
    const BenchmarkResult b = OptEnergyEfficiency(s);
    const WaterFill w = WaterFilling(s);
    EXPECT_NEAR(b.throughput, w.throughput, 1e-5 * w.throughput) << s.name;
    EXPECT_NEAR(b.power, w.power, 1e-5 * w.power) << s.name;
    EXPECT_NEAR(b.ee_opt, w.throughput / w.power, 1e-5 * b.ee_opt) << s.name;
    EXPECT_EQ(b.indices.size(), s.groups.size());
  }
}

TEST(Benchmark, ScaleInvariant) {
  const Scenario s = Fixture("case1.json");
  EXPECT_NEAR(OptEnergyEfficiency(s).ee_opt, OptEnergyEfficiency(Scale(s, 7)).ee_opt, 1e-9);
}

TEST(Benchmark, EquilibriumCarriesVirtualGroup) {
  const Scenario s = Fixture("case1.json");
  const OccupancyVector z = SolveFluidEquilibrium(s).z;
  const OccupancyVector scaled = SolveFluidEquilibrium(Scale(s, 9)).z;
  ASSERT_EQ(z.states[10].group, -1);
  EXPECT_NEAR(z.z[10], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(z.sum(), 1.0, 1e-12);
  for (std::size_t i = 0; i < z.z.size(); ++i) EXPECT_NEAR(z.z[i], scaled.z[i], 1e-12);
}

TEST(Benchmark, StepSizeIndependent) {
  for (const char* name : {"case1.json", "case2.json"}) {
    const Scenario s = Fixture(name);
    FluidOptions coarse, fine;
    coarse.dt = 0.5 / 8.06114;
    fine.dt = 0.1 / 8.06114;
    EXPECT_NEAR(OptEnergyEfficiency(s, coarse).ee_opt, OptEnergyEfficiency(s, fine).ee_opt, 1e-6);
  }
}

TEST(Benchmark, CertificationAndApproximation) {
  const BenchmarkResult one = OptEnergyEfficiency(Fixture("case1.json"));
  EXPECT_TRUE(one.certified);
  EXPECT_FALSE(one.approximate);
  Scenario s = Fixture("case2.json");
  s.job_types[0].size_dist = SizeDistribution::ParetoFinite();
  const BenchmarkResult two = OptEnergyEfficiency(s);
  EXPECT_TRUE(two.approximate);
  EXPECT_EQ(two.certified, two.availability.heavy_traffic);
}

TEST(Benchmark, ReportsNonConvergence) {
  FluidOptions o;
  o.max_time = 0.01;
  try {
    SolveFluidEquilibrium(Fixture("case1.json"), o);
    FAIL() << "expected FluidConvergenceError";
  } catch (const FluidConvergenceError& e) {
    EXPECT_GT(e.residual(), o.tol);
    EXPECT_NEAR(e.last().sum(), 1.0, 1e-9);
  }
}

TEST(Deviation, Examples) {
  EXPECT_NEAR(NormalizedDeviation(0.5, 0.45), 0.1, 1e-15);
  EXPECT_NEAR(NormalizedDeviation(0.5, 0.55), -0.1, 1e-15);
  EXPECT_THROW(NormalizedDeviation(0.0, 0.1), ScenarioError);
}

TEST(EmpiricalOccupancy, NormalizedWithVirtualGroup) {
  const Scenario s = Scale(Fixture("case1.json"), 3);
  std::vector<std::vector<double>> occ(5, {0.5, 0.25, 0.25});
  const OccupancyVector z = EmpiricalOccupancy(s, occ);
  EXPECT_NEAR(z.sum(), 1.0, 1e-12);
  // 15 servers and 3 virtual ones.
  EXPECT_NEAR(z.z[10], 3.0 / 18.0, 1e-15);
  EXPECT_NEAR(z.z[0], 3.0 * 0.5 / 18.0, 1e-15);
  occ.pop_back();
  EXPECT_THROW(EmpiricalOccupancy(s, occ), ScenarioError);
}

}  // namespace
}  // namespace farmsim
