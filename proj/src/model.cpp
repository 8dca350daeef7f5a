#include "farmsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace farmsim {

namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void SizeDistribution::Validate() const {
  if (IsPareto() && !(shape > 1.0)) {
    std::ostringstream msg;
    msg << "Pareto shape " << shape << " has no finite mean";
    throw ScenarioError(msg.str());
  }
}

std::string ToString(SizeKind kind) {
  switch (kind) {
    case SizeKind::kExponential: return "exp";
    case SizeKind::kParetoFinite: return "pareto-f";
    case SizeKind::kParetoInfinite: return "pareto-inf";
    case SizeKind::kDeterministic: return "det";
  }
  return "?";
}

SizeKind SizeKindFromString(const std::string& name) {
  const std::string n = Lower(name);
  if (n == "exp" || n == "exponential") return SizeKind::kExponential;
  if (n == "pareto-f" || n == "pareto_finite" || n == "paretofinite") return SizeKind::kParetoFinite;
  if (n == "pareto-inf" || n == "pareto_infinite" || n == "paretoinfinite") return SizeKind::kParetoInfinite;
  if (n == "det" || n == "deterministic") return SizeKind::kDeterministic;
  throw ScenarioError("unknown size distribution '" + name + "'");
}

std::string ToString(Discipline d) { return d == Discipline::kPS ? "ps" : "srpt"; }
std::string ToString(TieBreak t) { return t == TieBreak::kLowestLabel ? "lltb" : "sqtb"; }

Discipline DisciplineFromString(const std::string& name) {
  const std::string n = Lower(name);
  if (n == "ps") return Discipline::kPS;
  if (n == "srpt") return Discipline::kSRPT;
  throw ScenarioError("unknown discipline '" + name + "'");
}

TieBreak TieBreakFromString(const std::string& name) {
  const std::string n = Lower(name);
  if (n == "lltb") return TieBreak::kLowestLabel;
  if (n == "sqtb") return TieBreak::kShortestQueue;
  throw ScenarioError("unknown tie-break rule '" + name + "'");
}

void ServerGroup::Validate() const {
  std::ostringstream msg;
  msg << "group " << id << ": ";
  if (!(mu > 0.0)) {
    msg << "service rate must be positive";
  } else if (!(eps_idle >= 0.0) || !(eps_busy > eps_idle)) {
    msg << "power rates must satisfy busy > idle >= 0";
  } else if (buffer < 1) {
    msg << "buffer must be at least 1";
  } else if (base_count < 1) {
    msg << "server count must be at least 1";
  } else {
    return;
  }
  throw ScenarioError(msg.str());
}

int Scenario::TotalServers() const {
  int total = 0;
  for (std::size_t k = 0; k < groups.size(); ++k) total += ServerCount(k);
  return total;
}

std::size_t Scenario::GroupIndex(int group_id) const {
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].id == group_id) return k;
  }
  throw ScenarioError("unknown group id " + std::to_string(group_id));
}

void Scenario::Validate() const {
  if (groups.empty()) throw ScenarioError("scenario has no server groups");
  if (job_types.empty()) throw ScenarioError("scenario has no job types");
  if (scaling < 1) throw ScenarioError("scaling parameter must be a positive integer");
  for (std::size_t k = 0; k < groups.size(); ++k) {
    groups[k].Validate();
    if (k > 0 && groups[k].id <= groups[k - 1].id) {
      throw ScenarioError("group ids must be strictly increasing");
    }
  }
  std::set<int> type_ids;
  for (const JobType& type : job_types) {
    const std::string where = "job type " + std::to_string(type.id) + ": ";
    if (!type_ids.insert(type.id).second) throw ScenarioError(where + "duplicate id");
    if (!(type.base_rate > 0.0)) throw ScenarioError(where + "arrival rate must be positive");
    if (type.available_groups.empty()) throw ScenarioError(where + "no available groups");
    std::set<int> seen;
    for (int g : type.available_groups) {
      GroupIndex(g);
      if (!seen.insert(g).second) throw ScenarioError(where + "duplicate available group");
    }
    type.size_dist.Validate();
  }
}

double EffectiveEnergyEfficiency(const ServerGroup& group) {
  return group.mu / (group.eps_busy - group.eps_idle);
}

double NormalizedOfferedTraffic(const Scenario& scenario) {
  double capacity = 0.0;
  for (std::size_t k = 0; k < scenario.groups.size(); ++k) {
    capacity += scenario.ServerCount(k) * scenario.groups[k].mu;
  }
  if (!(capacity > 0.0)) throw ScenarioError("zero total service rate");
  double load = 0.0;
  for (std::size_t j = 0; j < scenario.job_types.size(); ++j) load += scenario.ArrivalRate(j);
  return load / capacity;
}

double PerTypeTraffic(const Scenario& scenario, std::size_t type_index) {
  double capacity = 0.0;
  for (int g : scenario.job_types.at(type_index).available_groups) {
    const std::size_t k = scenario.GroupIndex(g);
    capacity += scenario.ServerCount(k) * scenario.groups[k].mu;
  }
  if (!(capacity > 0.0)) throw ScenarioError("zero service rate for job type");
  return scenario.ArrivalRate(type_index) / capacity;
}

Scenario Scale(const Scenario& scenario, int h) {
  if (h < 1) throw ScenarioError("scaling parameter must be a positive integer");
  Scenario scaled = scenario;
  scaled.scaling = scenario.scaling * h;
  return scaled;
}

Scenario Rebase(const Scenario& scenario) {
  Scenario base = scenario;
  for (ServerGroup& g : base.groups) g.base_count *= scenario.scaling;
  for (JobType& j : base.job_types) j.base_rate *= scenario.scaling;
  base.scaling = 1;
  return base;
}

Scenario GenerateScenario(std::uint64_t seed, const GeneratorParams& params) {
  if (params.groups < 2) throw ScenarioError("generator needs at least two groups");
  if (params.mode == GeneratorMode::kMultiType && params.types < 1) {
    throw ScenarioError("generator needs at least one job type");
  }
  if (!(params.rho > 0.0)) throw ScenarioError("offered traffic must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rate_draw(1.0, 10.0);
  std::uniform_real_distribution<double> ratio_draw(0.5, 1.0);

  const bool single = params.mode == GeneratorMode::kSingleType;
  const int buffer = params.buffer > 0 ? params.buffer : (single ? 2 : 1);

  Scenario s;
  s.name = (single ? "generated-single-" : "generated-multi-") + std::to_string(seed);
  double efficiency = 1.0;  // mu_k / eps_k
  for (int k = 1; k <= params.groups; ++k) {
    ServerGroup g;
    g.id = k;
    g.mu = rate_draw(rng);
    if (k > 1) efficiency *= ratio_draw(rng);
    g.eps_busy = g.mu / efficiency;
    g.eps_idle = g.eps_busy * std::min(0.1 + 0.1 * k, 0.9);
    g.buffer = buffer;
    g.base_count = 1;
    s.groups.push_back(g);
  }

  auto capacity_of = [&](const std::vector<int>& ids) {
    double c = 0.0;
    for (int id : ids) {
      const ServerGroup& g = s.groups[static_cast<std::size_t>(id - 1)];
      c += g.base_count * g.mu;
    }
    return c;
  };

  if (single) {
    JobType t;
    t.id = 1;
    t.available_groups.resize(static_cast<std::size_t>(params.groups));
    std::iota(t.available_groups.begin(), t.available_groups.end(), 1);
    t.base_rate = params.rho * capacity_of(t.available_groups);
    s.job_types.push_back(t);
  } else {
    std::uniform_int_distribution<int> count_draw(1, params.groups);
    std::vector<int> all(static_cast<std::size_t>(params.groups));
    std::iota(all.begin(), all.end(), 1);
    for (int j = 1; j <= params.types; ++j) {
      const int m = count_draw(rng);
      std::vector<int> pool = all;
      std::shuffle(pool.begin(), pool.end(), rng);
      JobType t;
      t.id = j;
      t.available_groups.assign(pool.begin(), pool.begin() + m);
      std::sort(t.available_groups.begin(), t.available_groups.end());
      t.base_rate = params.rho * capacity_of(t.available_groups);
      s.job_types.push_back(t);
    }
  }
  s.Validate();
  return s;
}

FarmLayout::FarmLayout(const Scenario& scenario) {
  const int groups = static_cast<int>(scenario.groups.size());
  group_first_.resize(static_cast<std::size_t>(groups));
  group_size_.resize(static_cast<std::size_t>(groups));
  group_buffer_.resize(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    group_first_[g] = static_cast<int>(server_group_.size());
    group_size_[g] = scenario.ServerCount(static_cast<std::size_t>(g));
    group_buffer_[g] = scenario.groups[g].buffer;
    server_group_.insert(server_group_.end(), static_cast<std::size_t>(group_size_[g]), g);
  }

  // Exactly equal efficiencies share a rank.
  std::vector<double> eff(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) eff[g] = EffectiveEnergyEfficiency(scenario.groups[g]);
  std::vector<double> distinct = eff;
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  efficiency_rank_.resize(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    efficiency_rank_[g] = static_cast<int>(
        std::find(distinct.begin(), distinct.end(), eff[g]) - distinct.begin());
  }

  const int types = static_cast<int>(scenario.job_types.size());
  type_servers_.resize(static_cast<std::size_t>(types));
  type_groups_.resize(static_cast<std::size_t>(types));
  group_types_.resize(static_cast<std::size_t>(groups));
  for (int j = 0; j < types; ++j) {
    std::vector<int>& gs = type_groups_[j];
    for (int id : scenario.job_types[j].available_groups) {
      gs.push_back(static_cast<int>(scenario.GroupIndex(id)));
    }
    std::sort(gs.begin(), gs.end());
    for (int g : gs) {
      group_types_[g].push_back(j);
      for (int s = 0; s < group_size_[g]; ++s) type_servers_[j].push_back(group_first_[g] + s);
    }
  }
}

}  // namespace farmsim
