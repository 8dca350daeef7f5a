#include "farmsim/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace farmsim {

namespace {

// Group positions, most efficient first, list order among equals.
std::vector<int> PriorityOrder(const Scenario& scenario) {
  std::vector<int> order(scenario.groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return EffectiveEnergyEfficiency(scenario.groups[a]) >
           EffectiveEnergyEfficiency(scenario.groups[b]);
  });
  return order;
}

FluidSplit ResolveSplit(FluidSplit split, TieBreak tie) {
  if (split != FluidSplit::kAuto) return split;
  return tie == TieBreak::kShortestQueue ? FluidSplit::kSpreadFirst : FluidSplit::kPackFirst;
}

}  // namespace

std::vector<double> BirthDeathSteadyState(double lambda, double mu, int buffer) {
  if (!(mu > 0.0)) throw ScenarioError("service rate must be positive");
  if (!(lambda >= 0.0)) throw ScenarioError("arrival rate must be non-negative");
  if (buffer < 1) throw ScenarioError("buffer must be at least 1");
  std::vector<double> pi(static_cast<std::size_t>(buffer) + 1, 0.0);
  if (lambda == 0.0) {
    pi[0] = 1.0;
    return pi;
  }
  // Log weights shifted by their maximum keep large r finite.
  const double log_r = std::log(lambda / mu);
  const double top = log_r > 0.0 ? buffer * log_r : 0.0;
  double total = 0.0;
  for (int n = 0; n <= buffer; ++n) {
    pi[n] = std::exp(n * log_r - top);
    total += pi[n];
  }
  for (double& p : pi) p /= total;
  return pi;
}

AvailabilityLoad ComputeAvailabilityLoad(const Scenario& scenario) {
  const std::size_t groups = scenario.groups.size();
  std::vector<double> load(groups, 0.0);
  for (std::size_t j = 0; j < scenario.job_types.size(); ++j) {
    for (int id : scenario.job_types[j].available_groups) {
      load[scenario.GroupIndex(id)] += scenario.ArrivalRate(j);
    }
  }
  std::vector<double> nonfull(groups, 0.0);
  for (std::size_t k = 0; k < groups; ++k) {
    const ServerGroup& g = scenario.groups[k];
    const std::vector<double> pi = BirthDeathSteadyState(load[k], g.mu, g.buffer);
    nonfull[k] = scenario.ServerCount(k) * (1.0 - pi.back());
  }
  AvailabilityLoad result;
  for (const JobType& type : scenario.job_types) {
    double a = 0.0;
    for (int id : type.available_groups) a += nonfull[scenario.GroupIndex(id)];
    result.A.push_back(a);
    if (a > 1.0) result.heavy_traffic = false;
  }
  return result;
}

double WhittleIndex(const ServerGroup& group, double e_star) {
  return 1.0 - e_star * (group.eps_busy - group.eps_idle) / group.mu;
}

double RelaxedSubproblemValue(const ServerGroup& group, int m, double nu, double e_star,
                              double lambda) {
  if (m < -1 || m >= group.buffer) throw ScenarioError("threshold outside 0..B-1");
  if (m == -1) return 0.0;
  const double r = lambda / group.mu;
  double num = 0.0, den = 0.0, power = 1.0;
  for (int n = 0; n <= m + 1; ++n) {
    if (n <= m) num += power;
    den += power;
    power *= r;
  }
  return lambda * (WhittleIndex(group, e_star) - nu) * num / den;
}

std::vector<FluidState> StateOrdering(const Scenario& scenario) {
  const std::vector<int> order = PriorityOrder(scenario);
  std::vector<FluidState> states;
  for (int k : order) {
    for (int n = 0; n < scenario.groups[k].buffer; ++n) states.push_back({k, n});
  }
  states.push_back({-1, 0});
  for (int k : order) states.push_back({k, scenario.groups[k].buffer});
  return states;
}

double OccupancyVector::sum() const { return std::accumulate(z.begin(), z.end(), 0.0); }

FluidModel::FluidModel(const Scenario& scenario, FluidSplit split)
    : scenario_(scenario),
      split_(ResolveSplit(split, scenario.tie_break)),
      order_(PriorityOrder(scenario)) {
  const std::size_t groups = scenario.groups.size();
  double servers = 0.0;
  for (std::size_t k = 0; k < groups; ++k) servers += scenario.ServerCount(k);
  for (std::size_t k = 0; k < groups; ++k) mass_.push_back(scenario.ServerCount(k) / servers);
  types_of_group_.resize(groups);
  for (std::size_t j = 0; j < scenario.job_types.size(); ++j) {
    rates_.push_back(scenario.ArrivalRate(j) / servers);
    total_rate_ += rates_.back();
    for (int id : scenario.job_types[j].available_groups) {
      types_of_group_[scenario.GroupIndex(id)].push_back(static_cast<int>(j));
    }
  }
  y_.resize(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    y_[k].assign(static_cast<std::size_t>(scenario.groups[k].buffer) + 1, 0.0);
    y_[k][0] = 1.0;
  }
}

double FluidModel::Step(double dt) {
  for (std::size_t k = 0; k < y_.size(); ++k) {
    std::vector<double>& y = y_[k];
    const double rate = scenario_.groups[k].mu * dt;
    // Upward sweep reads each level before it receives mass from above.
    for (std::size_t n = 1; n < y.size(); ++n) {
      const double f = rate * y[n];
      y[n] -= f;
      y[n - 1] += f;
    }
  }

  std::vector<double> remaining(rates_.size());
  for (std::size_t j = 0; j < rates_.size(); ++j) remaining[j] = rates_[j] * dt;
  double offered_total = std::accumulate(remaining.begin(), remaining.end(), 0.0);

  std::vector<double> snapshot;
  for (int k : order_) {
    double offered = 0.0;
    for (int j : types_of_group_[k]) offered += remaining[j];
    if (offered <= 0.0) continue;
    std::vector<double>& y = y_[k];
    const double m = mass_[k];
    const int buffer = static_cast<int>(y.size()) - 1;
    snapshot.assign(y.begin(), y.end());
    double left = offered;
    auto move = [&](int n, double amount) {  // amount in mass units
      y[n] -= amount / m;
      y[n + 1] += amount / m;
      left -= amount;
    };
    switch (split_) {
      case FluidSplit::kPackFirst:
        for (int n = buffer - 1; n >= 0 && left > 0.0; --n) move(n, std::min(left, m * snapshot[n]));
        break;
      case FluidSplit::kSpreadFirst:
        for (int n = 0; n < buffer && left > 0.0; ++n) move(n, std::min(left, m * snapshot[n]));
        break;
      default: {
        double open = 0.0;
        for (int n = 0; n < buffer; ++n) open += snapshot[n];
        if (open <= 0.0) break;
        const double take = std::min(offered, m * open);
        for (int n = 0; n < buffer; ++n) move(n, take * snapshot[n] / open);
        break;
      }
    }
    left = std::max(left, 0.0);
    const double keep = left / offered;
    for (int j : types_of_group_[k]) remaining[j] *= keep;
  }
  const double dropped = std::accumulate(remaining.begin(), remaining.end(), 0.0);
  last_admitted_ = offered_total - dropped;
  return dropped;
}

OccupancyVector FluidModel::ToOccupancy() const {
  // Reweight from the real servers onto the population with the virtual group.
  const double share = static_cast<double>(scenario_.TotalServers()) / scenario_.Population();
  OccupancyVector v;
  v.states = StateOrdering(scenario_);
  for (const FluidState& st : v.states) {
    v.z.push_back(st.group < 0 ? 1.0 - share : share * mass_[st.group] * y_[st.group][st.n]);
  }
  return v;
}

FluidEquilibrium SolveFluidEquilibrium(const Scenario& scenario, const FluidOptions& options) {
  if (!(options.tol > 0.0)) throw ScenarioError("fluid tolerance must be positive");
  scenario.Validate();
  double mu_min = scenario.groups[0].mu, mu_max = mu_min;
  for (const ServerGroup& g : scenario.groups) {
    mu_min = std::min(mu_min, g.mu);
    mu_max = std::max(mu_max, g.mu);
  }
  const double dt = options.dt > 0.0 ? options.dt : 0.5 / mu_max;
  const double max_time = options.max_time > 0.0 ? options.max_time : 1e4 / mu_min;

  FluidModel model(scenario, options.split);
  const std::vector<double>& mass = model.group_mass();
  double t = 0.0;
  double residual = 0.0;
  std::vector<std::vector<double>> previous;
  for (;;) {
    previous = model.y();
    model.Step(dt);
    t += dt;
    residual = 0.0;
    for (std::size_t k = 0; k < previous.size(); ++k) {
      for (std::size_t n = 0; n < previous[k].size(); ++n) {
        residual = std::max(residual, mass[k] * std::abs(model.y()[k][n] - previous[k][n]) / dt);
      }
    }
    if (residual < options.tol) break;
    if (t >= max_time) {
      std::ostringstream msg;
      msg << "fluid dynamics did not settle by t=" << t << " (residual " << residual << ")";
      throw FluidConvergenceError(msg.str(), model.ToOccupancy(), residual);
    }
  }
  FluidEquilibrium eq;
  eq.z = model.ToOccupancy();
  eq.y = model.y();
  eq.time = t;
  eq.residual = residual;
  return eq;
}

BenchmarkResult OptEnergyEfficiency(const Scenario& scenario, const FluidOptions& options) {
  BenchmarkResult result;
  result.equilibrium = SolveFluidEquilibrium(scenario, options);
  double servers = 0.0;
  for (std::size_t k = 0; k < scenario.groups.size(); ++k) servers += scenario.ServerCount(k);
  for (std::size_t k = 0; k < scenario.groups.size(); ++k) {
    const ServerGroup& g = scenario.groups[k];
    const double m = scenario.ServerCount(k) / servers;
    const double busy = 1.0 - result.equilibrium.y[k][0];
    result.throughput += m * g.mu * busy;
    result.power += m * (g.eps_busy * busy + g.eps_idle * (1.0 - busy));
  }
  result.ee_opt = result.power > 0.0 ? result.throughput / result.power : 0.0;
  result.availability = ComputeAvailabilityLoad(scenario);
  result.certified = result.availability.heavy_traffic || scenario.job_types.size() == 1;
  for (const JobType& type : scenario.job_types) {
    if (type.size_dist.kind != SizeKind::kExponential) result.approximate = true;
  }
  for (const ServerGroup& g : scenario.groups) result.indices.push_back(WhittleIndex(g, result.ee_opt));
  return result;
}

double NormalizedDeviation(double ee_opt, double ee_policy) {
  if (!(ee_opt > 0.0)) throw ScenarioError("reference energy efficiency must be positive");
  return (ee_opt - ee_policy) / ee_opt;
}

OccupancyVector EmpiricalOccupancy(const Scenario& scenario,
                                   const std::vector<std::vector<double>>& occupancy) {
  if (occupancy.size() != scenario.groups.size()) {
    throw ScenarioError("occupancy histogram does not match the scenario");
  }
  const double population = scenario.Population();
  OccupancyVector v;
  v.states = StateOrdering(scenario);
  for (const FluidState& st : v.states) {
    if (st.group < 0) {
      v.z.push_back(scenario.VirtualServers() / population);
    } else {
      v.z.push_back(scenario.ServerCount(static_cast<std::size_t>(st.group)) *
                    occupancy[st.group][st.n] / population);
    }
  }
  return v;
}

}  // namespace farmsim
