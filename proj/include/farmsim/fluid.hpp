#ifndef FARMSIM_FLUID_HPP_
#define FARMSIM_FLUID_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "farmsim/model.hpp"

namespace farmsim {

// M/M/1/B stationary law: pi(n) proportional to (lambda/mu)^n.
std::vector<double> BirthDeathSteadyState(double lambda, double mu, int buffer);

struct AvailabilityLoad {
  std::vector<double> A;  // per type
  bool heavy_traffic = true;
};

// Each server sees every type it can serve at the scenario's (scaled) rates
// and accepts whenever non-full.
AvailabilityLoad ComputeAvailabilityLoad(const Scenario& scenario);

// 1 - e*(eps - eps0)/mu.
double WhittleIndex(const ServerGroup& group, double e_star);

// Per-server relaxed objective of a threshold policy accepting in states
// 0..m at aggregate arrival rate `lambda`; m = -1 (always reject) gives 0.
double RelaxedSubproblemValue(const ServerGroup& group, int m, double nu, double e_star,
                              double lambda);

// One entry per ordered fluid state. group == -1 is the virtual blocking
// group.
struct FluidState {
  int group = 0;  // index into Scenario::groups
  int n = 0;
};

// Controllable states by descending index (most efficient group first,
// ties by group position then occupancy), then the virtual state, then the
// full states in the same group order.
std::vector<FluidState> StateOrdering(const Scenario& scenario);

struct OccupancyVector {
  std::vector<FluidState> states;
  std::vector<double> z;

  double sum() const;
};

// How a group's inflow is spread over its non-full occupancy levels.
enum class FluidSplit {
  kAuto,          // follow the scenario's tie-break rule
  kPackFirst,     // fullest non-full level first (lowest-label limit)
  kSpreadFirst,   // emptiest level first (shortest-queue limit)
  kProportional,  // proportional to level mass
};

struct FluidOptions {
  double tol = 1e-9;
  double max_time = 0.0;  // <= 0: 1e4 / min mu
  double dt = 0.0;        // <= 0: 0.5 / max mu
  FluidSplit split = FluidSplit::kAuto;
};

// Mean-field dynamics under strict efficiency-priority routing. y[k][n] is
// the fraction of group k's servers holding n jobs; each group carries mass
// R_k / sum R.
class FluidModel {
 public:
  FluidModel(const Scenario& scenario, FluidSplit split);

  // Exact-mass step: completions, then arrivals routed group by group in
  // priority order with each level's transfer capped by its mass. Returns
  // the arrival mass dropped because every available group was full.
  double Step(double dt);

  const std::vector<std::vector<double>>& y() const { return y_; }
  void set_y(std::vector<std::vector<double>> y) { y_ = std::move(y); }
  const std::vector<double>& group_mass() const { return mass_; }
  double total_arrival_rate() const { return total_rate_; }  // per unit mass
  // Arrival mass admitted during the last Step.
  double last_admitted() const { return last_admitted_; }

  OccupancyVector ToOccupancy() const;

 private:
  const Scenario& scenario_;
  FluidSplit split_;
  std::vector<int> order_;       // groups by priority
  std::vector<double> mass_;     // R_k / sum R
  std::vector<double> rates_;    // per type, per unit mass
  std::vector<std::vector<int>> types_of_group_;
  double total_rate_ = 0.0;
  double last_admitted_ = 0.0;
  std::vector<std::vector<double>> y_;
};

class FluidConvergenceError : public std::runtime_error {
 public:
  FluidConvergenceError(const std::string& what, OccupancyVector last, double residual)
      : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
  const OccupancyVector& last() const { return last_; }
  double residual() const { return residual_; }

 private:
  OccupancyVector last_;
  double residual_;
};

struct FluidEquilibrium {
  OccupancyVector z;
  std::vector<std::vector<double>> y;
  double time = 0.0;
  double residual = 0.0;
};

// Integrates from the empty state until the per-time change drops below tol.
FluidEquilibrium SolveFluidEquilibrium(const Scenario& scenario, const FluidOptions& options = {});

struct BenchmarkResult {
  FluidEquilibrium equilibrium;
  double ee_opt = 0.0;
  double throughput = 0.0;  // per server of the unit-scale farm
  double power = 0.0;
  AvailabilityLoad availability;
  bool certified = false;    // heavy traffic holds or a single job type
  bool approximate = false;  // non-exponential sizes present
  std::vector<double> indices;  // Whittle index per group at e* = ee_opt
};

BenchmarkResult OptEnergyEfficiency(const Scenario& scenario, const FluidOptions& options = {});

// (ee_opt - ee_policy) / ee_opt.
double NormalizedDeviation(double ee_opt, double ee_policy);

// Time-average simulated occupancy per group mapped onto StateOrdering,
// as proportions of Scenario::Population().
OccupancyVector EmpiricalOccupancy(const Scenario& scenario,
                                   const std::vector<std::vector<double>>& occupancy);

}  // namespace farmsim

#endif  // FARMSIM_FLUID_HPP_
