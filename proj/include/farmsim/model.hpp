#ifndef FARMSIM_MODEL_HPP_
#define FARMSIM_MODEL_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace farmsim {

// Raised for any scenario that violates the model's invariants.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an internal data structure is found in an impossible state.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class SizeKind { kExponential, kParetoFinite, kParetoInfinite, kDeterministic };

inline constexpr double kParetoFiniteShape = 2.001;
inline constexpr double kParetoInfiniteShape = 1.98;

/// Job-size law. Every kind is normalized to unit mean.
struct SizeDistribution {
  SizeKind kind = SizeKind::kExponential;
  double shape = 0.0;  // Pareto only

  static SizeDistribution Exponential() { return {SizeKind::kExponential, 0.0}; }
  static SizeDistribution ParetoFinite(double shape = kParetoFiniteShape) {
    return {SizeKind::kParetoFinite, shape};
  }
  static SizeDistribution ParetoInfinite(double shape = kParetoInfiniteShape) {
    return {SizeKind::kParetoInfinite, shape};
  }
  static SizeDistribution Deterministic() { return {SizeKind::kDeterministic, 0.0}; }

  bool IsPareto() const {
    return kind == SizeKind::kParetoFinite || kind == SizeKind::kParetoInfinite;
  }
  // Scale x_m = (a-1)/a so that a*x_m/(a-1) = 1.
  double ParetoScale() const { return (shape - 1.0) / shape; }
  void Validate() const;

  bool operator==(const SizeDistribution&) const = default;
};

std::string ToString(SizeKind kind);
SizeKind SizeKindFromString(const std::string& name);

struct ServerGroup {
  int id = 0;
  double mu = 0.0;        // peak service rate, size-units per time
  double eps_busy = 0.0;  // power drawn while at least one job is resident
  double eps_idle = 0.0;  // power drawn while empty
  int buffer = 1;         // B_k
  int base_count = 1;     // R_k at unit scaling

  void Validate() const;
  bool operator==(const ServerGroup&) const = default;
};

struct JobType {
  int id = 0;
  double base_rate = 0.0;             // arrivals per time at unit scaling
  std::vector<int> available_groups;  // group ids, sorted, unique
  SizeDistribution size_dist;

  bool operator==(const JobType&) const = default;
};

enum class Discipline { kPS, kSRPT };
enum class TieBreak { kLowestLabel, kShortestQueue };

std::string ToString(Discipline d);
std::string ToString(TieBreak t);
Discipline DisciplineFromString(const std::string& name);
TieBreak TieBreakFromString(const std::string& name);

// A server farm at a given scaling. Groups and job types hold unit-scale
// quantities; ServerCount() and ArrivalRate() are what the simulator consumes.
struct Scenario {
  std::string name;
  std::vector<ServerGroup> groups;
  std::vector<JobType> job_types;
  int scaling = 1;
  Discipline discipline = Discipline::kPS;
  TieBreak tie_break = TieBreak::kLowestLabel;

  int ServerCount(std::size_t group_index) const {
    return groups[group_index].base_count * scaling;
  }
  double ArrivalRate(std::size_t type_index) const {
    return job_types[type_index].base_rate * scaling;
  }
  int TotalServers() const;
  // Index of a group id in `groups`; throws ScenarioError if absent.
  std::size_t GroupIndex(int group_id) const;
  // The virtual blocking group holds one server per unit of scaling.
  static constexpr int kVirtualGroupCount = 1;
  int VirtualServers() const { return kVirtualGroupCount * scaling; }
  // Servers plus the virtual group: the population occupancy proportions
  // are taken over.
  int Population() const { return TotalServers() + VirtualServers(); }

  void Validate() const;
  bool operator==(const Scenario&) const = default;
};

/// mu / (eps_busy - eps_idle): service rate per unit of controllable power.
double EffectiveEnergyEfficiency(const ServerGroup& group);

/// Sum of arrival rates over total service capacity. Invariant under Scale().
double NormalizedOfferedTraffic(const Scenario& scenario);
/// Arrival rate of one type over the capacity of its available groups.
double PerTypeTraffic(const Scenario& scenario, std::size_t type_index);

/// Multiplies server counts and arrival rates by `h` (composes with any
/// existing scaling).
Scenario Scale(const Scenario& scenario, int h);
/// Folds the current scaling into the unit-scale quantities.
Scenario Rebase(const Scenario& scenario);

enum class GeneratorMode { kSingleType, kMultiType };

struct GeneratorParams {
  int groups = 5;
  int types = 3;   // ignored in single-type mode
  double rho = 0.6;
  GeneratorMode mode = GeneratorMode::kSingleType;
  int buffer = 0;  // 0 picks the mode default: 2 single-type, 1 multi-type
};

/// Random heterogeneous farm: mu_k ~ U[1,10], mu_1/eps_1 = 1, successive
/// mu/eps ratios ~ U[0.5,1], idle power eps_k * (0.1 + 0.1 k) capped at 0.9.
Scenario GenerateScenario(std::uint64_t seed, const GeneratorParams& params);

// Dense server numbering: group order as listed, servers of a group
// contiguous. Group-order position doubles as the lowest-label rule.
class FarmLayout {
 public:
  explicit FarmLayout(const Scenario& scenario);

  int num_servers() const { return static_cast<int>(server_group_.size()); }
  int num_groups() const { return static_cast<int>(group_first_.size()); }
  int num_types() const { return static_cast<int>(type_servers_.size()); }

  int group_of(int server) const { return server_group_[server]; }
  int buffer_of(int server) const { return group_buffer_[server_group_[server]]; }
  int group_first(int g) const { return group_first_[g]; }
  int group_size(int g) const { return group_size_[g]; }
  // Dense rank of effective energy efficiency, 0 = most efficient.
  int efficiency_rank(int g) const { return efficiency_rank_[g]; }

  const std::vector<int>& servers_of_type(int j) const { return type_servers_[j]; }
  const std::vector<int>& types_of_server(int s) const {
    return group_types_[server_group_[s]];
  }
  const std::vector<int>& groups_of_type(int j) const { return type_groups_[j]; }

 private:
  std::vector<int> server_group_;
  std::vector<int> group_first_;
  std::vector<int> group_size_;
  std::vector<int> group_buffer_;
  std::vector<int> efficiency_rank_;
  std::vector<std::vector<int>> type_servers_;
  std::vector<std::vector<int>> type_groups_;   // group indices
  std::vector<std::vector<int>> group_types_;   // type indices
};

}  // namespace farmsim

#endif  // FARMSIM_MODEL_HPP_
