#include "farmsim/policy.hpp"

#include <algorithm>
#include <cctype>

namespace farmsim {

AssignmentPolicy::AssignmentPolicy(const FarmLayout& layout)
    : layout_(layout), occupancy_(static_cast<std::size_t>(layout.num_servers()), 0) {}

int AssignmentPolicy::Increment(int server) {
  if (full(server)) throw InvariantViolation("job admitted to a full server");
  return ++occupancy_[server];
}

int AssignmentPolicy::Decrement(int server) {
  if (occupancy_[server] == 0) throw InvariantViolation("job released from an empty server");
  return --occupancy_[server];
}

PasPolicy::PasPolicy(const FarmLayout& layout, TieBreak tie)
    : AssignmentPolicy(layout), tie_(tie) {
  const int servers = layout.num_servers();
  server_rank_.resize(static_cast<std::size_t>(servers));
  for (int s = 0; s < servers; ++s) server_rank_[s] = layout.efficiency_rank(layout.group_of(s));

  const PasOrder order{&server_rank_, &occupancy_, tie == TieBreak::kShortestQueue};
  heaps_.reserve(static_cast<std::size_t>(layout.num_types()));
  indication_.assign(static_cast<std::size_t>(layout.num_types()), kBlocked);
  for (int j = 0; j < layout.num_types(); ++j) {
    heaps_.emplace_back(static_cast<std::size_t>(servers), order);
    for (int s : layout.servers_of_type(j)) heaps_[j].push(s);
    Refresh(j);
  }
}

void PasPolicy::Refresh(int type) {
  indication_[type] = heaps_[type].empty() ? kBlocked : heaps_[type].top();
}

int PasPolicy::Assign(int type) const {
  const int s = indication_[type];
  if (s != kBlocked && full(s)) throw InvariantViolation("indication vector points at a full server");
  return s;
}

void PasPolicy::UpdateUponArrival(int server) {
  for (int j : layout_.types_of_server(server)) {
    heaps_[j].erase(server);
    Refresh(j);
  }
}

void PasPolicy::UpdateUponDeparture(int server) {
  for (int j : layout_.types_of_server(server)) {
    heaps_[j].push(server);
    Refresh(j);
  }
}

void PasPolicy::Admit(int server) {
  const int n = Increment(server);
  if (n == layout_.buffer_of(server)) {
    UpdateUponArrival(server);
  } else if (tie_ == TieBreak::kShortestQueue) {
    for (int j : layout_.types_of_server(server)) {
      heaps_[j].update(server);
      Refresh(j);
    }
  }
}

void PasPolicy::Release(int server) {
  const int n = Decrement(server);
  if (n == layout_.buffer_of(server) - 1) {
    UpdateUponDeparture(server);
  } else if (tie_ == TieBreak::kShortestQueue) {
    for (int j : layout_.types_of_server(server)) {
      heaps_[j].update(server);
      Refresh(j);
    }
  }
}

JsqPolicy::JsqPolicy(const FarmLayout& layout) : AssignmentPolicy(layout) {
  const JsqOrder order{&occupancy_};
  heaps_.reserve(static_cast<std::size_t>(layout.num_types()));
  for (int j = 0; j < layout.num_types(); ++j) {
    heaps_.emplace_back(static_cast<std::size_t>(layout.num_servers()), order);
    for (int s : layout.servers_of_type(j)) heaps_[j].push(s);
  }
}

int JsqPolicy::Assign(int type) const {
  return heaps_[type].empty() ? kBlocked : heaps_[type].top();
}

void JsqPolicy::Admit(int server) {
  const bool now_full = Increment(server) == layout_.buffer_of(server);
  for (int j : layout_.types_of_server(server)) {
    if (now_full) {
      heaps_[j].erase(server);
    } else {
      heaps_[j].update(server);
    }
  }
}

void JsqPolicy::Release(int server) {
  const bool was_full = Decrement(server) == layout_.buffer_of(server) - 1;
  for (int j : layout_.types_of_server(server)) {
    if (was_full) {
      heaps_[j].push(server);
    } else {
      heaps_[j].update(server);
    }
  }
}

std::string ToString(PolicyKind kind) { return kind == PolicyKind::kPAS ? "pas" : "jsq"; }

PolicyKind PolicyKindFromString(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "pas") return PolicyKind::kPAS;
  if (n == "jsq") return PolicyKind::kJSQ;
  throw ScenarioError("unknown policy '" + name + "'");
}

std::unique_ptr<AssignmentPolicy> MakePolicy(PolicyKind kind, const FarmLayout& layout,
                                             TieBreak tie) {
  if (kind == PolicyKind::kPAS) return std::make_unique<PasPolicy>(layout, tie);
  return std::make_unique<JsqPolicy>(layout);
}

}  // namespace farmsim
