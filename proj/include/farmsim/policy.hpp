#ifndef FARMSIM_POLICY_HPP_
#define FARMSIM_POLICY_HPP_

#include <memory>
#include <string>
#include <vector>

#include "farmsim/indexed_heap.hpp"
#include "farmsim/model.hpp"

namespace farmsim {

inline constexpr int kBlocked = -1;

// Dispatch decision for one arriving job. Policies see only per-server
// occupancy, which they track through Admit/Release. The layout must outlive
// the policy.
class AssignmentPolicy {
 public:
  explicit AssignmentPolicy(const FarmLayout& layout);
  virtual ~AssignmentPolicy() = default;
  AssignmentPolicy(const AssignmentPolicy&) = delete;
  AssignmentPolicy& operator=(const AssignmentPolicy&) = delete;

  // Server chosen for a type-`type` arrival, or kBlocked when every
  // available server is full.
  virtual int Assign(int type) const = 0;
  // A job joined / left `server`.
  virtual void Admit(int server) = 0;
  virtual void Release(int server) = 0;

  int occupancy(int server) const { return occupancy_[server]; }
  bool full(int server) const { return occupancy_[server] >= layout_.buffer_of(server); }
  const FarmLayout& layout() const { return layout_; }

 protected:
  int Increment(int server);
  int Decrement(int server);

  const FarmLayout& layout_;
  std::vector<int> occupancy_;
};

// Orders servers by group efficiency rank, then (SQTB only) occupancy, then
// label.
struct PasOrder {
  const std::vector<int>* rank;
  const std::vector<int>* occupancy;
  bool by_queue;

  bool operator()(int a, int b) const {
    const int ra = (*rank)[a], rb = (*rank)[b];
    if (ra != rb) return ra < rb;
    if (by_queue) {
      const int na = (*occupancy)[a], nb = (*occupancy)[b];
      if (na != nb) return na < nb;
    }
    return a < b;
  }
};

// Priorities accounting for Available Servers: each job goes to a non-full
// available server of maximal effective energy efficiency. One max-heap per
// job type holds that type's non-full servers; the indication vector caches
// every heap's root so a decision is O(1). Heaps change only when a server
// crosses the full/non-full boundary (plus re-keys under SQTB).
class PasPolicy final : public AssignmentPolicy {
 public:
  PasPolicy(const FarmLayout& layout, TieBreak tie);

  int Assign(int type) const override;
  void Admit(int server) override;
  void Release(int server) override;

  // `server` just became full: drop it from every heap that holds it.
  void UpdateUponArrival(int server);
  // `server` just left the full state: return it to its heaps.
  void UpdateUponDeparture(int server);

  int indication(int type) const { return indication_[type]; }
  const IndexedHeap<PasOrder>& heap(int type) const { return heaps_[type]; }
  TieBreak tie_break() const { return tie_; }

 private:
  void Refresh(int type);

  TieBreak tie_;
  std::vector<int> server_rank_;
  std::vector<IndexedHeap<PasOrder>> heaps_;
  std::vector<int> indication_;
};

struct JsqOrder {
  const std::vector<int>* occupancy;
  bool operator()(int a, int b) const {
    const int na = (*occupancy)[a], nb = (*occupancy)[b];
    return na != nb ? na < nb : a < b;
  }
};

// Join-the-shortest-queue over the available non-full servers, lowest label
// among ties.
class JsqPolicy final : public AssignmentPolicy {
 public:
  explicit JsqPolicy(const FarmLayout& layout);

  int Assign(int type) const override;
  void Admit(int server) override;
  void Release(int server) override;

 private:
  std::vector<IndexedHeap<JsqOrder>> heaps_;
};

enum class PolicyKind { kPAS, kJSQ };

std::string ToString(PolicyKind kind);
PolicyKind PolicyKindFromString(const std::string& name);

std::unique_ptr<AssignmentPolicy> MakePolicy(PolicyKind kind, const FarmLayout& layout,
                                             TieBreak tie);

}  // namespace farmsim

#endif  // FARMSIM_POLICY_HPP_
