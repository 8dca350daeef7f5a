#ifndef FARMSIM_INDEXED_HEAP_HPP_
#define FARMSIM_INDEXED_HEAP_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "farmsim/model.hpp"

namespace farmsim {

// Binary heap over integer ids in [0, universe) with O(log n) erase and
// re-key by id. `Before(a, b)` is true when a must sit closer to the root.
template <typename Before>
class IndexedHeap {
 public:
  IndexedHeap(std::size_t universe, Before before)
      : pos_(universe, kAbsent), before_(std::move(before)) {}

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  bool contains(int id) const { return pos_[id] != kAbsent; }
  int top() const { return heap_.front(); }

  void push(int id) {
    if (contains(id)) throw InvariantViolation("heap: id inserted twice");
    pos_[id] = heap_.size();
    heap_.push_back(id);
    SiftUp(heap_.size() - 1);
  }

  void erase(int id) {
    if (!contains(id)) throw InvariantViolation("heap: erasing an absent id");
    const std::size_t i = pos_[id];
    const std::size_t last = heap_.size() - 1;
    if (i != last) {
      Swap(i, last);
      heap_.pop_back();
      pos_[id] = kAbsent;
      Fix(i);
    } else {
      heap_.pop_back();
      pos_[id] = kAbsent;
    }
  }

  // Restores order after the key of `id` changed.
  void update(int id) {
    if (!contains(id)) throw InvariantViolation("heap: updating an absent id");
    Fix(pos_[id]);
  }

  const std::vector<int>& items() const { return heap_; }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

  void Swap(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a]] = a;
    pos_[heap_[b]] = b;
  }

  void Fix(std::size_t i) {
    if (i > 0 && before_(heap_[i], heap_[(i - 1) / 2])) {
      SiftUp(i);
    } else {
      SiftDown(i);
    }
  }

  void SiftUp(std::size_t i) {
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!before_(heap_[i], heap_[parent])) break;
      Swap(i, parent);
      i = parent;
    }
  }

  void SiftDown(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t best = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && before_(heap_[l], heap_[best])) best = l;
      if (r < n && before_(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      Swap(i, best);
      i = best;
    }
  }

  std::vector<int> heap_;
  std::vector<std::size_t> pos_;
  Before before_;
};

}  // namespace farmsim

#endif  // FARMSIM_INDEXED_HEAP_HPP_
