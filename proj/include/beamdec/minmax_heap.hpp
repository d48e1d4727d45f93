#pragma once

#include <bit>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "beamdec/core.hpp"

namespace beamdec {

/// Fixed-capacity double-ended priority queue backed by a min-max heap
/// (Atkinson et al.): even levels hold minima, odd levels maxima, giving
/// O(1) access to both the best and the worst element and O(log n) mutation.
///
/// `WorseThan(a, b)` must be a strict total order meaning "a is worse than
/// b". The minimum of the heap is then the worst element, the maximum the
/// best. One instance represents one beam; capacity is the beam width.
/// What push_bounded did with the offered item.
enum class PushOutcome { Inserted, Evicted, Rejected };

template <typename T, typename WorseThan>
class BoundedMinMaxHeap {
 public:
  static constexpr std::size_t kUnboundedCapacity = std::numeric_limits<std::size_t>::max();

  explicit BoundedMinMaxHeap(std::size_t capacity, WorseThan worse = WorseThan())
      : capacity_(capacity), worse_(std::move(worse)) {
    if (capacity_ == 0) throw ConfigError("BoundedMinMaxHeap: capacity must be positive");
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  bool full() const noexcept { return items_.size() >= capacity_; }
  std::size_t capacity() const noexcept { return capacity_; }

  /// All items, heap-ordered (not sorted).
  std::span<const T> items() const noexcept { return {items_.data(), items_.size()}; }

  /// Inserts when not full. When full: if the item is strictly better than
  /// the current worst, the worst is evicted and returned; otherwise the
  /// item itself is returned untouched. Returns nullopt on plain insertion.
  std::optional<T> push_bounded(T item, PushOutcome* outcome = nullptr) {
    if (!full()) {
      items_.push_back(std::move(item));
      bubble_up(items_.size() - 1);
      if (outcome) *outcome = PushOutcome::Inserted;
      return std::nullopt;
    }
    if (!worse_(items_[0], item)) {  // at-or-below the worst
      if (outcome) *outcome = PushOutcome::Rejected;
      return item;
    }
    T evicted = std::move(items_[0]);
    items_[0] = std::move(item);
    trickle_down(0);
    if (outcome) *outcome = PushOutcome::Evicted;
    return evicted;
  }

  const T& peek_best() const {
    require_nonempty("peek_best");
    return items_[best_index()];
  }

  const T& peek_worst() const {
    require_nonempty("peek_worst");
    return items_[0];
  }

  std::pair<const T&, const T&> peek_pair() const {
    require_nonempty("peek_pair");
    return {items_[best_index()], items_[0]};
  }

  T pop_best() {
    require_nonempty("pop_best");
    return remove_at(best_index());
  }

  T pop_worst() {
    require_nonempty("pop_worst");
    return remove_at(0);
  }

  void clear() noexcept { items_.clear(); }

 private:
  void require_nonempty(const char* op) const {
    if (items_.empty()) throw std::out_of_range(std::string(op) + " on empty heap");
  }

  // Level parity: level(i) = bit_width(i + 1) - 1; even levels are min levels.
  static bool min_level(std::size_t i) noexcept {
    return (std::bit_width(i + 1) & 1u) == 1u;
  }
  static std::size_t parent(std::size_t i) noexcept { return (i - 1) / 2; }
  static bool has_grandparent(std::size_t i) noexcept { return i >= 3; }

  std::size_t best_index() const noexcept {
    if (items_.size() == 1) return 0;
    if (items_.size() == 2) return 1;
    return worse_(items_[1], items_[2]) ? 2 : 1;
  }

  T remove_at(std::size_t i) {
    T out = std::move(items_[i]);
    if (i + 1 != items_.size()) {
      items_[i] = std::move(items_.back());
      items_.pop_back();
      trickle_down(i);
    } else {
      items_.pop_back();
    }
    return out;
  }

  void bubble_up(std::size_t i) {
    if (i == 0) return;
    const std::size_t p = parent(i);
    if (min_level(i)) {
      if (worse_(items_[p], items_[i])) {
        std::swap(items_[i], items_[p]);
        bubble_up_grand(p, /*min=*/false);
      } else {
        bubble_up_grand(i, /*min=*/true);
      }
    } else {
      if (worse_(items_[i], items_[p])) {
        std::swap(items_[i], items_[p]);
        bubble_up_grand(p, /*min=*/true);
      } else {
        bubble_up_grand(i, /*min=*/false);
      }
    }
  }

  void bubble_up_grand(std::size_t i, bool min) {
    while (has_grandparent(i)) {
      const std::size_t g = parent(parent(i));
      const bool lift = min ? worse_(items_[i], items_[g]) : worse_(items_[g], items_[i]);
      if (!lift) break;
      std::swap(items_[i], items_[g]);
      i = g;
    }
  }

  void trickle_down(std::size_t i) { trickle(i, min_level(i)); }

  // Extreme (min or max) of children and grandchildren, or npos.
  std::size_t extreme_descendant(std::size_t i, bool min) const noexcept {
    const std::size_t n = items_.size();
    std::size_t best = std::size_t(-1);
    auto consider = [&](std::size_t c) {
      if (c >= n) return;
      if (best == std::size_t(-1) ||
          (min ? worse_(items_[c], items_[best]) : worse_(items_[best], items_[c])))
        best = c;
    };
    const std::size_t c1 = 2 * i + 1, c2 = 2 * i + 2;
    consider(c1);
    consider(c2);
    consider(2 * c1 + 1);
    consider(2 * c1 + 2);
    consider(2 * c2 + 1);
    consider(2 * c2 + 2);
    return best;
  }

  void trickle(std::size_t i, bool min) {
    for (;;) {
      const std::size_t m = extreme_descendant(i, min);
      if (m == std::size_t(-1)) return;
      const bool is_grandchild = m > 2 * i + 2;
      const bool moves = min ? worse_(items_[m], items_[i]) : worse_(items_[i], items_[m]);
      if (!moves) return;
      std::swap(items_[i], items_[m]);
      if (!is_grandchild) return;
      const std::size_t p = parent(m);
      const bool cross = min ? worse_(items_[p], items_[m]) : worse_(items_[m], items_[p]);
      if (cross) std::swap(items_[m], items_[p]);
      i = m;
    }
  }

  std::size_t capacity_;
  WorseThan worse_;
  std::vector<T> items_;
};

}  // namespace beamdec
