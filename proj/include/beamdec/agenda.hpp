#pragma once

#include <optional>
#include <span>
#include <vector>

#include "beamdec/core.hpp"
#include "beamdec/minmax_heap.hpp"

namespace beamdec {

/// Choice point 1 of the meta-decoder: the global pop order.
enum class ComparatorKind {
  LengthFirst,  // shorter first, ties by higher priority (breadth-first flavor)
  ScoreFirst,   // higher priority first, ties by shorter length (best-first flavor)
};

/// Strict total order over hypotheses. Residual ties (equal priority and
/// length) are broken lexicographically on tokens, which makes every decoder
/// a deterministic function of its inputs.
struct Comparator {
  ComparatorKind kind = ComparatorKind::ScoreFirst;

  /// True iff `a` must be popped before `b`.
  bool precedes(const Hypothesis& a, const Hypothesis& b) const {
    if (kind == ComparatorKind::LengthFirst) {
      if (a.length() != b.length()) return a.length() < b.length();
      if (a.priority != b.priority) return a.priority > b.priority;
    } else {
      if (a.priority != b.priority) return a.priority > b.priority;
      if (a.length() != b.length()) return a.length() < b.length();
    }
    return lex_less(a.tokens, b.tokens);
  }
};

/// Within-beam order (all members share a length): lower priority is worse,
/// ties resolved by longer-then-lexicographically-greater so the heap's
/// total order is strict.
struct HypothesisWorse {
  bool operator()(const Hypothesis& a, const Hypothesis& b) const {
    if (a.priority != b.priority) return a.priority < b.priority;
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() > b.tokens.size();
    return lex_less(b.tokens, a.tokens);
  }
};

using BeamHeap = BoundedMinMaxHeap<Hypothesis, HypothesisWorse>;

/// The global store of active hypotheses: one bounded min-max heap (beam) per
/// hypothesis length, a priority queue over the non-empty beams keyed by each
/// beam's best member, a direct length-indexed locator, per-length pop
/// counters, and an optional total-capacity limit for memory-reduced search.
class BeamAgenda {
 public:
  /// `beam_capacity` is the beam width k (kUnboundedCapacity for no width
  /// limit); lengths range over [0, n_max]; `capacity_limit` caps the total
  /// number of live hypotheses (memory-reduced mode).
  BeamAgenda(Comparator comparator, std::size_t beam_capacity, int n_max, TokenId eos,
             std::optional<std::size_t> capacity_limit = std::nullopt);

  bool empty() const noexcept { return total_size_ == 0; }
  std::size_t total_size() const noexcept { return total_size_; }
  std::size_t peak_size() const noexcept { return peak_size_; }
  /// Zero iff every live hypothesis is complete.
  std::size_t incomplete_count() const noexcept { return incomplete_count_; }

  /// Inserts into the beam at length(h). Runs the capacity eviction first
  /// when the insertion would grow the agenda past the limit. Returns the
  /// hypothesis displaced by beam overflow or capacity eviction, if any;
  /// `outcome` reports what happened to the offered item itself.
  std::optional<Hypothesis> push(Hypothesis h, PushOutcome* outcome = nullptr);

  /// Removes and returns the hypothesis that precedes all others under the
  /// comparator. Empty beams leave the order structure; their pop counters
  /// survive.
  Hypothesis pop();

  /// The would-be result of pop(), without removal.
  const Hypothesis& peek() const;

  /// The pops gate of the meta-decoder: false (and no count) when the
  /// counter for `length` is saturated at k or `length` exceeds n_max;
  /// otherwise counts the pop and returns true.
  bool record_pop(int length);

  int pops(int length) const;
  /// True after record_pop has accepted k hypotheses of this length.
  bool pops_saturated(int length) const;

  /// Drops every beam with index < `length` wholesale. Requires the counter
  /// at `length` to be saturated (the pruning precondition); counters are
  /// retained. Returns the number of dropped hypotheses.
  std::size_t prune_stale(int length);

  /// Removes and returns the worst member of the earliest non-empty beam.
  /// Returns nullopt (eviction skipped) when fewer than two hypotheses are
  /// live: the agenda never evicts its last hypothesis.
  std::optional<Hypothesis> evict_overflow();

  /// Non-empty beam lengths in increasing order, and read access to a beam;
  /// used by stopping rules that scan live hypotheses.
  std::vector<int> active_lengths() const;
  std::span<const Hypothesis> beam_items(int length) const;

  const Comparator& comparator() const noexcept { return comparator_; }

 private:
  bool beam_precedes(int a, int b) const;
  void order_insert(int length);
  void order_erase(int length);
  void order_update(int length);
  void sift_up(std::size_t pos);
  void sift_down(std::size_t pos);
  int earliest_active() const;
  Hypothesis evict_for_insert();
  void note_removed(const Hypothesis& h);

  Comparator comparator_;
  std::size_t beam_capacity_;
  int n_max_;
  TokenId eos_;
  std::optional<std::size_t> capacity_limit_;

  std::vector<std::optional<BeamHeap>> beams_;  // locator: length -> beam, O(1)
  std::vector<int> order_;                      // heap of beam lengths
  std::vector<int> order_pos_;                  // length -> index in order_, -1 if absent
  std::vector<int> pops_;
  std::size_t total_size_ = 0;
  std::size_t peak_size_ = 0;
  std::size_t incomplete_count_ = 0;
  mutable int earliest_hint_ = 0;
};

}  // namespace beamdec
