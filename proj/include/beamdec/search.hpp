#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beamdec/agenda.hpp"
#include "beamdec/core.hpp"
#include "beamdec/scoring.hpp"

namespace beamdec {

/// Choice point 2: when the agenda loop terminates.
enum class StopRule {
  AllComplete,   // every live hypothesis is complete (breadth-first flavor)
  PeekComplete,  // the first accepted complete hypothesis wins
  Generalized,   // best complete beats every live score plus its upper bound
  EsEarly,       // breadth-first early stopping baseline
  Shrinking,     // shrinking-beam baseline
};

/// One value per named search algorithm.
enum class StrategyName { Beam, BfBeam, AstarBeam, Bfs, BestFirst, Astar, Greedy };

/// The four choice points of the meta-decoder plus the memory limit and the
/// k-best collection switch.
struct SearchStrategy {
  static constexpr int kUnboundedWidth = std::numeric_limits<int>::max();

  ComparatorKind comparator = ComparatorKind::ScoreFirst;
  StopRule stop_rule = StopRule::PeekComplete;
  int beam_width = 1;
  bool use_heuristic = false;
  std::optional<int> memory_gamma;
  bool topk_mode = false;

  bool unbounded() const noexcept { return beam_width == kUnboundedWidth; }
};

/// The named presets. bfs/best_first/astar require unbounded width; greedy
/// requires width 1. Invalid combinations are a ConfigError.
SearchStrategy make_strategy(StrategyName name, int k);

std::optional<StrategyName> strategy_from_string(const std::string& s);
std::string to_string(StrategyName name);
std::optional<StopRule> stop_rule_from_string(const std::string& s);
std::string to_string(StopRule rule);

/// Throws ConfigError on contradictory settings.
void validate_strategy(const SearchStrategy& s);

/// Instrumentation counters. score_calls counts expansions of accepted
/// incomplete hypotheses (one call produces the whole next-token vector);
/// EOS re-pushes never touch the model. pops counts gate-accepted pops.
struct DecodeStats {
  std::int64_t score_calls = 0;
  std::int64_t pops = 0;
  std::int64_t pushes = 0;
  std::int64_t peak_active = 0;
  bool terminated_early = false;
  bool no_guarantee = false;
};

struct SearchResult {
  std::optional<Hypothesis> best;
  std::vector<Hypothesis> top_k;  // complete, sorted by score desc, ties lexicographic
  DecodeStats stats;
};

/// Gate-accepted pops in order, raw token sequences (re-extended completes
/// appear with their grown EOS tails). Used by the lemma-style tests.
struct PopTrace {
  std::vector<Hypothesis> accepted;
};

/// The agenda-based meta-decoder. Routes EsEarly/Shrinking strategies to
/// their breadth-first implementations.
SearchResult decode(const DecoderInput& input, const ScoreAdapter& adapter,
                    const SearchStrategy& strategy, PopTrace* trace = nullptr);

/// Breadth-first beam search with per-step top-k pruning; the differential
/// oracle for the equivalence suites. Completes re-extend by EOS and compete
/// for beam slots; every complete that enters a beam is retained in a
/// finished set, whose maximum is returned.
SearchResult beam_search_reference(const DecoderInput& input, const ScoreAdapter& adapter,
                                   int k, PopTrace* trace = nullptr);

/// Breadth-first search that stops once the best finished hypothesis scores
/// at least as high as the best active beam member. Requires a monotonic
/// adapter (same best as the reference, never more score calls).
SearchResult decode_es(const DecoderInput& input, const ScoreAdapter& adapter, int k);

/// Shrinking-beam baseline: a hypothesis finishing inside the per-step top
/// set is set aside and the active width shrinks by one; stops at width zero
/// or when the best finished beats every active. May commit search errors.
SearchResult decode_shrinking(const DecoderInput& input, const ScoreAdapter& adapter, int k);

/// decode() with the agenda capacity limited to k * gamma; eviction removes
/// the worst hypothesis of the earliest active length. Requires a score-first
/// strategy (bf_beam or astar_beam) and gamma >= 1.
SearchResult decode_memory_reduced(const DecoderInput& input, const ScoreAdapter& adapter,
                                   const SearchStrategy& strategy);

}  // namespace beamdec
