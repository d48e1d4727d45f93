#pragma once

#include <cstdint>
#include <vector>

#include "beamdec/core.hpp"
#include "beamdec/scoring.hpp"

namespace beamdec {

/// Cap on the number of enumerated sequences; enumeration aborts with
/// BudgetExceeded instead of running unbounded.
struct EnumerationBudget {
  std::int64_t max_states = 200000;
};

/// Number of valid outputs: sum over lengths 0..n_max-1 of R^len bodies.
/// Throws BudgetExceeded when it would exceed the budget.
std::int64_t count_space(const Vocabulary& vocab, int n_max, EnumerationBudget budget);

/// Every sequence BOS ∘ body ∘ EOS with a regular-token body and total
/// length (after BOS) at most n_max, each exactly once, in depth-first
/// shortest-prefix order.
std::vector<TokenSeq> enumerate_space(const Vocabulary& vocab, int n_max,
                                      EnumerationBudget budget = {});

/// Scores the whole output space with the adapter's full-sequence score,
/// recomputed from scratch per sequence, and returns the maximum under
/// (score, shorter, lexicographic). Enumeration-order invariant.
Hypothesis exhaustive_best(const DecoderInput& input, const ScoreAdapter& adapter,
                           EnumerationBudget budget = {});

}  // namespace beamdec
