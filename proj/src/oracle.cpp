#include "beamdec/oracle.hpp"

namespace beamdec {

std::int64_t count_space(const Vocabulary& vocab, int n_max, EnumerationBudget budget) {
  if (n_max <= 0) return 0;
  const std::int64_t r = vocab.regular_count();
  std::int64_t total = 0;
  std::int64_t term = 1;  // r^len, starting at len = 0
  for (int len = 0;;) {
    total += term;
    if (total > budget.max_states)
      throw BudgetExceeded("enumeration budget exceeded at body length " + std::to_string(len));
    ++len;
    if (len >= n_max || r == 0) break;
    if (r > 1 && term > budget.max_states / r)
      throw BudgetExceeded("enumeration budget exceeded at body length " + std::to_string(len));
    term *= r;
  }
  return total;
}

std::vector<TokenSeq> enumerate_space(const Vocabulary& vocab, int n_max,
                                      EnumerationBudget budget) {
  std::vector<TokenSeq> out;
  if (n_max <= 0) return out;
  out.reserve(static_cast<std::size_t>(count_space(vocab, n_max, budget)));

  std::vector<TokenId> regulars;
  for (TokenId t = 0; t < vocab.size(); ++t)
    if (vocab.is_regular(t)) regulars.push_back(t);

  TokenSeq body;
  const int max_body = n_max - 1;  // EOS takes one slot of the length cap
  auto emit = [&] {
    TokenSeq seq;
    seq.reserve(body.size() + 2);
    seq.push_back(vocab.bos());
    seq.insert(seq.end(), body.begin(), body.end());
    seq.push_back(vocab.eos());
    out.push_back(std::move(seq));
  };
  // Depth-first: emit the completion of every prefix before descending.
  auto dfs = [&](auto&& self) -> void {
    emit();
    if (static_cast<int>(body.size()) >= max_body) return;
    for (TokenId t : regulars) {
      body.push_back(t);
      self(self);
      body.pop_back();
    }
  };
  dfs(dfs);
  return out;
}

Hypothesis exhaustive_best(const DecoderInput& input, const ScoreAdapter& adapter,
                           EnumerationBudget budget) {
  const auto space = enumerate_space(adapter.vocab(), input.n_max, budget);
  if (space.empty()) throw std::logic_error("exhaustive_best: empty output space");
  bool have = false;
  Hypothesis best;
  for (const auto& seq : space) {
    Hypothesis h;
    h.tokens = seq;
    h.score = adapter.sequence_score(input, seq);
    h.priority = h.score;
    if (!have || better_result(h, best)) {
      best = std::move(h);
      have = true;
    }
  }
  return best;
}

}  // namespace beamdec
