#include "beamdec/core.hpp"

#include <algorithm>
#include <unordered_set>

namespace beamdec {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id)
    : tokens_(std::move(tokens)), bos_(bos_id), eos_(eos_id) {
  const auto n = static_cast<TokenId>(tokens_.size());
  if (n < 3) throw ConfigError("Vocabulary: need at least one regular token plus EOS and BOS");
  if (bos_ < 0 || bos_ >= n || eos_ < 0 || eos_ >= n)
    throw ConfigError("Vocabulary: bos/eos id out of range");
  if (bos_ == eos_) throw ConfigError("Vocabulary: bos and eos must differ");
  if (bos_ != n - 1) throw ConfigError("Vocabulary: bos must be the last token index");
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens_) {
    if (t.empty()) throw ConfigError("Vocabulary: empty surface string");
    if (!seen.insert(t).second) throw ConfigError("Vocabulary: duplicate surface string: " + t);
  }
}

std::optional<TokenId> Vocabulary::id(const std::string& surface) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i] == surface) return static_cast<TokenId>(i);
  return std::nullopt;
}

Hypothesis extend(const Hypothesis& h, TokenId t, double step_score, double heuristic_value,
                  TokenId eos) {
  Hypothesis out;
  out.tokens.reserve(h.tokens.size() + 1);
  out.tokens = h.tokens;
  out.tokens.push_back(t);
  if (is_complete(h, eos)) {
    if (t != eos)
      throw std::logic_error("extend: complete hypothesis may only be re-extended by EOS");
    out.score = h.score;
    out.priority = h.score;
  } else {
    out.score = h.score + step_score;
    out.priority = out.score + heuristic_value;
  }
  return out;
}

bool validate_output(const Hypothesis& h, const Vocabulary& vocab, int n_max) {
  const auto& t = h.tokens;
  if (t.size() < 2) return false;
  if (t.front() != vocab.bos() || t.back() != vocab.eos()) return false;
  if (h.length() > n_max) return false;
  for (std::size_t i = 1; i + 1 < t.size(); ++i)
    if (!vocab.is_regular(t[i])) return false;
  return true;
}

bool lex_less(const TokenSeq& a, const TokenSeq& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

TokenSeq canonical_tokens(const TokenSeq& tokens, TokenId eos) {
  TokenSeq out = tokens;
  while (out.size() >= 2 && out.back() == eos && out[out.size() - 2] == eos) out.pop_back();
  return out;
}

bool better_result(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return lex_less(a.tokens, b.tokens);
}

}  // namespace beamdec
