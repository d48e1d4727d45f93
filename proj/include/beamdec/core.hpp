#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamdec {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Error in user-supplied configuration (CLI flags, strategy combinations,
/// malformed model files). Maps to exit code 2 in the CLI.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Enumeration would exceed the allowed state budget. Maps to exit code 3.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A table model was asked for a context it has no entry for.
struct ModelCoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fixed token inventory. Token order is significant: it defines the
/// lexicographic tie order used everywhere. BOS is always the last index,
/// so per-step score vectors (which never propose BOS) have one entry per
/// token id in [0, candidate_count()).
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id);

  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  /// Number of tokens a model may propose per step (all but BOS).
  int candidate_count() const noexcept { return size() - 1; }
  /// Tokens that may appear between BOS and EOS.
  int regular_count() const noexcept { return size() - 2; }

  TokenId bos() const noexcept { return bos_; }
  TokenId eos() const noexcept { return eos_; }
  bool is_regular(TokenId t) const noexcept { return t != bos_ && t != eos_; }

  const std::string& surface(TokenId t) const { return tokens_.at(static_cast<std::size_t>(t)); }
  std::optional<TokenId> id(const std::string& surface) const;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  TokenId bos_;
  TokenId eos_;
};

/// Source sequence plus the hard output-length cap that guarantees
/// termination.
struct DecoderInput {
  TokenSeq x;
  int n_max;

  DecoderInput(TokenSeq x_, int n_max_) : x(std::move(x_)), n_max(n_max_) {
    if (x.empty()) throw ConfigError("DecoderInput: x must be non-empty");
    if (n_max < 1) throw ConfigError("DecoderInput: n_max must be >= 1");
  }
};

/// Default output-length cap when a run does not override it.
inline int default_n_max(int input_len) { return std::max(2 * input_len, 10); }

/// A (partial) output: token sequence starting with BOS, its accumulated
/// score, and its queue priority (score plus heuristic). Treated as an
/// immutable value; extension builds a new one.
struct Hypothesis {
  TokenSeq tokens;
  double score = 0.0;
  double priority = 0.0;

  /// Tokens after BOS; EOS counts, BOS does not.
  int length() const noexcept { return static_cast<int>(tokens.size()) - 1; }
};

inline bool is_complete(const Hypothesis& h, TokenId eos) {
  return !h.tokens.empty() && h.tokens.back() == eos;
}

/// Appends one token. Scores accumulate strictly left-to-right so that all
/// decoders produce bit-identical sums for identical token sequences.
/// Re-extending a complete hypothesis is only legal with EOS and contributes
/// score 0 and heuristic 0.
Hypothesis extend(const Hypothesis& h, TokenId t, double step_score, double heuristic_value,
                  TokenId eos);

/// True iff tokens are BOS, then regular tokens only, then exactly one EOS,
/// with length() <= n_max.
bool validate_output(const Hypothesis& h, const Vocabulary& vocab, int n_max);

bool lex_less(const TokenSeq& a, const TokenSeq& b);

/// Strips the trailing EOS run down to a single EOS. Identity for sequences
/// that are not re-extended completes.
TokenSeq canonical_tokens(const TokenSeq& tokens, TokenId eos);

/// The result preference order shared by the oracle and all decoders:
/// higher score, then shorter, then lexicographically smaller.
bool better_result(const Hypothesis& a, const Hypothesis& b);

}  // namespace beamdec
