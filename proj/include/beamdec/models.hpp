#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "beamdec/core.hpp"

namespace beamdec {

/// A conditional next-token distribution p(y_t | y_<t, x). Step vectors are
/// log-domain, indexed by token id over [0, vocab().candidate_count()), and
/// log-sum-exp to zero. Implementations are immutable after construction and
/// safe to share across concurrent decodes.
class Model {
 public:
  virtual ~Model() = default;
  virtual const Vocabulary& vocab() const = 0;
  /// `prefix` must begin with BOS and contain no EOS (complete hypotheses
  /// are never expanded through the model).
  virtual Eigen::VectorXd step_logprob(const DecoderInput& input, const TokenSeq& prefix) const = 0;
};

/// Explicit conditional distributions keyed on (optional input key, last-m
/// context). Contexts shorter than the order are BOS-padded on the left.
class TableModel : public Model {
 public:
  using Row = Eigen::VectorXd;  // probabilities over candidate tokens, sum 1
  using ContextTable = std::map<TokenSeq, Row>;

  /// `tables` maps an input key ("" for input-agnostic models) to its
  /// context table. Rows are validated: strictly positive, sum within 1e-9
  /// of one after the loader's normalization.
  TableModel(Vocabulary vocab, int order, std::map<std::string, ContextTable> tables,
             bool input_keyed, bool backoff_to_uniform = false);

  const Vocabulary& vocab() const override { return vocab_; }
  int order() const noexcept { return order_; }
  bool input_keyed() const noexcept { return input_keyed_; }

  Eigen::VectorXd step_logprob(const DecoderInput& input, const TokenSeq& prefix) const override;

  /// The last `order` tokens of the prefix, BOS-padded on the left.
  TokenSeq context_of(const TokenSeq& prefix) const;

  /// Identifier under which an input's distributions are stored.
  static std::string input_key(const DecoderInput& input);

 private:
  Vocabulary vocab_;
  int order_;
  std::map<std::string, ContextTable> tables_;
  std::map<std::string, ContextTable> log_tables_;
  bool input_keyed_;
  bool backoff_to_uniform_;
  Eigen::VectorXd uniform_log_;
};

/// Parses the line-oriented model format:
///   vocab: t1 t2 ... <eos>
///   order: m
///   ctx <c1 ... cm> | p1 p2 ... p|V|
/// '#' starts a comment. BOS is implicit and appended to the vocabulary.
/// Rows drifting from sum 1 by more than 1e-6 are a load error; smaller
/// drift is renormalized (a warning is recorded when it exceeds 1e-9).
TableModel load_table_model(const std::string& text, std::vector<std::string>* warnings = nullptr);

/// Deterministic model for property tests: every BOS-padded context over the
/// regular tokens gets a strictly positive row drawn from a symmetric random
/// simplex. `vocab_size` counts the candidate tokens (regular + EOS).
TableModel random_model(std::uint64_t seed, int vocab_size, int order);

/// N-gram language model with additive smoothing:
/// p(t | ctx) = (count + alpha) / (total + alpha * |candidates|).
class NgramLm : public Model {
 public:
  NgramLm(Vocabulary vocab, int order, double alpha);

  const Vocabulary& vocab() const override { return vocab_; }
  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }

  Eigen::VectorXd step_logprob(const DecoderInput& input, const TokenSeq& prefix) const override;

  /// Smoothed log-conditionals for the last (order-1) tokens of the prefix.
  Eigen::VectorXd step(const TokenSeq& prefix) const;

  std::int64_t context_count(const TokenSeq& ctx, TokenId t) const;
  std::int64_t context_total(const TokenSeq& ctx) const;

 private:
  friend NgramLm train_ngram(const std::vector<std::vector<std::string>>& corpus, int order,
                             double alpha, const Vocabulary* vocab);
  void add_sequence(const TokenSeq& tokens_without_markers);
  void finalize();
  TokenSeq context_of(const TokenSeq& prefix) const;

  Vocabulary vocab_;
  int order_;
  double alpha_;
  std::map<TokenSeq, std::vector<std::int64_t>> counts_;
  std::map<TokenSeq, Eigen::VectorXd> log_rows_;
  Eigen::VectorXd unseen_log_;
};

/// Counts all order-length windows with BOS padding and EOS termination.
/// When `vocab` is null it is derived from the corpus: distinct surfaces in
/// sorted order, then <eos>, then <bos>.
NgramLm train_ngram(const std::vector<std::vector<std::string>>& corpus, int order, double alpha,
                    const Vocabulary* vocab = nullptr);

/// One sequence per line, whitespace-separated surface tokens; blank lines
/// are skipped.
std::vector<std::vector<std::string>> parse_corpus(const std::string& text);

/// Maps surfaces through the vocabulary; unknown surfaces are a ConfigError.
TokenSeq tokenize(const std::vector<std::string>& surfaces, const Vocabulary& vocab);

/// log(sum(exp(v))) evaluated stably; step vectors satisfy |lse| <= 1e-6.
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace beamdec
