#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "beamdec/core.hpp"
#include "beamdec/models.hpp"
#include "beamdec/scoring.hpp"
#include "beamdec/search.hpp"

namespace beamdec {

/// One --strategy entry: preset name, width, optional stop override and
/// memory factor.
struct StrategySpec {
  StrategyName name = StrategyName::Beam;
  int k = 1;
  std::optional<StopRule> stop;
  std::optional<int> gamma;

  /// Column label; carries the stop override so distinct rows stay distinct.
  std::string label() const;
};

/// Parses "name:k[:stop][:gamma]"; "inf" denotes unbounded width.
StrategySpec parse_strategy_spec(const std::string& text);

struct AdapterSpec {
  enum class Kind { LogProb, Ln, Pmi } kind = Kind::LogProb;
  LengthNormParams ln;
  PmiParams pmi;
  int lm_order = 2;
  double lm_alpha = 0.1;
};

/// Parses "logprob" | "ln:beta,mode[,r]" | "pmi:lambda,eps".
AdapterSpec parse_adapter_spec(const std::string& text);

struct NmaxRule {
  enum class Kind { Default, Fixed, Ratio } kind = Kind::Default;
  int fixed = 0;
  double ratio = 0.0;

  int resolve(int input_len) const;
};

/// Parses "N" or "ratio:R".
NmaxRule parse_nmax_rule(const std::string& text);

struct RandomSpec {
  std::uint64_t seed = 0;
  int count = 1;
  int vocab_size = 3;
  int order = 1;
};

/// Parses "seed,count,vocab,order".
RandomSpec parse_random_spec(const std::string& text);

enum class ReportFormat { Tsv, Json };

struct BenchConfig {
  std::optional<std::string> model_path;
  std::optional<std::string> model_text;  // overrides model_path when set
  std::optional<std::string> corpus_path;
  std::optional<std::string> corpus_text;  // overrides corpus_path when set
  std::optional<RandomSpec> random;
  AdapterSpec adapter;
  std::vector<StrategySpec> strategies;
  NmaxRule n_max;
  ReportFormat format = ReportFormat::Tsv;
  bool with_oracle = false;
  std::int64_t oracle_budget = 200000;
};

struct InstanceRow {
  std::string strategy;
  std::string k;
  std::string gamma;
  int instance = 0;
  std::string output;  // surface tokens, "-" when no hypothesis was found
  double score = 0.0;
  std::int64_t score_calls = 0;
  std::int64_t pops = 0;
  std::int64_t peak_active = 0;
  bool terminated_early = false;
};

struct AggregateRow {
  std::string strategy;
  std::string k;
  std::string gamma;
  double mean_calls = 0.0;
  double call_ratio = 0.0;  // vs reference beam search at the same k
  double search_err = 0.0;  // best-sequence mismatch rate vs the reference
  double exact_match = 0.0;
  double mean_pops = 0.0;
};

struct BenchReport {
  std::vector<AggregateRow> aggregates;
  std::vector<InstanceRow> instances;
  /// Filled when the oracle comparison is enabled: strategy label ->
  /// fraction of instances matching the exhaustive optimum.
  std::vector<std::pair<std::string, double>> oracle_match;
};

/// Decodes every instance under every strategy and aggregates. Deterministic
/// in the config; all randomness is seeded.
BenchReport run_bench(const BenchConfig& config);

/// TSV: fixed header
/// strategy k gamma mean_calls call_ratio search_err exact_match mean_pops,
/// ratios with 4 decimal places. JSON: the same aggregate fields plus the
/// per-instance array, deterministic field order.
std::string emit_report(const BenchReport& report, ReportFormat format);

}  // namespace beamdec
