#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "beamdec/core.hpp"
#include "beamdec/models.hpp"

namespace beamdec {

/// The additively decomposable scoring contract: a per-step contribution
/// vector over candidate tokens, an optional admissible heuristic, an upper
/// bound on future score gain, and a monotonicity declaration. Heuristic and
/// bound depend only on completion status and length here, which the agenda
/// stop rules exploit. Immutable and shareable; step evaluation is pure.
class ScoreAdapter {
 public:
  virtual ~ScoreAdapter() = default;

  virtual const Vocabulary& vocab() const = 0;

  /// Contribution of each candidate extension of `prefix`.
  virtual Eigen::VectorXd step(const DecoderInput& input, const TokenSeq& prefix) const = 0;

  /// Choice point 4: estimated future reward of an (in)complete hypothesis.
  virtual double heuristic(const DecoderInput&, int /*length*/, bool /*complete*/) const {
    return 0.0;
  }

  /// Largest possible score increase of any hypothesis at this length;
  /// zero for monotonic adapters.
  virtual double upper_bound(const DecoderInput&, int /*length*/) const { return 0.0; }

  /// Declares that step contributions are never positive.
  virtual bool monotonic() const = 0;

  /// Closed-form full-sequence score. The default recomputes the step sum
  /// left-to-right from scratch; re-extension steps past the first EOS
  /// contribute zero.
  virtual double sequence_score(const DecoderInput& input, const TokenSeq& tokens) const;
};

/// Log-probability scoring: step contributions are log p(y_t | y_<t, x).
class LogProbAdapter : public ScoreAdapter {
 public:
  explicit LogProbAdapter(const Model& model) : model_(&model) {}
  const Vocabulary& vocab() const override { return model_->vocab(); }
  Eigen::VectorXd step(const DecoderInput& input, const TokenSeq& prefix) const override {
    return model_->step_logprob(input, prefix);
  }
  bool monotonic() const override { return true; }

 private:
  const Model* model_;
};

struct LengthNormParams {
  double beta = 0.0;  // reward scale, >= 0
  enum class BoundMode { Ratio, NMax } bound_mode = BoundMode::NMax;
  double r = 0.7;  // length ratio, > 0, used in Ratio mode
};

/// Additive length reward: full-sequence score(x,y) + beta * min{b, N_y}
/// with b = r|x| (Ratio) or n_max (NMax). The reward is distributed per
/// step as beta * (min(b, L) - min(b, L-1)) so it telescopes exactly, also
/// for fractional ratio bounds.
class LengthNormAdapter : public ScoreAdapter {
 public:
  LengthNormAdapter(const Model& model, LengthNormParams params);

  const Vocabulary& vocab() const override { return model_->vocab(); }
  Eigen::VectorXd step(const DecoderInput& input, const TokenSeq& prefix) const override;
  double heuristic(const DecoderInput& input, int length, bool complete) const override;
  double upper_bound(const DecoderInput& input, int length) const override;
  bool monotonic() const override { return params_.beta == 0.0; }
  double sequence_score(const DecoderInput& input, const TokenSeq& tokens) const override;

  double bound(const DecoderInput& input) const;
  const LengthNormParams& params() const noexcept { return params_; }

 private:
  const Model* model_;
  LengthNormParams params_;
};

struct PmiParams {
  double lambda = 0.0;    // strength, >= 0
  double epsilon = 1e-4;  // language-model floor, in (0, 1]
};

/// Pointwise-mutual-information scoring with a floored anti-language-model:
/// each step contributes log p(y_t | ctx, x) - lambda * max{lm, log eps},
/// clamped per token in the log domain.
class PmiAdapter : public ScoreAdapter {
 public:
  PmiAdapter(const Model& cond, const Model& lm, PmiParams params);

  const Vocabulary& vocab() const override { return cond_->vocab(); }
  Eigen::VectorXd step(const DecoderInput& input, const TokenSeq& prefix) const override;
  double heuristic(const DecoderInput& input, int length, bool complete) const override;
  double upper_bound(const DecoderInput& input, int length) const override;
  bool monotonic() const override { return params_.lambda == 0.0 || params_.epsilon >= 1.0; }
  double sequence_score(const DecoderInput& input, const TokenSeq& tokens) const override;

  const PmiParams& params() const noexcept { return params_; }

 private:
  const Model* cond_;
  const Model* lm_;
  PmiParams params_;
};

// ---------------------------------------------------------------------------
// Free-function forms of the scoring operations (the adapters above are thin
// wrappers over these).

inline Eigen::VectorXd step_logprob(const Model& model, const DecoderInput& input,
                                    const TokenSeq& prefix) {
  return model.step_logprob(input, prefix);
}

/// The reward saturation point b; Ratio mode requires r|x| < n_max.
double ln_bound(const LengthNormParams& params, const DecoderInput& input);

/// Adds the telescoped reward share for extending length `current_length`.
Eigen::VectorXd ln_step(const Eigen::VectorXd& base_step, double beta, double b,
                        int current_length);

double ln_heuristic(double beta, double b, int length, bool complete);
double ln_upper_bound(double beta, double b, int length);

Eigen::VectorXd pmi_step(const Eigen::VectorXd& cond_step, const Eigen::VectorXd& lm_step,
                         const PmiParams& params);
double pmi_heuristic(const PmiParams& params, int n_max, int length, bool complete);
double pmi_upper_bound(const PmiParams& params, int n_max, int length);

/// The generalized stopping test: true iff a complete hypothesis exists and
/// no live hypothesis can out-score it even with its full upper bound.
/// `agenda_best` is the score-dominating live candidate (absent for an empty
/// agenda).
bool stop_generalized(const std::optional<Hypothesis>& best_complete,
                      const std::optional<Hypothesis>& agenda_best, const ScoreAdapter& adapter,
                      const DecoderInput& input);

/// Samples random prefixes and checks step contributions are non-positive;
/// returns false on any witnessed violation. Validates monotonic()
/// declarations in tests.
bool check_monotonic(const ScoreAdapter& adapter, const DecoderInput& input, int trials,
                     std::uint64_t seed);

}  // namespace beamdec
