#include "beamdec/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace beamdec {

double ScoreAdapter::sequence_score(const DecoderInput& input, const TokenSeq& tokens) const {
  const TokenId eos = vocab().eos();
  if (tokens.empty() || tokens.front() != vocab().bos())
    throw std::logic_error("sequence_score: sequence must begin with BOS");
  double sum = 0.0;
  TokenSeq prefix;
  prefix.reserve(tokens.size());
  prefix.push_back(tokens.front());
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (prefix.back() == eos) {
      if (tokens[i] != eos)
        throw std::logic_error("sequence_score: complete prefix re-extended by non-EOS");
      // re-extension contributes zero
    } else {
      sum += step(input, prefix)[tokens[i]];
    }
    prefix.push_back(tokens[i]);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Length normalization

double ln_bound(const LengthNormParams& params, const DecoderInput& input) {
  if (params.bound_mode == LengthNormParams::BoundMode::Ratio) {
    if (params.r <= 0.0) throw ConfigError("length-norm: r must be > 0");
    const double b = params.r * static_cast<double>(input.x.size());
    if (b >= static_cast<double>(input.n_max))
      throw ConfigError("length-norm: r|x| must be < n_max");
    return b;
  }
  return static_cast<double>(input.n_max);
}

namespace {
double reward_share(double beta, double b, int new_length) {
  const double l = static_cast<double>(new_length);
  return beta * (std::min(b, l) - std::min(b, l - 1.0));
}
}  // namespace

Eigen::VectorXd ln_step(const Eigen::VectorXd& base_step, double beta, double b,
                        int current_length) {
  return base_step.array() + reward_share(beta, b, current_length + 1);
}

double ln_heuristic(double beta, double b, int length, bool complete) {
  if (complete) return 0.0;
  return beta * std::max(b - static_cast<double>(length), 0.0);
}

double ln_upper_bound(double beta, double b, int length) {
  return beta * std::max(0.0, b - static_cast<double>(length));
}

LengthNormAdapter::LengthNormAdapter(const Model& model, LengthNormParams params)
    : model_(&model), params_(params) {
  if (params_.beta < 0.0) throw ConfigError("length-norm: beta must be >= 0");
}

double LengthNormAdapter::bound(const DecoderInput& input) const {
  return ln_bound(params_, input);
}

Eigen::VectorXd LengthNormAdapter::step(const DecoderInput& input, const TokenSeq& prefix) const {
  const int current_length = static_cast<int>(prefix.size()) - 1;
  return ln_step(model_->step_logprob(input, prefix), params_.beta, bound(input), current_length);
}

double LengthNormAdapter::heuristic(const DecoderInput& input, int length, bool complete) const {
  return ln_heuristic(params_.beta, bound(input), length, complete);
}

double LengthNormAdapter::upper_bound(const DecoderInput& input, int length) const {
  return ln_upper_bound(params_.beta, bound(input), length);
}

double LengthNormAdapter::sequence_score(const DecoderInput& input, const TokenSeq& tokens) const {
  const TokenSeq canon = canonical_tokens(tokens, vocab().eos());
  const double n_y = static_cast<double>(canon.size()) - 1.0;
  double base = 0.0;
  TokenSeq prefix;
  prefix.push_back(canon.front());
  for (std::size_t i = 1; i < canon.size(); ++i) {
    base += model_->step_logprob(input, prefix)[canon[i]];
    prefix.push_back(canon[i]);
  }
  return base + params_.beta * std::min(bound(input), n_y);
}

// ---------------------------------------------------------------------------
// Mutual information

Eigen::VectorXd pmi_step(const Eigen::VectorXd& cond_step, const Eigen::VectorXd& lm_step,
                         const PmiParams& params) {
  if (cond_step.size() != lm_step.size())
    throw std::logic_error("pmi_step: misaligned step vectors");
  if (params.lambda == 0.0) return cond_step;
  const double log_eps = std::log(params.epsilon);
  return cond_step.array() - params.lambda * lm_step.array().max(log_eps);
}

double pmi_heuristic(const PmiParams& params, int n_max, int length, bool complete) {
  if (complete) return 0.0;
  return -params.lambda * std::log(params.epsilon) * static_cast<double>(n_max - length);
}

double pmi_upper_bound(const PmiParams& params, int n_max, int length) {
  return -params.lambda * std::log(params.epsilon) * static_cast<double>(n_max - length);
}

PmiAdapter::PmiAdapter(const Model& cond, const Model& lm, PmiParams params)
    : cond_(&cond), lm_(&lm), params_(params) {
  if (params_.lambda < 0.0) throw ConfigError("pmi: lambda must be >= 0");
  if (!(params_.epsilon > 0.0) || params_.epsilon > 1.0)
    throw ConfigError("pmi: epsilon must be in (0, 1]");
  if (cond_->vocab().tokens() != lm_->vocab().tokens())
    throw ConfigError("pmi: conditional model and language model vocabularies differ");
}

Eigen::VectorXd PmiAdapter::step(const DecoderInput& input, const TokenSeq& prefix) const {
  const Eigen::VectorXd cond = cond_->step_logprob(input, prefix);
  if (params_.lambda == 0.0) return cond;
  return pmi_step(cond, lm_->step_logprob(input, prefix), params_);
}

double PmiAdapter::heuristic(const DecoderInput& input, int length, bool complete) const {
  return pmi_heuristic(params_, input.n_max, length, complete);
}

double PmiAdapter::upper_bound(const DecoderInput& input, int length) const {
  return pmi_upper_bound(params_, input.n_max, length);
}

double PmiAdapter::sequence_score(const DecoderInput& input, const TokenSeq& tokens) const {
  const TokenSeq canon = canonical_tokens(tokens, vocab().eos());
  double cond_sum = 0.0, lm_sum = 0.0;
  const double log_eps = std::log(params_.epsilon);
  TokenSeq prefix;
  prefix.push_back(canon.front());
  for (std::size_t i = 1; i < canon.size(); ++i) {
    cond_sum += cond_->step_logprob(input, prefix)[canon[i]];
    lm_sum += std::max(lm_->step_logprob(input, prefix)[canon[i]], log_eps);
    prefix.push_back(canon[i]);
  }
  return cond_sum - params_.lambda * lm_sum;
}

// ---------------------------------------------------------------------------
// Stopping and validation

bool stop_generalized(const std::optional<Hypothesis>& best_complete,
                      const std::optional<Hypothesis>& agenda_best, const ScoreAdapter& adapter,
                      const DecoderInput& input) {
  if (!best_complete) return false;
  if (!agenda_best) return true;
  return best_complete->score >=
         agenda_best->score + adapter.upper_bound(input, agenda_best->length());
}

bool check_monotonic(const ScoreAdapter& adapter, const DecoderInput& input, int trials,
                     std::uint64_t seed) {
  const Vocabulary& vocab = adapter.vocab();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len_dist(0, std::max(input.n_max - 1, 0));
  std::vector<TokenId> regulars;
  for (TokenId t = 0; t < vocab.size(); ++t)
    if (vocab.is_regular(t)) regulars.push_back(t);
  std::uniform_int_distribution<std::size_t> tok_dist(0, regulars.size() - 1);
  for (int i = 0; i < trials; ++i) {
    TokenSeq prefix{vocab.bos()};
    const int len = len_dist(rng);
    for (int j = 0; j < len; ++j) prefix.push_back(regulars[tok_dist(rng)]);
    const Eigen::VectorXd v = adapter.step(input, prefix);
    if ((v.array() > 0.0).any()) return false;
  }
  return true;
}

}  // namespace beamdec
