#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "beamdec/oracle.hpp"
#include "beamdec/scoring.hpp"
#include "support.hpp"

using namespace beamdec;

namespace {

double step_sum(const ScoreAdapter& adapter, const DecoderInput& input, const TokenSeq& tokens) {
  const TokenId eos = adapter.vocab().eos();
  double sum = 0.0;
  TokenSeq prefix{tokens.front()};
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (prefix.back() != eos) sum += adapter.step(input, prefix)[tokens[i]];
    prefix.push_back(tokens[i]);
  }
  return sum;
}

}  // namespace

TEST_CASE("ln_bound") {
  LengthNormParams ratio{0.5, LengthNormParams::BoundMode::Ratio, 0.7};
  CHECK(ln_bound(ratio, DecoderInput(TokenSeq(10, 0), 25)) == doctest::Approx(7.0));

  LengthNormParams nmax{0.5, LengthNormParams::BoundMode::NMax, 0.7};
  CHECK(ln_bound(nmax, DecoderInput(TokenSeq(10, 0), 25)) == 25.0);

  LengthNormParams bad{0.5, LengthNormParams::BoundMode::Ratio, 2.0};
  CHECK_THROWS_AS(ln_bound(bad, DecoderInput(TokenSeq(20, 0), 30)), ConfigError);
}

TEST_CASE("ln_step adds the reward while below the bound") {
  const Eigen::VectorXd base = (Eigen::VectorXd(3) << -1.0, -2.0, -0.5).finished();
  const Eigen::VectorXd active = ln_step(base, 0.5, 6.0, 3);
  for (int i = 0; i < 3; ++i) CHECK(active[i] == base[i] + 0.5);
  const Eigen::VectorXd saturated = ln_step(base, 0.5, 6.0, 6);
  CHECK(saturated == base);

  // Summing six rewarded steps with b = n_max reproduces the closed form:
  // base -4.0 plus 0.5 * 6 = -1.0.
  double score = -4.0;
  for (int len = 0; len < 6; ++len) score += ln_step(Eigen::VectorXd::Zero(1), 0.5, 10.0, len)[0];
  CHECK(score == doctest::Approx(-1.0).epsilon(1e-12));

  // Fractional bounds telescope exactly to beta * min(b, N).
  double frac = 0.0;
  for (int len = 0; len < 8; ++len) frac += ln_step(Eigen::VectorXd::Zero(1), 1.0, 5.5, len)[0];
  CHECK(frac == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("ln_heuristic and ln_upper_bound") {
  CHECK(ln_heuristic(0.5, 7.0, 3, /*complete=*/true) == 0.0);
  CHECK(ln_heuristic(0.5, 7.0, 3, false) == doctest::Approx(2.0));
  CHECK(ln_heuristic(0.5, 7.0, 9, false) == 0.0);

  CHECK(ln_upper_bound(1.2, 10.0, 10) == 0.0);
  CHECK(ln_upper_bound(1.2, 10.0, 4) == doctest::Approx(7.2));
  for (int len = 0; len < 12; ++len)
    CHECK(ln_upper_bound(1.2, 10.0, len) >= ln_upper_bound(1.2, 10.0, len + 1));
}

TEST_CASE("pmi_step") {
  const Eigen::VectorXd cond = (Eigen::VectorXd(2) << std::log(0.5), std::log(0.5)).finished();
  const Eigen::VectorXd lm = (Eigen::VectorXd(2) << std::log(0.25), std::log(1e-9)).finished();

  PmiParams off{0.0, 1e-4};
  CHECK(pmi_step(cond, lm, off) == cond);  // exact identity at lambda = 0

  PmiParams on{0.05, 1e-4};
  const Eigen::VectorXd v = pmi_step(cond, lm, on);
  CHECK(v[0] == doctest::Approx(std::log(0.5) - 0.05 * std::log(0.25)).epsilon(1e-12));
  // 1e-9 < eps: the clamp term uses log eps.
  CHECK(v[1] == doctest::Approx(std::log(0.5) - 0.05 * std::log(1e-4)).epsilon(1e-12));
}

TEST_CASE("pmi_heuristic and pmi_upper_bound") {
  PmiParams p{0.05, 0.01};
  CHECK(pmi_heuristic(p, 10, 6, /*complete=*/true) == 0.0);
  CHECK(pmi_heuristic(p, 10, 6, false) == doctest::Approx(-0.05 * std::log(0.01) * 4));
  CHECK(pmi_heuristic(p, 10, 10, false) == 0.0);

  CHECK(pmi_upper_bound(PmiParams{0.3, 1.0}, 10, 2) == 0.0);  // eps = 1: no possible gain
  CHECK(pmi_upper_bound(p, 10, 10) == 0.0);
  const double per_unit = -0.05 * std::log(0.01);
  for (int len = 0; len < 10; ++len)
    CHECK(pmi_upper_bound(p, 10, len) - pmi_upper_bound(p, 10, len + 1) ==
          doctest::Approx(per_unit).epsilon(1e-12));
}

TEST_CASE("stop_generalized") {
  const TableModel model = random_model(3, 3, 1);
  const LogProbAdapter adapter(model);
  const DecoderInput input({0}, 8);

  Hypothesis done{{model.vocab().bos(), 0, model.vocab().eos()}, -1.0, -1.0};
  Hypothesis live{{model.vocab().bos(), 0}, -1.5, -1.5};

  // Pretend bound of 0.3 via an LN adapter: -1.0 >= -1.5 + 0.3.
  LengthNormParams params{0.3, LengthNormParams::BoundMode::NMax, 0.7};
  const LengthNormAdapter ln(model, params);
  live.tokens = {model.vocab().bos(), 0};  // length 1, bound = 0.3 * (8 - 1)... not 0.3
  // Use a live hypothesis one step short of the bound instead:
  Hypothesis nearly{{model.vocab().bos(), 0, 0, 0, 0, 0, 0, 0}, -1.5, -1.5};  // length 7
  CHECK(ln.upper_bound(input, nearly.length()) == doctest::Approx(0.3));
  CHECK(stop_generalized(done, nearly, ln, input));       // -1.0 >= -1.5 + 0.3
  Hypothesis close{{model.vocab().bos(), 0, 0, 0, 0, 0, 0, 0}, -1.2, -1.2};
  CHECK(!stop_generalized(done, close, ln, input));       // -1.0 < -1.2 + 0.3

  CHECK(!stop_generalized(std::nullopt, live, adapter, input));  // nothing complete yet
  CHECK(stop_generalized(done, std::nullopt, adapter, input));   // empty agenda

  // Monotonic adapter: degenerates to best-complete >= best-live.
  Hypothesis worse_live{{model.vocab().bos(), 1}, -0.9, -0.9};
  CHECK(!stop_generalized(done, worse_live, adapter, input));
  Hypothesis beaten_live{{model.vocab().bos(), 1}, -1.0001, -1.0001};
  CHECK(stop_generalized(done, beaten_live, adapter, input));
}

TEST_CASE("check_monotonic classifies the adapters") {
  const TableModel model = random_model(11, 3, 1);
  const TableModel lm_model = random_model(12, 3, 1);
  const DecoderInput input({0, 1}, 8);

  CHECK(check_monotonic(LogProbAdapter(model), input, 64, 5));

  LengthNormParams ln{1.5, LengthNormParams::BoundMode::NMax, 0.7};
  CHECK(!check_monotonic(LengthNormAdapter(model, ln), input, 64, 5));
  LengthNormParams ln_off{0.0, LengthNormParams::BoundMode::NMax, 0.7};
  CHECK(check_monotonic(LengthNormAdapter(model, ln_off), input, 64, 5));

  bool found_witness = false;
  for (std::uint64_t seed = 0; seed < 20 && !found_witness; ++seed) {
    const TableModel cond = random_model(100 + seed, 3, 1);
    const TableModel lm = random_model(200 + seed, 3, 1);
    found_witness = !check_monotonic(PmiAdapter(cond, lm, PmiParams{1.0, 0.01}), input, 64, seed);
  }
  CHECK(found_witness);

  CHECK(check_monotonic(PmiAdapter(model, lm_model, PmiParams{0.0, 0.01}), input, 64, 5));
  CHECK(check_monotonic(PmiAdapter(model, lm_model, PmiParams{0.5, 1.0}), input, 64, 5));

  CHECK(LogProbAdapter(model).monotonic());
  CHECK(!LengthNormAdapter(model, ln).monotonic());
  CHECK(LengthNormAdapter(model, ln_off).monotonic());
  CHECK(!PmiAdapter(model, lm_model, PmiParams{0.1, 0.5}).monotonic());
  CHECK(PmiAdapter(model, lm_model, PmiParams{0.5, 1.0}).monotonic());
}

TEST_CASE("per-step sums match the closed-form sequence score within 1e-9") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const TableModel model = random_model(seed, 4, 1);
    const TableModel lm = random_model(seed + 1000, 4, 1);
    const DecoderInput input({0, 1, 2}, 6);

    const LogProbAdapter logp(model);
    const LengthNormAdapter ln_ratio(
        model, LengthNormParams{0.5, LengthNormParams::BoundMode::Ratio, 0.9});
    const LengthNormAdapter ln_nmax(
        model, LengthNormParams{1.0, LengthNormParams::BoundMode::NMax, 0.7});
    const PmiAdapter pmi(model, lm, PmiParams{0.05, 1e-2});

    for (const auto& seq : enumerate_space(model.vocab(), input.n_max, EnumerationBudget{1000})) {
      for (const ScoreAdapter* adapter :
           {static_cast<const ScoreAdapter*>(&logp), static_cast<const ScoreAdapter*>(&ln_ratio),
            static_cast<const ScoreAdapter*>(&ln_nmax), static_cast<const ScoreAdapter*>(&pmi)}) {
        const double by_steps = step_sum(*adapter, input, seq);
        const double closed = adapter->sequence_score(input, seq);
        CHECK(std::abs(by_steps - closed) < 1e-9);
      }
    }
  }
}

TEST_CASE("sequence_score ignores re-extension steps") {
  const TableModel model = random_model(4, 3, 1);
  const LogProbAdapter adapter(model);
  const DecoderInput input({0}, 6);
  const TokenId eos = model.vocab().eos();
  const TokenSeq once{model.vocab().bos(), 0, eos};
  TokenSeq marched = once;
  marched.push_back(eos);
  marched.push_back(eos);
  CHECK(adapter.sequence_score(input, once) == adapter.sequence_score(input, marched));
}

TEST_CASE("heuristics are admissible and bounds are tight on enumerated spaces") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TableModel model = random_model(seed + 40, 3, 1);
    const TableModel lm = random_model(seed + 50, 3, 1);
    const DecoderInput input({0, 1}, 5);
    const LengthNormAdapter ln(model,
                               LengthNormParams{0.8, LengthNormParams::BoundMode::NMax, 0.7});
    const PmiAdapter pmi(model, lm, PmiParams{0.3, 1e-2});

    for (const ScoreAdapter* adapter :
         {static_cast<const ScoreAdapter*>(&ln), static_cast<const ScoreAdapter*>(&pmi)}) {
      for (const auto& seq : enumerate_space(model.vocab(), input.n_max, EnumerationBudget{1000})) {
        const double final_score = step_sum(*adapter, input, seq);
        TokenSeq prefix{seq.front()};
        double running = 0.0;
        for (std::size_t i = 1; i < seq.size(); ++i) {
          // Admissibility: the heuristic never underestimates what is left.
          const double h = adapter->heuristic(input, static_cast<int>(prefix.size()) - 1, false);
          CHECK(final_score <= running + h + 1e-9);
          const double u = adapter->upper_bound(input, static_cast<int>(prefix.size()) - 1);
          CHECK(final_score <= running + u + 1e-9);
          running += adapter->step(input, prefix)[seq[i]];
          prefix.push_back(seq[i]);
        }
      }

      // Tightness: U(y) >= step(t) + U(y.t) for every single-step extension.
      for (int len = 0; len + 1 < input.n_max; ++len) {
        TokenSeq prefix{model.vocab().bos()};
        for (int i = 0; i < len; ++i) prefix.push_back(0);
        const Eigen::VectorXd step = adapter->step(input, prefix);
        const double u_here = adapter->upper_bound(input, len);
        for (int t = 0; t < step.size(); ++t)
          CHECK(u_here + 1e-9 >= step[t] + adapter->upper_bound(input, len + 1));
      }
    }
  }
}
