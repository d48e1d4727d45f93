#include "beamdec/search.hpp"

#include <algorithm>
#include <cmath>

namespace beamdec {

namespace {

Hypothesis root_hypothesis(const Vocabulary& vocab) {
  Hypothesis root;
  root.tokens = {vocab.bos()};
  root.score = 0.0;
  root.priority = 0.0;
  return root;
}

/// True when the trailing EOS run has length exactly one: the hypothesis
/// just completed and is a valid member of the output space.
bool canonical_complete(const Hypothesis& h, TokenId eos) {
  const auto& t = h.tokens;
  if (t.size() < 2 || t.back() != eos) return false;
  return t[t.size() - 2] != eos;
}

void keep_better(std::optional<Hypothesis>& incumbent, const Hypothesis& candidate) {
  if (!incumbent || better_result(candidate, *incumbent)) incumbent = candidate;
}

void sort_results(std::vector<Hypothesis>& v) {
  std::sort(v.begin(), v.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return lex_less(a.tokens, b.tokens);
  });
}

}  // namespace

SearchStrategy make_strategy(StrategyName name, int k) {
  const bool finite = k != SearchStrategy::kUnboundedWidth;
  if (finite && k < 1) throw ConfigError("make_strategy: k must be positive");
  SearchStrategy s;
  s.beam_width = k;
  switch (name) {
    case StrategyName::Greedy:
      if (k != 1) throw ConfigError("make_strategy: greedy requires k = 1");
      [[fallthrough]];
    case StrategyName::Beam:
      s.comparator = ComparatorKind::LengthFirst;
      s.stop_rule = StopRule::AllComplete;
      break;
    case StrategyName::BfBeam:
      s.comparator = ComparatorKind::ScoreFirst;
      s.stop_rule = StopRule::PeekComplete;
      break;
    case StrategyName::AstarBeam:
      s.comparator = ComparatorKind::ScoreFirst;
      s.stop_rule = StopRule::PeekComplete;
      s.use_heuristic = true;
      break;
    case StrategyName::Bfs:
      if (finite) throw ConfigError("make_strategy: bfs requires unbounded k");
      s.comparator = ComparatorKind::LengthFirst;
      s.stop_rule = StopRule::AllComplete;
      break;
    case StrategyName::BestFirst:
      if (finite) throw ConfigError("make_strategy: best_first requires unbounded k");
      s.comparator = ComparatorKind::ScoreFirst;
      s.stop_rule = StopRule::PeekComplete;
      break;
    case StrategyName::Astar:
      if (finite) throw ConfigError("make_strategy: astar requires unbounded k");
      s.comparator = ComparatorKind::ScoreFirst;
      s.stop_rule = StopRule::PeekComplete;
      s.use_heuristic = true;
      break;
  }
  validate_strategy(s);
  return s;
}

std::optional<StrategyName> strategy_from_string(const std::string& s) {
  if (s == "beam") return StrategyName::Beam;
  if (s == "bf_beam") return StrategyName::BfBeam;
  if (s == "astar_beam") return StrategyName::AstarBeam;
  if (s == "bfs") return StrategyName::Bfs;
  if (s == "best_first") return StrategyName::BestFirst;
  if (s == "astar") return StrategyName::Astar;
  if (s == "greedy") return StrategyName::Greedy;
  return std::nullopt;
}

std::string to_string(StrategyName name) {
  switch (name) {
    case StrategyName::Beam: return "beam";
    case StrategyName::BfBeam: return "bf_beam";
    case StrategyName::AstarBeam: return "astar_beam";
    case StrategyName::Bfs: return "bfs";
    case StrategyName::BestFirst: return "best_first";
    case StrategyName::Astar: return "astar";
    case StrategyName::Greedy: return "greedy";
  }
  return "?";
}

std::optional<StopRule> stop_rule_from_string(const std::string& s) {
  if (s == "all-complete") return StopRule::AllComplete;
  if (s == "peek-complete") return StopRule::PeekComplete;
  if (s == "generalized") return StopRule::Generalized;
  if (s == "es-early") return StopRule::EsEarly;
  if (s == "shrinking") return StopRule::Shrinking;
  return std::nullopt;
}

std::string to_string(StopRule rule) {
  switch (rule) {
    case StopRule::AllComplete: return "all-complete";
    case StopRule::PeekComplete: return "peek-complete";
    case StopRule::Generalized: return "generalized";
    case StopRule::EsEarly: return "es-early";
    case StopRule::Shrinking: return "shrinking";
  }
  return "?";
}

void validate_strategy(const SearchStrategy& s) {
  if (s.beam_width < 1) throw ConfigError("strategy: beam width must be positive");
  if (s.memory_gamma) {
    if (s.unbounded()) throw ConfigError("strategy: unbounded k forbids a memory limit");
    if (*s.memory_gamma < 1) throw ConfigError("strategy: gamma must be >= 1");
  }
  if (s.topk_mode && s.unbounded())
    throw ConfigError("strategy: topk mode requires a finite beam width");
  if (s.stop_rule == StopRule::EsEarly || s.stop_rule == StopRule::Shrinking) {
    if (s.comparator != ComparatorKind::LengthFirst || s.unbounded())
      throw ConfigError("strategy: " + to_string(s.stop_rule) +
                        " is a breadth-first stopping rule (beam/greedy only)");
    if (s.topk_mode || s.memory_gamma)
      throw ConfigError("strategy: " + to_string(s.stop_rule) +
                        " does not combine with topk mode or a memory limit");
    if (s.use_heuristic)
      throw ConfigError("strategy: " + to_string(s.stop_rule) + " does not take a heuristic");
  }
}

// ---------------------------------------------------------------------------
// The agenda-based meta-decoder

namespace {

/// Largest score + upper_bound over live hypotheses, scanned per beam.
std::optional<double> live_bound(const BeamAgenda& agenda, const ScoreAdapter& adapter,
                                 const DecoderInput& input) {
  std::optional<double> bound;
  for (int t : agenda.active_lengths()) {
    const double u = adapter.upper_bound(input, t);
    for (const Hypothesis& h : agenda.beam_items(t)) {
      const double b = h.score + u;
      if (!bound || b > *bound) bound = b;
    }
  }
  return bound;
}

std::optional<Hypothesis> best_live_complete(const BeamAgenda& agenda, TokenId eos) {
  std::optional<Hypothesis> best;
  for (int t : agenda.active_lengths()) {
    for (const Hypothesis& h : agenda.beam_items(t)) {
      Hypothesis canon = h;
      canon.tokens = canonical_tokens(h.tokens, eos);
      canon.priority = canon.score;
      keep_better(best, canon);
    }
  }
  return best;
}

}  // namespace

SearchResult decode(const DecoderInput& input, const ScoreAdapter& adapter,
                    const SearchStrategy& strategy, PopTrace* trace) {
  validate_strategy(strategy);
  if (strategy.stop_rule == StopRule::EsEarly)
    return decode_es(input, adapter, strategy.beam_width);
  if (strategy.stop_rule == StopRule::Shrinking)
    return decode_shrinking(input, adapter, strategy.beam_width);

  const Vocabulary& vocab = adapter.vocab();
  const TokenId eos = vocab.eos();
  const int n_max = input.n_max;
  const int k = strategy.beam_width;

  std::optional<std::size_t> capacity_limit;
  if (strategy.memory_gamma)
    capacity_limit = static_cast<std::size_t>(k) * static_cast<std::size_t>(*strategy.memory_gamma);

  BeamAgenda agenda(Comparator{strategy.comparator},
                    strategy.unbounded() ? BeamHeap::kUnboundedCapacity
                                         : static_cast<std::size_t>(k),
                    n_max, eos, capacity_limit);

  SearchResult result;
  result.stats.no_guarantee = !adapter.monotonic() &&
                              strategy.stop_rule != StopRule::Generalized &&
                              !strategy.use_heuristic;

  agenda.push(root_hypothesis(vocab));
  result.stats.pushes = 1;

  std::optional<Hypothesis> incumbent;  // best accepted canonical complete, held off-agenda
  std::vector<Hypothesis> collected;    // topk_mode: first k distinct canonical completes
  bool stopped = false;

  while (!agenda.empty()) {
    // Stop rules evaluated on the live agenda.
    if (strategy.stop_rule == StopRule::AllComplete && !strategy.topk_mode &&
        agenda.incomplete_count() == 0) {
      std::optional<Hypothesis> best = incumbent;
      if (auto live = best_live_complete(agenda, eos)) keep_better(best, *live);
      incumbent = best;
      stopped = true;
      break;
    }
    if (strategy.stop_rule == StopRule::Generalized && !strategy.topk_mode && incumbent) {
      const auto bound = live_bound(agenda, adapter, input);
      if (!bound || incumbent->score >= *bound) {
        stopped = true;
        break;
      }
    }

    Hypothesis h = agenda.pop();
    const int len = h.length();
    if (!agenda.record_pop(len)) continue;  // the pops gate discards it unexpanded
    ++result.stats.pops;
    if (trace) trace->accepted.push_back(h);
    if (agenda.pops_saturated(len) && len > 0) agenda.prune_stale(len);

    if (is_complete(h, eos)) {
      if (canonical_complete(h, eos)) {
        keep_better(incumbent, h);
        if (strategy.topk_mode) {
          collected.push_back(h);
          if (static_cast<int>(collected.size()) >= k) {
            stopped = true;
            break;
          }
        } else if (strategy.stop_rule == StopRule::PeekComplete) {
          incumbent = h;
          stopped = true;
          break;
        }
      }
      // March the complete forward so it keeps competing for beam slots.
      if (len < n_max) {
        agenda.push(extend(h, eos, 0.0, 0.0, eos));
        ++result.stats.pushes;
      }
      continue;
    }

    if (len >= n_max) continue;  // children would exceed the length cap

    ++result.stats.score_calls;
    const Eigen::VectorXd step = adapter.step(input, h.tokens);
    for (TokenId t = 0; t < static_cast<TokenId>(step.size()); ++t) {
      const bool child_complete = t == eos;
      const double heur = strategy.use_heuristic
                              ? adapter.heuristic(input, len + 1, child_complete)
                              : 0.0;
      PushOutcome outcome = PushOutcome::Inserted;
      agenda.push(extend(h, t, step[t], heur, eos), &outcome);
      if (outcome != PushOutcome::Rejected) ++result.stats.pushes;
    }
  }

  result.stats.terminated_early = stopped;
  result.stats.peak_active = static_cast<std::int64_t>(agenda.peak_size());
  result.best = incumbent;
  if (strategy.topk_mode) {
    result.top_k = std::move(collected);
    sort_results(result.top_k);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Breadth-first reference and baselines

namespace {

struct BreadthState {
  std::vector<Hypothesis> beam;
  std::vector<Hypothesis> finished;  // canonical completes that entered a beam
  DecodeStats stats;
};

/// One breadth-first step: expands every member of `beam` (completes
/// re-extend by EOS), prunes to the top `width`, records fresh completes in
/// `finished`. Members of the incoming beam count as pops.
std::vector<Hypothesis> breadth_step(BreadthState& st, const DecoderInput& input,
                                     const ScoreAdapter& adapter, int width, PopTrace* trace) {
  const TokenId eos = adapter.vocab().eos();
  BeamHeap candidates(width == SearchStrategy::kUnboundedWidth
                          ? BeamHeap::kUnboundedCapacity
                          : static_cast<std::size_t>(width));
  for (const Hypothesis& h : st.beam) {
    ++st.stats.pops;
    if (trace) trace->accepted.push_back(h);
    PushOutcome outcome = PushOutcome::Inserted;
    if (is_complete(h, eos)) {
      candidates.push_bounded(extend(h, eos, 0.0, 0.0, eos), &outcome);
      if (outcome != PushOutcome::Rejected) ++st.stats.pushes;
      continue;
    }
    ++st.stats.score_calls;
    const Eigen::VectorXd step = adapter.step(input, h.tokens);
    for (TokenId t = 0; t < static_cast<TokenId>(step.size()); ++t) {
      candidates.push_bounded(extend(h, t, step[t], 0.0, eos), &outcome);
      if (outcome != PushOutcome::Rejected) ++st.stats.pushes;
    }
    st.stats.peak_active = std::max(
        st.stats.peak_active,
        static_cast<std::int64_t>(st.beam.size() + candidates.size()));
  }
  std::vector<Hypothesis> next;
  next.reserve(candidates.size());
  while (!candidates.empty()) next.push_back(candidates.pop_best());
  for (const Hypothesis& h : next)
    if (canonical_complete(h, eos)) st.finished.push_back(h);
  return next;
}

SearchResult breadth_result(BreadthState&& st) {
  SearchResult result;
  result.stats = st.stats;
  for (const Hypothesis& h : st.finished) keep_better(result.best, h);
  result.top_k = std::move(st.finished);
  sort_results(result.top_k);
  return result;
}

}  // namespace

SearchResult beam_search_reference(const DecoderInput& input, const ScoreAdapter& adapter, int k,
                                   PopTrace* trace) {
  if (k < 1) throw ConfigError("beam_search_reference: k must be positive");
  const TokenId eos = adapter.vocab().eos();
  BreadthState st;
  st.beam = {root_hypothesis(adapter.vocab())};
  st.stats.pushes = 1;

  for (int t = 1; t <= input.n_max; ++t) {
    st.beam = breadth_step(st, input, adapter, k, trace);
    if (st.beam.empty()) break;
    const bool all_complete = std::all_of(
        st.beam.begin(), st.beam.end(),
        [&](const Hypothesis& h) { return is_complete(h, eos); });
    if (all_complete) {
      st.stats.terminated_early = t < input.n_max;
      break;
    }
  }
  // The final beam's members would all be gate-accepted by the agenda view
  // of this algorithm, so they count as pops.
  st.stats.pops += static_cast<std::int64_t>(st.beam.size());
  if (trace)
    for (const Hypothesis& h : st.beam) trace->accepted.push_back(h);

  const std::size_t kept = std::min<std::size_t>(st.finished.size(), static_cast<std::size_t>(k));
  SearchResult result = breadth_result(std::move(st));
  result.top_k.resize(kept);
  return result;
}

SearchResult decode_es(const DecoderInput& input, const ScoreAdapter& adapter, int k) {
  if (k < 1) throw ConfigError("decode_es: k must be positive");
  if (!adapter.monotonic())
    throw ConfigError("decode_es requires a monotonic scoring adapter");
  const TokenId eos = adapter.vocab().eos();
  BreadthState st;
  st.beam = {root_hypothesis(adapter.vocab())};
  st.stats.pushes = 1;

  for (int t = 1; t <= input.n_max; ++t) {
    st.beam = breadth_step(st, input, adapter, k, nullptr);
    if (st.beam.empty()) break;
    std::optional<Hypothesis> best_finished;
    for (const Hypothesis& h : st.finished) keep_better(best_finished, h);
    std::optional<double> best_active;
    for (const Hypothesis& h : st.beam)
      if (!is_complete(h, eos) && (!best_active || h.score > *best_active))
        best_active = h.score;
    if (!best_active) {
      st.stats.terminated_early = t < input.n_max;
      break;
    }
    if (best_finished && best_finished->score >= *best_active) {
      st.stats.terminated_early = true;
      break;
    }
  }
  st.stats.pops += static_cast<std::int64_t>(st.beam.size());

  const std::size_t kept = std::min<std::size_t>(st.finished.size(), static_cast<std::size_t>(k));
  SearchResult result = breadth_result(std::move(st));
  result.top_k.resize(kept);
  return result;
}

SearchResult decode_shrinking(const DecoderInput& input, const ScoreAdapter& adapter, int k) {
  if (k < 1) throw ConfigError("decode_shrinking: k must be positive");
  const TokenId eos = adapter.vocab().eos();
  BreadthState st;
  st.beam = {root_hypothesis(adapter.vocab())};
  st.stats.pushes = 1;
  int width = k;

  for (int t = 1; t <= input.n_max && width > 0; ++t) {
    std::vector<Hypothesis> top = breadth_step(st, input, adapter, width, nullptr);
    // Completes in the top set are set aside; each shrinks the width.
    std::vector<Hypothesis> actives;
    for (Hypothesis& h : top) {
      if (is_complete(h, eos)) {
        --width;
      } else {
        actives.push_back(std::move(h));
      }
    }
    while (static_cast<int>(actives.size()) > width && !actives.empty()) actives.pop_back();
    st.beam = std::move(actives);
    if (st.beam.empty() || width <= 0) {
      st.stats.terminated_early = t < input.n_max;
      break;
    }
    std::optional<Hypothesis> best_finished;
    for (const Hypothesis& h : st.finished) keep_better(best_finished, h);
    if (best_finished && best_finished->score >= st.beam.front().score) {
      st.stats.terminated_early = true;
      break;
    }
  }
  st.stats.pops += static_cast<std::int64_t>(st.beam.size());

  SearchResult result = breadth_result(std::move(st));
  const std::size_t kept = std::min<std::size_t>(result.top_k.size(), static_cast<std::size_t>(k));
  result.top_k.resize(kept);
  return result;
}

SearchResult decode_memory_reduced(const DecoderInput& input, const ScoreAdapter& adapter,
                                   const SearchStrategy& strategy) {
  if (strategy.comparator != ComparatorKind::ScoreFirst ||
      (strategy.stop_rule != StopRule::PeekComplete &&
       strategy.stop_rule != StopRule::Generalized))
    throw ConfigError("memory-reduced mode requires a bf_beam or astar_beam strategy");
  if (!strategy.memory_gamma) throw ConfigError("memory-reduced mode requires gamma");
  return decode(input, adapter, strategy);
}

}  // namespace beamdec
