#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "beamdec/agenda.hpp"

using namespace beamdec;

namespace {

constexpr TokenId kBos = 99;
constexpr TokenId kEos = 98;

/// Unique hypothesis of a given length; `id` digits make tokens distinct.
Hypothesis make_hyp(int length, double priority, int id, bool complete = false) {
  Hypothesis h;
  h.tokens.push_back(kBos);
  for (int i = 0; i < length; ++i) h.tokens.push_back(static_cast<TokenId>((id >> (2 * i)) & 3));
  if (complete && length > 0) h.tokens.back() = kEos;
  h.score = priority;
  h.priority = priority;
  return h;
}

/// Reference agenda: a flat list plus the same beam-overflow, capacity, and
/// ordering rules, everything done by linear scan.
class FlatAgenda {
 public:
  FlatAgenda(Comparator cmp, std::size_t k, int n_max, std::optional<std::size_t> limit)
      : cmp_(cmp), k_(k), n_max_(n_max), limit_(limit), pops_(static_cast<std::size_t>(n_max) + 2, 0) {}

  std::optional<Hypothesis> push(Hypothesis h) {
    const int t = h.length();
    std::optional<Hypothesis> victim;
    const bool would_grow = beam_count(t) < k_;
    if (limit_ && would_grow && items_.size() >= *limit_ && !items_.empty())
      victim = remove_worst_of_earliest();
    if (beam_count(t) >= k_) {
      const auto worst = worst_of_length(t);
      if (!HypothesisWorse{}(items_[worst], h)) return h;
      Hypothesis evicted = items_[worst];
      items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(worst));
      items_.push_back(std::move(h));
      return evicted;
    }
    items_.push_back(std::move(h));
    return victim;
  }

  Hypothesis pop() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < items_.size(); ++i)
      if (cmp_.precedes(items_[i], items_[best])) best = i;
    Hypothesis out = items_[best];
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(best));
    return out;
  }

  bool record_pop(int t) {
    if (t > n_max_) return false;
    if (static_cast<std::size_t>(pops_[static_cast<std::size_t>(t)]) >= k_) return false;
    ++pops_[static_cast<std::size_t>(t)];
    return true;
  }

  bool saturated(int t) const {
    return static_cast<std::size_t>(pops_[static_cast<std::size_t>(t)]) >= k_;
  }

  std::size_t prune_stale(int t) {
    const auto before = items_.size();
    items_.erase(std::remove_if(items_.begin(), items_.end(),
                                [&](const Hypothesis& h) { return h.length() < t; }),
                 items_.end());
    return before - items_.size();
  }

  std::optional<Hypothesis> evict_overflow() {
    if (items_.size() < 2) return std::nullopt;
    return remove_worst_of_earliest();
  }

  std::size_t size() const { return items_.size(); }
  std::size_t incomplete_count() const {
    std::size_t n = 0;
    for (const auto& h : items_)
      if (!is_complete(h, kEos)) ++n;
    return n;
  }

 private:
  std::size_t beam_count(int t) const {
    std::size_t n = 0;
    for (const auto& h : items_)
      if (h.length() == t) ++n;
    return n;
  }

  std::size_t worst_of_length(int t) const {
    std::size_t worst = items_.size();
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].length() != t) continue;
      if (worst == items_.size() || HypothesisWorse{}(items_[i], items_[worst])) worst = i;
    }
    return worst;
  }

  Hypothesis remove_worst_of_earliest() {
    int earliest = n_max_ + 2;
    for (const auto& h : items_) earliest = std::min(earliest, h.length());
    const auto worst = worst_of_length(earliest);
    Hypothesis out = items_[worst];
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(worst));
    return out;
  }

  Comparator cmp_;
  std::size_t k_;
  int n_max_;
  std::optional<std::size_t> limit_;
  std::vector<int> pops_;
  std::vector<Hypothesis> items_;
};

}  // namespace

TEST_CASE("push into the empty agenda") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 2, 5, kEos);
  CHECK(!a.push(make_hyp(0, 0.0, 0)));
  CHECK(a.total_size() == 1);
  CHECK(a.beam_items(0).size() == 1);
}

TEST_CASE("beam overflow evicts the worse member") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 1, 5, kEos);
  CHECK(!a.push(make_hyp(2, -1.0, 1)));
  const auto displaced = a.push(make_hyp(2, -0.5, 2));
  REQUIRE(displaced.has_value());
  CHECK(displaced->priority == -1.0);
  CHECK(a.total_size() == 1);
}

TEST_CASE("pop follows the comparator") {
  SUBCASE("score-first pops the higher score across lengths") {
    BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 4, 6, kEos);
    a.push(make_hyp(1, -2.0, 1));
    a.push(make_hyp(3, -1.0, 2));
    CHECK(a.pop().priority == -1.0);
  }
  SUBCASE("length-first pops the shorter hypothesis") {
    BeamAgenda a(Comparator{ComparatorKind::LengthFirst}, 4, 6, kEos);
    a.push(make_hyp(1, -2.0, 1));
    a.push(make_hyp(3, -1.0, 2));
    CHECK(a.pop().length() == 1);
  }
  SUBCASE("score-first breaks equal scores by shorter length") {
    BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 4, 6, kEos);
    a.push(make_hyp(4, -1.0, 1));
    a.push(make_hyp(2, -1.0, 2));
    CHECK(a.pop().length() == 2);
  }
}

TEST_CASE("record_pop gate") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 2, 5, kEos);
  CHECK(a.record_pop(3));
  CHECK(a.pops(3) == 1);
  CHECK(a.record_pop(3));
  CHECK(a.pops(3) == 2);
  CHECK(!a.record_pop(3));  // saturated at k = 2
  CHECK(a.pops(3) == 2);
  CHECK(!a.record_pop(6));  // beyond n_max, regardless of the counter
  CHECK(a.pops_saturated(3));
}

TEST_CASE("prune_stale drops beams below the saturated length") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 1, 6, kEos);
  a.push(make_hyp(2, -1.0, 1));
  a.push(make_hyp(3, -2.0, 2));
  a.push(make_hyp(4, -3.0, 3));
  CHECK(a.record_pop(4));
  REQUIRE(a.pops_saturated(4));
  CHECK(a.prune_stale(4) == 2);
  CHECK(a.total_size() == 1);
  CHECK(a.pop().length() == 4);

  BeamAgenda b(Comparator{ComparatorKind::ScoreFirst}, 1, 6, kEos);
  b.push(make_hyp(4, -3.0, 3));
  CHECK(b.record_pop(4));
  CHECK(b.prune_stale(4) == 0);  // nothing below

  BeamAgenda c(Comparator{ComparatorKind::ScoreFirst}, 1, 6, kEos);
  c.push(make_hyp(2, -1.0, 1));
  CHECK_THROWS_AS(c.prune_stale(2), std::logic_error);  // counter not saturated
}

TEST_CASE("evict_overflow removes the worst of the earliest beam") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 4, 6, kEos);
  a.push(make_hyp(1, -3.0, 1));
  a.push(make_hyp(1, -1.0, 2));
  a.push(make_hyp(4, -0.5, 3));
  const auto evicted = a.evict_overflow();
  REQUIRE(evicted.has_value());
  CHECK(evicted->priority == -3.0);
  CHECK(evicted->length() == 1);

  BeamAgenda single(Comparator{ComparatorKind::ScoreFirst}, 4, 6, kEos);
  single.push(make_hyp(2, -9.0, 1));
  CHECK(!single.evict_overflow());  // progress guarantee

  // Repeated eviction drains the earliest beams first.
  BeamAgenda b(Comparator{ComparatorKind::ScoreFirst}, 4, 6, kEos);
  b.push(make_hyp(1, -1.0, 1));
  b.push(make_hyp(2, -2.0, 2));
  b.push(make_hyp(3, -3.0, 3));
  CHECK(b.evict_overflow()->length() == 1);
  CHECK(b.evict_overflow()->length() == 2);
  CHECK(!b.evict_overflow());
}

TEST_CASE("capacity limit evicts before growth and keeps the peak bounded") {
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 1, 6, kEos, std::size_t{2});
  a.push(make_hyp(1, -1.0, 1));
  a.push(make_hyp(2, -2.0, 2));
  CHECK(a.total_size() == 2);
  const auto victim = a.push(make_hyp(3, -3.0, 3));
  REQUIRE(victim.has_value());
  CHECK(victim->length() == 1);  // earliest beam pays
  CHECK(a.total_size() == 2);
  CHECK(a.peak_size() <= 2);
}

TEST_CASE("differential: random traces match the flat-list oracle") {
  std::mt19937_64 rng(515);
  std::uniform_real_distribution<double> pri(-10.0, 0.0);
  for (int trace = 0; trace < 400; ++trace) {
    const int n_max = 3 + static_cast<int>(rng() % 6);
    const std::size_t k = 1 + rng() % 3;
    const bool limited = (rng() % 2) == 0;
    const std::optional<std::size_t> limit =
        limited ? std::optional<std::size_t>(k * (1 + rng() % 3)) : std::nullopt;
    const Comparator cmp{(rng() % 2) ? ComparatorKind::ScoreFirst : ComparatorKind::LengthFirst};

    BeamAgenda agenda(cmp, k, n_max, kEos, limit);
    FlatAgenda flat(cmp, k, n_max, limit);
    int id = 0;

    for (int op = 0; op < 60; ++op) {
      const int kind = static_cast<int>(rng() % 10);
      if (kind < 6 || agenda.empty()) {
        const int len = static_cast<int>(rng() % static_cast<unsigned>(n_max + 1));
        const bool complete = (rng() % 4) == 0;
        const Hypothesis h = make_hyp(len, pri(rng), id++, complete);
        const auto got = agenda.push(h);
        const auto expect = flat.push(h);
        CHECK(got.has_value() == expect.has_value());
        if (got && expect) CHECK(got->tokens == expect->tokens);
      } else if (kind < 8) {
        const Hypothesis got = agenda.pop();
        const Hypothesis expect = flat.pop();
        CHECK(got.tokens == expect.tokens);
        CHECK(got.priority == expect.priority);
        // Exercise the gate and opportunistic pruning on the same trace.
        const bool got_gate = agenda.record_pop(got.length());
        const bool expect_gate = flat.record_pop(expect.length());
        CHECK(got_gate == expect_gate);
        if (got_gate && agenda.pops_saturated(got.length()) && got.length() > 0) {
          const auto dropped = agenda.prune_stale(got.length());
          CHECK(dropped == flat.prune_stale(got.length()));
        }
      } else if (kind == 8) {
        const auto got = agenda.evict_overflow();
        const auto expect = flat.evict_overflow();
        CHECK(got.has_value() == expect.has_value());
        if (got && expect) CHECK(got->tokens == expect->tokens);
      } else if (!agenda.empty()) {
        const Hypothesis expect = flat.pop();
        CHECK(agenda.peek().tokens == expect.tokens);
        flat.push(expect);  // restore
      }
      CHECK(agenda.total_size() == flat.size());
      CHECK(agenda.incomplete_count() == flat.incomplete_count());
      if (limit) CHECK(agenda.peak_size() <= std::max<std::size_t>(*limit, 1));
    }
  }
}

TEST_CASE("locator consistency: items live in the beam of their length") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pri(-5.0, 0.0);
  BeamAgenda a(Comparator{ComparatorKind::ScoreFirst}, 3, 8, kEos);
  for (int i = 0; i < 80; ++i) a.push(make_hyp(static_cast<int>(rng() % 9), pri(rng), i));
  for (int t : a.active_lengths())
    for (const Hypothesis& h : a.beam_items(t)) CHECK(h.length() == t);
}
