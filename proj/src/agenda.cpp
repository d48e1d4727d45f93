#include "beamdec/agenda.hpp"

#include <algorithm>

namespace beamdec {

BeamAgenda::BeamAgenda(Comparator comparator, std::size_t beam_capacity, int n_max, TokenId eos,
                       std::optional<std::size_t> capacity_limit)
    : comparator_(comparator),
      beam_capacity_(beam_capacity),
      n_max_(n_max),
      eos_(eos),
      capacity_limit_(capacity_limit) {
  if (beam_capacity_ == 0) throw ConfigError("BeamAgenda: beam capacity must be positive");
  if (n_max_ < 1) throw ConfigError("BeamAgenda: n_max must be >= 1");
  if (capacity_limit_ && *capacity_limit_ == 0)
    throw ConfigError("BeamAgenda: capacity limit must be positive");
  beams_.resize(static_cast<std::size_t>(n_max_) + 2);
  order_pos_.assign(beams_.size(), -1);
  pops_.assign(beams_.size(), 0);
}

bool BeamAgenda::beam_precedes(int a, int b) const {
  return comparator_.precedes(beams_[static_cast<std::size_t>(a)]->peek_best(),
                              beams_[static_cast<std::size_t>(b)]->peek_best());
}

void BeamAgenda::sift_up(std::size_t pos) {
  while (pos > 0) {
    const std::size_t parent = (pos - 1) / 2;
    if (!beam_precedes(order_[pos], order_[parent])) break;
    std::swap(order_[pos], order_[parent]);
    order_pos_[static_cast<std::size_t>(order_[pos])] = static_cast<int>(pos);
    order_pos_[static_cast<std::size_t>(order_[parent])] = static_cast<int>(parent);
    pos = parent;
  }
}

void BeamAgenda::sift_down(std::size_t pos) {
  const std::size_t n = order_.size();
  for (;;) {
    std::size_t first = pos;
    const std::size_t l = 2 * pos + 1, r = 2 * pos + 2;
    if (l < n && beam_precedes(order_[l], order_[first])) first = l;
    if (r < n && beam_precedes(order_[r], order_[first])) first = r;
    if (first == pos) return;
    std::swap(order_[pos], order_[first]);
    order_pos_[static_cast<std::size_t>(order_[pos])] = static_cast<int>(pos);
    order_pos_[static_cast<std::size_t>(order_[first])] = static_cast<int>(first);
    pos = first;
  }
}

void BeamAgenda::order_insert(int length) {
  order_.push_back(length);
  order_pos_[static_cast<std::size_t>(length)] = static_cast<int>(order_.size() - 1);
  sift_up(order_.size() - 1);
}

void BeamAgenda::order_erase(int length) {
  const int pos = order_pos_[static_cast<std::size_t>(length)];
  if (pos < 0) return;
  const std::size_t p = static_cast<std::size_t>(pos);
  order_pos_[static_cast<std::size_t>(length)] = -1;
  if (p + 1 != order_.size()) {
    order_[p] = order_.back();
    order_pos_[static_cast<std::size_t>(order_[p])] = pos;
    order_.pop_back();
    sift_up(p);
    sift_down(p);
  } else {
    order_.pop_back();
  }
}

void BeamAgenda::order_update(int length) {
  const int pos = order_pos_[static_cast<std::size_t>(length)];
  if (pos < 0) return;
  sift_up(static_cast<std::size_t>(pos));
  sift_down(static_cast<std::size_t>(order_pos_[static_cast<std::size_t>(length)]));
}

void BeamAgenda::note_removed(const Hypothesis& h) {
  --total_size_;
  if (!is_complete(h, eos_)) --incomplete_count_;
}

std::optional<Hypothesis> BeamAgenda::push(Hypothesis h, PushOutcome* outcome) {
  const int t = h.length();
  if (t < 0 || t > n_max_ + 1)
    throw std::logic_error("BeamAgenda::push: hypothesis length out of range");

  std::optional<Hypothesis> capacity_victim;
  {
    const auto& slot = beams_[static_cast<std::size_t>(t)];
    const bool would_grow = !slot || !slot->full();
    // Insertion follows immediately, so unlike the public evict_overflow this
    // may run the agenda down to zero before the insert restores one.
    if (capacity_limit_ && would_grow && total_size_ >= *capacity_limit_ && total_size_ >= 1)
      capacity_victim = evict_for_insert();
  }

  auto& slot = beams_[static_cast<std::size_t>(t)];
  if (!slot) slot.emplace(beam_capacity_);

  const bool was_empty = slot->empty();
  const bool h_incomplete = !is_complete(h, eos_);
  PushOutcome heap_outcome = PushOutcome::Inserted;
  std::optional<Hypothesis> displaced = slot->push_bounded(std::move(h), &heap_outcome);
  if (outcome) *outcome = heap_outcome;

  switch (heap_outcome) {
    case PushOutcome::Rejected:
      return displaced;
    case PushOutcome::Evicted:
      // Beam-level eviction: size unchanged, membership swapped.
      if (!is_complete(*displaced, eos_)) --incomplete_count_;
      if (h_incomplete) ++incomplete_count_;
      break;
    case PushOutcome::Inserted:
      ++total_size_;
      if (h_incomplete) ++incomplete_count_;
      peak_size_ = std::max(peak_size_, total_size_);
      break;
  }

  if (was_empty)
    order_insert(t);
  else
    order_update(t);
  if (t < earliest_hint_) earliest_hint_ = t;

  return displaced ? std::move(displaced) : std::move(capacity_victim);
}

Hypothesis BeamAgenda::pop() {
  if (order_.empty()) throw std::out_of_range("BeamAgenda::pop on empty agenda");
  const int t = order_.front();
  auto& beam = beams_[static_cast<std::size_t>(t)];
  Hypothesis out = beam->pop_best();
  note_removed(out);
  if (beam->empty()) {
    order_erase(t);
    if (earliest_hint_ == t) ++earliest_hint_;
  } else {
    order_update(t);
  }
  return out;
}

const Hypothesis& BeamAgenda::peek() const {
  if (order_.empty()) throw std::out_of_range("BeamAgenda::peek on empty agenda");
  return beams_[static_cast<std::size_t>(order_.front())]->peek_best();
}

bool BeamAgenda::record_pop(int length) {
  if (length < 0) throw std::logic_error("record_pop: negative length");
  if (length > n_max_) return false;
  auto& counter = pops_[static_cast<std::size_t>(length)];
  if (beam_capacity_ != BeamHeap::kUnboundedCapacity &&
      static_cast<std::size_t>(counter) >= beam_capacity_)
    return false;
  ++counter;
  return true;
}

int BeamAgenda::pops(int length) const {
  if (length < 0 || static_cast<std::size_t>(length) >= pops_.size()) return 0;
  return pops_[static_cast<std::size_t>(length)];
}

bool BeamAgenda::pops_saturated(int length) const {
  if (beam_capacity_ == BeamHeap::kUnboundedCapacity) return false;
  return static_cast<std::size_t>(pops(length)) >= beam_capacity_;
}

std::size_t BeamAgenda::prune_stale(int length) {
  if (!pops_saturated(length))
    throw std::logic_error("prune_stale: pops counter at length not saturated");
  std::size_t dropped = 0;
  for (int t = 0; t < length && static_cast<std::size_t>(t) < beams_.size(); ++t) {
    auto& slot = beams_[static_cast<std::size_t>(t)];
    if (!slot || slot->empty()) continue;
    dropped += slot->size();
    for (const Hypothesis& h : slot->items()) note_removed(h);
    order_erase(t);
    slot.reset();
  }
  if (earliest_hint_ < length) earliest_hint_ = length;
  return dropped;
}

int BeamAgenda::earliest_active() const {
  for (std::size_t t = static_cast<std::size_t>(std::max(earliest_hint_, 0)); t < beams_.size();
       ++t) {
    if (beams_[t] && !beams_[t]->empty()) {
      earliest_hint_ = static_cast<int>(t);
      return static_cast<int>(t);
    }
  }
  return -1;
}

Hypothesis BeamAgenda::evict_for_insert() {
  const int t = earliest_active();
  if (t < 0) throw std::logic_error("evict_for_insert on empty agenda");
  auto& beam = beams_[static_cast<std::size_t>(t)];
  Hypothesis out = beam->pop_worst();
  note_removed(out);
  if (beam->empty()) {
    order_erase(t);
    if (earliest_hint_ == t) ++earliest_hint_;
  } else {
    order_update(t);
  }
  return out;
}

std::optional<Hypothesis> BeamAgenda::evict_overflow() {
  if (total_size_ < 2) return std::nullopt;  // never evict the last live hypothesis
  return evict_for_insert();
}

std::vector<int> BeamAgenda::active_lengths() const {
  std::vector<int> out;
  for (std::size_t t = 0; t < beams_.size(); ++t)
    if (beams_[t] && !beams_[t]->empty()) out.push_back(static_cast<int>(t));
  return out;
}

std::span<const Hypothesis> BeamAgenda::beam_items(int length) const {
  if (length < 0 || static_cast<std::size_t>(length) >= beams_.size()) return {};
  const auto& slot = beams_[static_cast<std::size_t>(length)];
  if (!slot) return {};
  return slot->items();
}

}  // namespace beamdec
