#include "rtsched/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "rtsched/error.hpp"
#include "rtsched/rng.hpp"

namespace rts {

LinkSet brute_force_mws(const InterferenceGraph& graph, LinkSet nonempty,
                        std::span<const double> deficits, std::span<const double> success_probs) {
  const int k = graph.link_count();
  if (k > 12) throw Error(ErrorCode::GraphTooLarge, "brute-force max-weight is limited to 12 links");

  std::vector<LinkSet> schedules;
  for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << k); ++bits) {
    bool independent = true;
    for (int a = 0; a < k && independent; ++a)
      for (int b = a + 1; b < k && independent; ++b)
        if (((bits >> a) & 1U) && ((bits >> b) & 1U) && graph.adjacent(a, b)) independent = false;
    if (!independent) continue;
    bool maximal = true;
    for (int out = 0; out < k && maximal; ++out) {
      if ((bits >> out) & 1U) continue;
      bool blocked = false;
      for (int in = 0; in < k && !blocked; ++in)
        if (((bits >> in) & 1U) && graph.adjacent(in, out)) blocked = true;
      maximal = blocked;
    }
    if (!maximal) continue;
    const LinkSet active = LinkSet(bits) & nonempty;
    if (!active.empty() && std::find(schedules.begin(), schedules.end(), active) == schedules.end())
      schedules.push_back(active);
  }
  if (schedules.empty()) throw Error(ErrorCode::NoSchedule, "no nonempty link");

  LinkSet best;
  double best_weight = -1.0;
  for (LinkSet m : schedules) {
    double w = 0.0;
    for (int l = 0; l < k; ++l)
      if (m.contains(l)) w += deficits[l] * success_probs[l];
    if (w > best_weight || (w == best_weight && lex_less(m, best))) {
      best = m;
      best_weight = w;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kTieTol = 1e-12;
constexpr int kSlotBits = 5;

int bits_for(long long max_value) {
  return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned long long>(max_value))));
}

std::uint64_t hash_key(std::uint64_t key) { return mix64(key); }

}  // namespace

std::size_t StateTable::slot_for(std::uint64_t key) const {
  const std::size_t mask = entries_.size() - 1;
  std::size_t i = static_cast<std::size_t>(hash_key(key)) & mask;
  while (used_[i] && entries_[i].key != key) i = (i + 1) & mask;
  return i;
}

const StateTable::Entry* StateTable::find(std::uint64_t key) const {
  if (entries_.empty()) return nullptr;
  const std::size_t i = slot_for(key);
  return used_[i] ? &entries_[i] : nullptr;
}

void StateTable::grow() {
  std::vector<Entry> old_entries = std::move(entries_);
  std::vector<std::uint8_t> old_used = std::move(used_);
  const std::size_t capacity = old_entries.empty() ? 1024 : 2 * old_entries.size();
  entries_.assign(capacity, Entry{});
  used_.assign(capacity, 0);
  for (std::size_t i = 0; i < old_entries.size(); ++i) {
    if (!old_used[i]) continue;
    const std::size_t j = slot_for(old_entries[i].key);
    entries_[j] = old_entries[i];
    used_[j] = 1;
  }
}

void StateTable::insert(std::uint64_t key, double value, LinkSet best) {
  if (2 * (size_ + 1) > entries_.size()) grow();
  const std::size_t i = slot_for(key);
  if (!used_[i]) {
    used_[i] = 1;
    ++size_;
  }
  entries_[i] = Entry{key, value, best};
}

void StateTable::clear() {
  if (size_ == 0) return;
  std::fill(used_.begin(), used_.end(), std::uint8_t{0});
  size_ = 0;
}

FrameSolver::FrameSolver(const InterferenceGraph& graph, const OracleLimits& limits, bool memoize)
    : graph_(&graph),
      limits_(limits),
      memoize_(memoize),
      links_(graph.link_count()),
      d_max_(limits.max_deadline) {
  if (links_ > limits_.max_links || links_ > kMaxLinks) {
    throw Error(ErrorCode::StateSpaceExceeded, "frame oracle handles at most " +
                                                   std::to_string(std::min(limits_.max_links, kMaxLinks)) + " links");
  }
  if (d_max_ < 1 || links_ * d_max_ > kMaxCells) {
    throw Error(ErrorCode::StateSpaceExceeded, "deadline limit too large for the frame oracle");
  }
  family_ = enumerate_mis(graph);
  const std::size_t masks = std::size_t{1} << links_;
  candidate_cache_.assign(masks, {});
  candidate_ready_.assign(masks, 0);
}

FrameSolver::FrameSolver(const InterferenceGraph& graph, std::vector<FrameSlot> slots,
                         std::vector<long long> base_deficits, const OracleLimits& limits, bool memoize)
    : FrameSolver(graph, limits, memoize) {
  reset(std::move(slots), std::move(base_deficits));
}

void FrameSolver::reset(std::vector<FrameSlot> slots, std::vector<long long> base_deficits) {
  const int frame = static_cast<int>(slots.size());
  if (frame < 1 || frame > limits_.max_frame || frame >= (1 << kSlotBits)) {
    throw Error(ErrorCode::StateSpaceExceeded, "frame of " + std::to_string(frame) +
                                                   " slots exceeds the oracle limit of " +
                                                   std::to_string(limits_.max_frame));
  }
  if (static_cast<int>(base_deficits.size()) != links_) {
    throw Error(ErrorCode::InvalidArgument, "need one initial deficit per link");
  }
  for (const auto& s : slots) {
    if (s.state.link_count() != links_ || static_cast<int>(s.deficit_arrivals.size()) != links_) {
      throw Error(ErrorCode::InvalidArgument, "frame slot does not match the link count");
    }
    for (int l = 0; l < links_; ++l) {
      if (s.state.arrival_count(l) > limits_.max_arrivals) {
        throw Error(ErrorCode::StateSpaceExceeded, "frame oracle allows at most " +
                                                       std::to_string(limits_.max_arrivals) +
                                                       " arrivals per link and slot");
      }
      for (const auto& g : s.state.arrivals[l])
        if (g.deadline > d_max_) throw Error(ErrorCode::StateSpaceExceeded, "deadline above the oracle limit");
      if (s.deficit_arrivals[l] < 0 || s.deficit_arrivals[l] > limits_.max_arrivals) {
        throw Error(ErrorCode::InvalidArgument, "deficit increments must be integers in [0, a_max]");
      }
    }
  }
  count_bits_ = bits_for(static_cast<long long>(limits_.max_arrivals) * d_max_);
  deficit_bias_ = frame;
  deficit_bits_ = bits_for(static_cast<long long>(frame) * (limits_.max_arrivals + 1));
  const long long key_bits = kSlotBits + static_cast<long long>(links_) * d_max_ * count_bits_ +
                             static_cast<long long>(links_) * deficit_bits_;
  if (key_bits > 64) throw Error(ErrorCode::StateSpaceExceeded, "oracle state does not fit a 64-bit key");

  slots_ = std::move(slots);
  base_ = std::move(base_deficits);
  const std::size_t masks = std::size_t{1} << links_;
  outcome_cache_.resize(static_cast<std::size_t>(frame) * masks);
  outcome_ready_.assign(static_cast<std::size_t>(frame) * masks, 0);
  memo_.clear();
  policy_memo_.clear();
  unmemoized_nodes_ = 0;
}

FrameSolver::Decoded FrameSolver::decode(std::uint64_t packed) const {
  Decoded node;
  node.slot = static_cast<int>(packed & ((1U << kSlotBits) - 1));
  int shift = kSlotBits;
  const std::uint64_t count_mask = (std::uint64_t{1} << count_bits_) - 1;
  for (int c = 0; c < links_ * d_max_; ++c) {
    node.counts[c] = static_cast<std::uint8_t>((packed >> shift) & count_mask);
    shift += count_bits_;
  }
  const std::uint64_t deficit_mask = (std::uint64_t{1} << deficit_bits_) - 1;
  for (int l = 0; l < links_; ++l) {
    node.deficits[l] = static_cast<long long>((packed >> shift) & deficit_mask) - deficit_bias_ + base_[l];
    shift += deficit_bits_;
  }
  return node;
}

std::uint64_t FrameSolver::encode(const Decoded& node) const {
  std::uint64_t k = static_cast<std::uint64_t>(node.slot);
  int shift = kSlotBits;
  for (int c = 0; c < links_ * d_max_; ++c) {
    k |= static_cast<std::uint64_t>(node.counts[c]) << shift;
    shift += count_bits_;
  }
  const long long span = (1LL << deficit_bits_) - 1;
  for (int l = 0; l < links_; ++l) {
    const long long offset = node.deficits[l] - base_[l] + deficit_bias_;
    if (offset < 0 || offset > span) throw Error(ErrorCode::StateSpaceExceeded, "deficit drifted outside the frame range");
    k |= static_cast<std::uint64_t>(offset) << shift;
    shift += deficit_bits_;
  }
  return k;
}

void FrameSolver::add_arrivals(Decoded& node, int slot) const {
  const auto& state = slots_[slot].state;
  const int cap = (1 << count_bits_) - 1;
  for (int l = 0; l < links_; ++l) {
    for (const auto& g : state.arrivals[l]) {
      auto& c = node.counts[l * d_max_ + (g.deadline - 1)];
      if (c + g.count > cap) throw Error(ErrorCode::StateSpaceExceeded, "buffer occupancy above oracle limit");
      c = static_cast<std::uint8_t>(c + g.count);
    }
  }
}

FrameSolver::Node FrameSolver::root(const BufferState& buffers_before_arrivals,
                                    std::span<const long long> deficits) const {
  std::vector<double> w(deficits.begin(), deficits.end());
  Decoded node = decode(node_from(0, buffers_before_arrivals, w).packed);
  add_arrivals(node, 0);
  return Node{encode(node)};
}

FrameSolver::Node FrameSolver::node_from(int slot, const BufferState& buffers,
                                         std::span<const double> deficits) const {
  if (slot < 0 || slot >= frame_length()) throw Error(ErrorCode::InvalidArgument, "slot outside the frame");
  if (buffers.link_count() != links_ || static_cast<int>(deficits.size()) != links_) {
    throw Error(ErrorCode::InvalidArgument, "state does not match the link count");
  }
  Decoded node;
  node.slot = slot;
  std::fill(node.counts.begin(), node.counts.begin() + links_ * d_max_, std::uint8_t{0});
  const int cap = (1 << count_bits_) - 1;
  for (int l = 0; l < links_; ++l) {
    for (const auto& p : buffers.packets(l)) {
      if (p.remaining_deadline > d_max_) throw Error(ErrorCode::StateSpaceExceeded, "deadline above the oracle limit");
      auto& c = node.counts[l * d_max_ + (p.remaining_deadline - 1)];
      if (c + 1 > cap) throw Error(ErrorCode::StateSpaceExceeded, "buffer occupancy above oracle limit");
      ++c;
    }
    const double w = deficits[l];
    const long long rounded = std::llround(w);
    if (std::abs(w - static_cast<double>(rounded)) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "frame oracle needs integral deficits (coin-toss admission)");
    }
    node.deficits[l] = rounded;
  }
  return Node{encode(node)};
}

LinkSet FrameSolver::nonempty(const Decoded& node) const {
  LinkSet out;
  for (int l = 0; l < links_; ++l)
    for (int r = 0; r < d_max_; ++r)
      if (node.counts[l * d_max_ + r] > 0) {
        out.insert(l);
        break;
      }
  return out;
}

const std::vector<LinkSet>& FrameSolver::candidates(LinkSet nonempty) {
  const auto index = static_cast<std::size_t>(nonempty.bits());
  auto& list = candidate_cache_[index];
  if (candidate_ready_[index]) return list;
  // Maximal schedules first so that ties resolve towards them, then every
  // other valid (independent) subset, idling last.
  list = active_schedules(family_, nonempty);
  std::vector<LinkSet> rest;
  for (std::uint64_t sub = nonempty.bits();; sub = (sub - 1) & nonempty.bits()) {
    const LinkSet s(sub);
    if (!s.empty() && is_independent(*graph_, s) && std::find(list.begin(), list.end(), s) == list.end())
      rest.push_back(s);
    if (sub == 0) break;
  }
  std::sort(rest.begin(), rest.end(), LexLess{});
  list.insert(list.end(), rest.begin(), rest.end());
  list.push_back(LinkSet{});
  candidate_ready_[index] = 1;
  return list;
}

const std::vector<FrameSolver::Outcome>& FrameSolver::outcomes(int slot, LinkSet schedule) {
  const std::size_t index = (static_cast<std::size_t>(slot) << links_) | static_cast<std::size_t>(schedule.bits());
  auto& out = outcome_cache_[index];
  if (outcome_ready_[index]) return out;
  out.clear();
  const auto& q = slots_[slot].state.success_probs;
  const std::uint64_t bits = schedule.bits();
  for (std::uint64_t sub = bits;; sub = (sub - 1) & bits) {
    double p = 1.0;
    for (int l : schedule) p *= ((sub >> l) & 1U) ? q[l] : 1.0 - q[l];
    if (p > 0.0) out.push_back({p, LinkSet(sub)});
    if (sub == 0) break;
  }
  outcome_ready_[index] = 1;
  return out;
}

std::uint64_t FrameSolver::advance(const Decoded& node, LinkSet served, double& gain) const {
  Decoded next;
  gain = 0.0;
  const auto& increments = slots_[node.slot].deficit_arrivals;
  for (int l = 0; l < links_; ++l) {
    const std::uint8_t* in = &node.counts[l * d_max_];
    std::uint8_t* out = &next.counts[l * d_max_];
    long long w = node.deficits[l] + increments[l];
    int served_at = -1;
    if (served.contains(l)) {
      gain += static_cast<double>(node.deficits[l]);
      for (int r = 0; r < d_max_; ++r)
        if (in[r] > 0) {
          served_at = r;
          break;
        }
      w -= 1;
    }
    next.deficits[l] = std::max(w, 0LL);
    // Aging: remaining deadline r + 1 becomes r; r = 1 expires.
    for (int r = 0; r + 1 < d_max_; ++r) {
      out[r] = static_cast<std::uint8_t>(in[r + 1] - (served_at == r + 1 ? 1 : 0));
    }
    out[d_max_ - 1] = 0;
  }
  next.slot = node.slot + 1;
  if (next.slot < frame_length()) add_arrivals(next, next.slot);
  return encode(next);
}

void FrameSolver::check_budget() const {
  if (states() > limits_.max_states) {
    throw Error(ErrorCode::StateSpaceExceeded, "frame oracle exceeded " + std::to_string(limits_.max_states) + " states");
  }
}

FrameSolver::Result FrameSolver::solve(std::uint64_t packed) {
  const Decoded node = decode(packed);
  if (node.slot >= frame_length()) return {0.0, LinkSet{}};
  if (memoize_) {
    if (const auto* hit = memo_.find(packed)) return {hit->value, hit->best};
  } else {
    ++unmemoized_nodes_;
  }
  check_budget();

  Result best{-std::numeric_limits<double>::infinity(), LinkSet{}};
  const auto& actions = candidates(nonempty(node));
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const LinkSet m = actions[a];
    double total = 0.0;
    const auto& outs = outcomes(node.slot, m);
    for (std::size_t o = 0; o < outs.size(); ++o) {
      const Outcome outcome = outs[o];
      double gain = 0.0;
      const std::uint64_t next = advance(node, m & outcome.on, gain);
      total += outcome.probability * (gain + solve(next).value);
    }
    if (total > best.value + kTieTol) best = {total, m};
  }
  if (memoize_) memo_.insert(packed, best.value, best.best);
  return best;
}

double FrameSolver::value(Node node) { return solve(node.packed).value; }

LinkSet FrameSolver::best_action(Node node) { return solve(node.packed).best; }

BufferState FrameSolver::to_buffers(const Decoded& node) const {
  BufferState buffers(links_);
  for (int l = 0; l < links_; ++l)
    for (int r = 0; r < d_max_; ++r)
      for (int i = 0; i < node.counts[l * d_max_ + r]; ++i) buffers.push(l, r + 1, 0);
  return buffers;
}

double FrameSolver::evaluate(Node node, const Policy& policy) { return evaluate_packed(node.packed, policy); }

double FrameSolver::evaluate_packed(std::uint64_t packed, const Policy& policy) {
  const Decoded node = decode(packed);
  if (node.slot >= frame_length()) return 0.0;
  if (const auto* hit = policy_memo_.find(packed)) return hit->value;
  check_budget();

  const BufferState buffers = to_buffers(node);
  const std::vector<double> w(node.deficits.begin(), node.deficits.begin() + links_);
  SlotView view;
  view.graph = graph_;
  view.buffers = &buffers;
  view.deficits = w;
  view.success_probs = slots_[node.slot].state.success_probs;
  view.slot = static_cast<std::uint64_t>(node.slot);

  const LinkSet busy = nonempty(node);
  std::vector<ScheduleChoice> choices;
  if (busy.empty()) {
    choices.push_back({LinkSet{}, 1.0});
  } else {
    choices = policy.distribution(view);
  }
  double total = 0.0;
  for (const auto& choice : choices) {
    if (!is_valid_schedule(*graph_, choice.schedule, busy)) {
      throw Error(ErrorCode::ScheduleInvalid, policy.name() + " proposed an invalid schedule");
    }
    if (choice.probability <= 0.0) continue;
    const auto outs = outcomes(node.slot, choice.schedule);
    for (const auto& o : outs) {
      double gain = 0.0;
      const std::uint64_t next = advance(node, choice.schedule & o.on, gain);
      total += choice.probability * o.probability * (gain + evaluate_packed(next, policy));
    }
  }
  policy_memo_.insert(packed, total, LinkSet{});
  return total;
}

FrameResult frame_optimal_gain(const FrameProblem& problem, const OracleLimits& limits, bool memoize) {
  FrameSolver solver(*problem.graph, problem.slots, problem.initial_deficits, limits, memoize);
  const auto root = solver.root(problem.initial_buffers, problem.initial_deficits);
  FrameResult result;
  result.expected_gain = solver.value(root);
  result.first_schedule = solver.best_action(root);
  result.states = solver.states();
  return result;
}

double evaluate_policy_gain(const FrameProblem& problem, const Policy& policy, const OracleLimits& limits) {
  FrameSolver solver(*problem.graph, problem.slots, problem.initial_deficits, limits);
  return solver.evaluate(solver.root(problem.initial_buffers, problem.initial_deficits), policy);
}

// ---------------------------------------------------------------------------

FrameOptimalPolicy::FrameOptimalPolicy(const InterferenceGraph& graph, const PolicyParams& params)
    : params_(params) {
  if (params_.frame_cycles < 1) throw Error(ErrorCode::InvalidArgument, "frame needs at least one cycle");
  if (graph.link_count() > params_.oracle.max_links) {
    throw Error(ErrorCode::StateSpaceExceeded, "frame-optimal handles at most " +
                                                   std::to_string(params_.oracle.max_links) + " links");
  }
}

void FrameOptimalPolicy::start_frame(const SlotView& view) const {
  Lookahead* ahead = view.lookahead;
  if (ahead == nullptr) throw Error(ErrorCode::LookaheadUnavailable, "frame-optimal needs the upcoming pattern");
  if (ahead->admission() != AdmissionMode::CoinToss) {
    throw Error(ErrorCode::PolicyIncompatible, "frame-optimal needs coin-toss deficit admission");
  }
  const auto& chain = ahead->chain();
  const int anchor = params_.frame_anchor >= 0 ? params_.frame_anchor : chain.frame_anchor();

  const std::uint64_t start = view.slot;
  std::uint64_t last_return = start;
  int returns = 0;
  std::uint64_t u = start;
  for (;; ++u) {
    if (ahead->at(u).state == anchor) {
      last_return = u;
      if (++returns == params_.frame_cycles) break;
    }
    if (u - last_return > params_.max_return_time) {
      throw Error(ErrorCode::StateSpaceExceeded,
                  "chain did not return to the anchor state within " +
                      std::to_string(params_.max_return_time) + " slots (slot " + std::to_string(u) + ")");
    }
  }
  const std::uint64_t length = u - start + 1;
  if (length > static_cast<std::uint64_t>(params_.oracle.max_frame)) {
    throw Error(ErrorCode::StateSpaceExceeded, "realized frame of " + std::to_string(length) +
                                                   " slots exceeds the oracle limit of " +
                                                   std::to_string(params_.oracle.max_frame));
  }

  std::vector<FrameSlot> slots;
  for (std::uint64_t s = start; s <= u; ++s) {
    const auto& ahead_slot = ahead->at(s);
    FrameSlot fs;
    fs.state = chain.state(static_cast<std::size_t>(ahead_slot.state));
    for (double a : ahead_slot.deficit_arrivals) fs.deficit_arrivals.push_back(static_cast<int>(std::llround(a)));
    slots.push_back(std::move(fs));
  }
  std::vector<long long> base;
  for (double w : view.deficits) base.push_back(std::llround(w));

  if (!solver_) solver_ = std::make_unique<FrameSolver>(*view.graph, params_.oracle);
  solver_->reset(std::move(slots), std::move(base));
  frame_start_ = start;
  frame_end_ = u;
  started_ = true;
  ++stats_.frames;
}

LinkSet FrameOptimalPolicy::choose(const SlotView& view) const {
  if (!started_ || view.slot > frame_end_) start_frame(view);
  const auto node = solver_->node_from(static_cast<int>(view.slot - frame_start_), *view.buffers, view.deficits);
  const LinkSet action = solver_->best_action(node);
  stats_.max_frame_states = std::max<std::uint64_t>(stats_.max_frame_states, solver_->states());
  return action;
}

LinkSet FrameOptimalPolicy::decide(const SlotView& view, Rng&) { return choose(view); }

std::vector<ScheduleChoice> FrameOptimalPolicy::distribution(const SlotView& view) const {
  return {{choose(view), 1.0}};
}

bool FrameOptimalPolicy::clears_buffers_after(std::uint64_t slot) const {
  return started_ && slot == frame_end_;
}

}  // namespace rts
