#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rtsched/dynamics.hpp"
#include "rtsched/interference.hpp"
#include "rtsched/policies.hpp"

namespace rts {

/// Exhaustive max-weight reference: scores {D ∩ B} for every maximal
/// independent set D found by scanning all 2^K subsets. Same tie rule as
/// mws_select. K is limited to 12.
LinkSet brute_force_mws(const InterferenceGraph& graph, LinkSet nonempty,
                        std::span<const double> deficits, std::span<const double> success_probs);

/// One slot of a known traffic-fading pattern with its (pre-drawn, integral)
/// deficit increments.
struct FrameSlot {
  TrafficFadingState state;
  std::vector<int> deficit_arrivals;
};

struct FrameProblem {
  const InterferenceGraph* graph = nullptr;
  std::vector<FrameSlot> slots;
  /// Buffers before the first slot's arrivals.
  BufferState initial_buffers;
  std::vector<long long> initial_deficits;
};

struct FrameResult {
  double expected_gain = 0.0;
  LinkSet first_schedule;
  std::size_t states = 0;
};

/// Open-addressing map from packed node keys to a value and a schedule. Kept
/// across frames so its storage is reused.
class StateTable {
 public:
  struct Entry {
    std::uint64_t key = 0;
    double value = 0.0;
    LinkSet best;
  };

  const Entry* find(std::uint64_t key) const;
  void insert(std::uint64_t key, double value, LinkSet best);
  void clear();
  std::size_t size() const { return size_; }

 private:
  std::size_t slot_for(std::uint64_t key) const;
  void grow();

  std::vector<Entry> entries_;
  std::vector<std::uint8_t> used_;
  std::size_t size_ = 0;
};

/// Expectimax over one frame with the traffic pattern known and channel
/// outcomes unknown: at each slot maximize over valid schedules the expected
/// immediate gain Σ_{l∈M} C_l w_l plus the optimal continuation. Packets left at
/// the end of the frame are worthless. Deficits follow the positive-part
/// update with I from the realized channels.
///
/// Nodes are packed into 64 bits: slot, per-link counts of packets by
/// remaining deadline, and deficits relative to the frame's starting deficits.
class FrameSolver {
 public:
  struct Node {
    std::uint64_t packed = 0;
  };

  FrameSolver(const InterferenceGraph& graph, const OracleLimits& limits, bool memoize = true);
  FrameSolver(const InterferenceGraph& graph, std::vector<FrameSlot> slots,
              std::vector<long long> base_deficits, const OracleLimits& limits, bool memoize = true);

  /// Starts a new frame problem. Caches that depend only on the graph survive.
  void reset(std::vector<FrameSlot> slots, std::vector<long long> base_deficits);

  /// Node for slot 0 from buffers before that slot's arrivals.
  Node root(const BufferState& buffers_before_arrivals, std::span<const long long> deficits) const;
  /// Node for `slot` from buffers that already hold that slot's arrivals.
  Node node_from(int slot, const BufferState& buffers, std::span<const double> deficits) const;

  double value(Node node);
  LinkSet best_action(Node node);
  /// Exact expected frame gain of a causal policy (channels independent).
  double evaluate(Node node, const Policy& policy);

  int frame_length() const { return static_cast<int>(slots_.size()); }
  std::size_t states() const { return memo_.size() + policy_memo_.size() + unmemoized_nodes_; }

 private:
  static constexpr int kMaxLinks = 16;
  static constexpr int kMaxCells = 64;

  struct Decoded {
    int slot = 0;
    std::array<std::uint8_t, kMaxCells> counts;
    std::array<long long, kMaxLinks> deficits;
  };
  struct Outcome {
    double probability;
    LinkSet on;
  };
  struct Result {
    double value;
    LinkSet best;
  };

  Result solve(std::uint64_t packed);
  double evaluate_packed(std::uint64_t packed, const Policy& policy);
  Decoded decode(std::uint64_t packed) const;
  std::uint64_t encode(const Decoded& node) const;
  LinkSet nonempty(const Decoded& node) const;
  const std::vector<LinkSet>& candidates(LinkSet nonempty);
  const std::vector<Outcome>& outcomes(int slot, LinkSet schedule);
  /// Serves, updates deficits, ages, then admits the next slot's arrivals.
  std::uint64_t advance(const Decoded& node, LinkSet served, double& gain) const;
  void add_arrivals(Decoded& node, int slot) const;
  BufferState to_buffers(const Decoded& node) const;
  void check_budget() const;

  const InterferenceGraph* graph_;
  OracleLimits limits_;
  bool memoize_;
  int links_;
  int d_max_;
  int count_bits_ = 1;
  int deficit_bits_ = 1;
  long long deficit_bias_ = 0;
  std::vector<FrameSlot> slots_;
  std::vector<long long> base_;
  std::vector<LinkSet> family_;
  std::vector<std::vector<LinkSet>> candidate_cache_;
  std::vector<std::uint8_t> candidate_ready_;
  std::vector<std::vector<Outcome>> outcome_cache_;
  std::vector<std::uint8_t> outcome_ready_;
  StateTable memo_;
  StateTable policy_memo_;
  std::size_t unmemoized_nodes_ = 0;
};

/// Exact optimum of a frame problem and its first-slot schedule.
FrameResult frame_optimal_gain(const FrameProblem& problem, const OracleLimits& limits = {},
                               bool memoize = true);

/// Exact expected gain of `policy` over the frame problem.
double evaluate_policy_gain(const FrameProblem& problem, const Policy& policy,
                            const OracleLimits& limits = {});

/// Non-causal frame policy: at each frame start it reads the whole upcoming
/// pattern (k returns of the chain to the anchor state), solves the frame, and
/// then plays the optimal action for whatever state the realized channels
/// lead to. Buffers are cleared at every frame end.
class FrameOptimalPolicy final : public Policy {
 public:
  FrameOptimalPolicy(const InterferenceGraph& graph, const PolicyParams& params);
  std::string name() const override { return "frame-optimal"; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;
  bool needs_lookahead() const override { return true; }
  bool clears_buffers_after(std::uint64_t slot) const override;

 private:
  LinkSet choose(const SlotView& view) const;
  void start_frame(const SlotView& view) const;

  PolicyParams params_;
  mutable bool started_ = false;
  mutable std::uint64_t frame_start_ = 0;
  mutable std::uint64_t frame_end_ = 0;
  mutable std::unique_ptr<FrameSolver> solver_;
};

}  // namespace rts
