#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtsched/rng.hpp"

namespace rts {

/// `count` packets arriving together with the same deadline.
struct ArrivalGroup {
  int count = 0;
  int deadline = 1;
  bool operator==(const ArrivalGroup&) const = default;
};

/// One state of the joint traffic-and-fading process: per-link arrivals and
/// per-link channel success probabilities for the slot.
struct TrafficFadingState {
  std::vector<std::vector<ArrivalGroup>> arrivals;
  std::vector<double> success_probs;

  int link_count() const { return static_cast<int>(success_probs.size()); }
  int arrival_count(int l) const;
  bool operator==(const TrafficFadingState&) const = default;
};

/// Builds a state with no arrivals and the given success probabilities.
TrafficFadingState quiet_state(std::vector<double> success_probs);

/// Finite Markov chain over TrafficFadingStates. The scheduler only ever sees
/// the current state (arrivals and q); channel outcomes are sampled elsewhere.
class TrafficFadingChain {
 public:
  TrafficFadingChain(std::vector<TrafficFadingState> states,
                     std::vector<std::vector<double>> transition_matrix, int initial_state,
                     int a_max, int d_max);

  std::size_t state_count() const { return states_.size(); }
  int link_count() const { return states_.front().link_count(); }
  const TrafficFadingState& state(std::size_t index) const { return states_[index]; }
  const std::vector<TrafficFadingState>& states() const { return states_; }
  const std::vector<std::vector<double>>& transition_matrix() const { return matrix_; }
  int initial_state() const { return initial_; }
  int a_max() const { return a_max_; }
  int d_max() const { return d_max_; }

  /// Preferred anchor for frame construction (pattern chains anchor at the
  /// last slot of the first pattern so frames never cut a pattern in half).
  int frame_anchor() const { return anchor_.value_or(initial_); }
  void set_frame_anchor(int state);

  /// Samples the successor of `current`.
  int step(int current, Rng& rng) const;

 private:
  std::vector<TrafficFadingState> states_;
  std::vector<std::vector<double>> matrix_;
  int initial_ = 0;
  int a_max_ = 1;
  int d_max_ = 1;
  std::optional<int> anchor_;
};

/// Per-slot tables for a family of deterministic patterns. Within a pattern the
/// chain replays slots in order; at a pattern boundary it moves to another
/// pattern with probability `switch_prob` (uniform among the others), else it
/// restarts the same one.
struct PatternSpec {
  std::vector<std::vector<TrafficFadingState>> patterns;
  double switch_prob = 1.0;
  int a_max = 1;
  int d_max = 1;
};

TrafficFadingChain build_alternating_pattern(const PatternSpec& spec);

inline constexpr std::size_t kDefaultIidStateCap = 4096;

/// Independent Bernoulli arrivals (one packet with `deadline`) per link and
/// fixed success probabilities, encoded as a chain whose rows all equal the
/// product distribution.
TrafficFadingChain build_iid(std::span<const double> arrival_probs, int deadline,
                             std::span<const double> success_probs,
                             std::size_t state_cap = kDefaultIidStateCap);

enum class ChainViolation {
  None,
  RowNotStochastic,
  Reducible,
  LinkNeverServable,
};

struct ValidationReport {
  ChainViolation violation = ChainViolation::None;
  int link = -1;
  int state = -1;
  std::string message;

  bool ok() const { return violation == ChainViolation::None; }
};

/// Checks row-stochasticity, irreducibility and per-link servability: some
/// packet of every link can meet a positive success probability before its
/// deadline.
ValidationReport validate(const TrafficFadingChain& chain);

/// Stationary distribution by power iteration on the lazy chain.
std::vector<double> stationary_distribution(const TrafficFadingChain& chain);

/// Long-run arrival rate of each link under the stationary distribution.
std::vector<double> mean_arrival_rates(const TrafficFadingChain& chain);

}  // namespace rts
