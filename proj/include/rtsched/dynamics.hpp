#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rtsched/link_set.hpp"
#include "rtsched/rng.hpp"
#include "rtsched/traffic_fading.hpp"

namespace rts {

struct Packet {
  int link = 0;
  /// Slots left, including the current one.
  int remaining_deadline = 1;
  std::uint64_t arrival_slot = 0;
  std::uint64_t seq = 0;
};

/// Per-link packet buffers Ψ_l(t). Every stored packet has remaining_deadline >= 1.
class BufferState {
 public:
  explicit BufferState(int link_count = 0) : links_(static_cast<std::size_t>(link_count)) {}

  int link_count() const { return static_cast<int>(links_.size()); }
  void push(int link, int deadline, std::uint64_t arrival_slot);
  const std::vector<Packet>& packets(int link) const { return links_[link]; }
  int size(int link) const { return static_cast<int>(links_[link].size()); }
  bool empty(int link) const { return links_[link].empty(); }
  std::size_t total() const;
  LinkSet nonempty() const;
  std::optional<int> earliest_deadline(int link) const;
  /// Removes and returns the earliest-deadline packet (ties: earliest arrival,
  /// then insertion order). The link must be nonempty.
  Packet pop_earliest(int link);
  /// Decrements every deadline and drops packets that reach zero; returns the
  /// number dropped per link.
  std::vector<int> age();
  /// Empties all buffers; returns the number of packets discarded.
  std::size_t clear();

 private:
  std::vector<std::vector<Packet>> links_;
  std::uint64_t next_seq_ = 0;
};

enum class AdmissionMode { Deterministic, CoinToss };

struct ChannelModel {
  enum class Kind { Independent, CommonShock };
  Kind kind = Kind::Independent;
  /// Probability that a slot uses one shared uniform draw for every link.
  double rho = 0.0;
};

/// Deficit increments ã_l for the slot's arrivals: count·p_l (deterministic)
/// or Binomial(count, p_l) (coin toss).
std::vector<double> draw_deficit_arrivals(const TrafficFadingState& state, AdmissionMode mode,
                                          std::span<const double> p, Rng& rng);

/// Puts the slot's arrivals into the buffers.
void enqueue_arrivals(BufferState& buffers, const TrafficFadingState& state, std::uint64_t slot);

/// enqueue_arrivals + draw_deficit_arrivals. Deficits are not touched here;
/// they change only in update_deficits.
std::vector<double> admit_arrivals(BufferState& buffers, const TrafficFadingState& state,
                                   AdmissionMode mode, std::span<const double> p, Rng& rng,
                                   std::uint64_t slot);

/// Channel realization C(t): set of ON links. P[l ON] = q_l in every mode.
LinkSet sample_channels(std::span<const double> success_probs, const ChannelModel& model, Rng& rng);

struct ServiceOutcome {
  /// Links with I_l = 1.
  LinkSet served;
  std::vector<Packet> delivered;
};

/// Transmits the earliest-deadline packet of every scheduled link whose
/// channel is ON. Throws Error{ScheduleInvalid} if a scheduled link is empty.
ServiceOutcome apply_schedule(BufferState& buffers, LinkSet schedule, LinkSet channels_on);

/// w_l <- max(w_l + ã_l - I_l, 0).
void update_deficits(std::vector<double>& deficits, std::span<const double> deficit_arrivals,
                     LinkSet served);

/// Expired packet counts per link after aging.
std::vector<int> age_buffers(BufferState& buffers);

std::optional<int> earliest_deadline(const BufferState& buffers, int link);

/// Counters accumulated over one run.
struct RunMetrics {
  std::uint64_t horizon = 0;
  std::uint64_t slots_run = 0;
  std::vector<std::uint64_t> arrivals_total;
  std::vector<std::uint64_t> delivered_total;
  std::vector<std::uint64_t> expired_total;
  /// Packets discarded at frame ends by framed (non-causal) policies.
  std::vector<std::uint64_t> dropped_total;
  std::vector<std::uint64_t> scheduled_count;
  std::vector<double> deficit_sum;
  /// Deficit sums over the windows [T/2, 3T/4) and [3T/4, T).
  std::vector<double> early_window_sum;
  std::vector<double> late_window_sum;
  std::vector<double> final_deficits;
  std::uint64_t series_stride = 0;
  std::vector<std::uint64_t> series_slots;
  std::vector<std::vector<double>> deficit_series;
  std::uint64_t max_frame_drop = 0;
  std::uint64_t idle_slots = 0;

  RunMetrics() = default;
  RunMetrics(int link_count, std::uint64_t horizon, std::uint64_t series_stride);

  int link_count() const { return static_cast<int>(arrivals_total.size()); }
  /// Records w(t+1) after slot t.
  void record_deficits(std::uint64_t slot, std::span<const double> deficits);
  std::uint64_t early_window_length() const;
  std::uint64_t late_window_length() const;
  double delivery_ratio(int link) const;
  double mean_deficit(int link) const;
  double scheduling_frequency(int link) const;
};

}  // namespace rts
