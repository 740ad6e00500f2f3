#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "rtsched/dynamics.hpp"
#include "rtsched/interference.hpp"
#include "rtsched/policies.hpp"
#include "rtsched/rng.hpp"
#include "rtsched/traffic_fading.hpp"

namespace rts {

struct SimulationSetup {
  const InterferenceGraph* graph = nullptr;
  const TrafficFadingChain* chain = nullptr;
  /// Target delivery ratios p_l.
  std::vector<double> target_ratios;
  AdmissionMode admission = AdmissionMode::CoinToss;
  ChannelModel channel;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  /// Keep every n-th deficit vector in the metrics (0 = none).
  std::uint64_t series_stride = 0;
};

/// Pipeline stages of one slot, in execution order.
enum class Phase {
  Observe,
  Admit,
  Decide,
  SampleChannels,
  Apply,
  UpdateDeficits,
  Age,
  FrameClear,
  Advance,
};

const char* phase_name(Phase phase);

/// Slot-synchronous simulation of one policy. Chain states and deficit
/// increments are drawn ahead of time into a queue, in slot order and from
/// their own streams, so peeking ahead (only granted to policies that ask for
/// it) never changes what happens.
class Simulator final : public Lookahead {
 public:
  using TraceHook = std::function<void(Phase, std::uint64_t slot)>;

  Simulator(SimulationSetup setup, Policy& policy);

  void set_trace(TraceHook hook) { trace_ = std::move(hook); }

  /// Runs slot `slot()`; false once the horizon is reached.
  bool step();
  /// Runs the remaining slots and returns the metrics.
  const RunMetrics& run();

  std::uint64_t slot() const { return slot_; }
  const BufferState& buffers() const { return buffers_; }
  const std::vector<double>& deficits() const { return deficits_; }
  const RunMetrics& metrics() const { return metrics_; }
  /// Schedule and channel realization of the last completed slot.
  LinkSet last_schedule() const { return last_schedule_; }
  LinkSet last_channels() const { return last_channels_; }

  const Slot& at(std::uint64_t slot) override;
  const TrafficFadingChain& chain() const override { return *setup_.chain; }
  AdmissionMode admission() const override { return setup_.admission; }

 private:
  void emit(Phase phase) const {
    if (trace_) trace_(phase, slot_);
  }

  SimulationSetup setup_;
  Policy* policy_;
  Rng chain_rng_;
  Rng admission_rng_;
  Rng channel_rng_;
  Rng policy_rng_;
  BufferState buffers_;
  std::vector<double> deficits_;
  RunMetrics metrics_;
  std::deque<Slot> upcoming_;
  /// Slot index of upcoming_.front().
  std::uint64_t upcoming_base_ = 0;
  /// Chain state of the last completed slot.
  int last_state_ = 0;
  std::uint64_t slot_ = 0;
  LinkSet last_schedule_;
  LinkSet last_channels_;
  TraceHook trace_;
};

}  // namespace rts
