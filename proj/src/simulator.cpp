#include "rtsched/simulator.hpp"

#include <algorithm>
#include <string>

#include "rtsched/error.hpp"

namespace rts {

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Observe: return "observe";
    case Phase::Admit: return "admit";
    case Phase::Decide: return "decide";
    case Phase::SampleChannels: return "sample-channels";
    case Phase::Apply: return "apply";
    case Phase::UpdateDeficits: return "update-deficits";
    case Phase::Age: return "age";
    case Phase::FrameClear: return "frame-clear";
    case Phase::Advance: return "advance";
  }
  return "?";
}

Simulator::Simulator(SimulationSetup setup, Policy& policy)
    : setup_(std::move(setup)),
      policy_(&policy),
      chain_rng_(setup_.seed, Stream::Chain),
      admission_rng_(setup_.seed, Stream::Admission),
      channel_rng_(setup_.seed, Stream::Channel),
      policy_rng_(setup_.seed, Stream::Policy) {
  if (setup_.graph == nullptr || setup_.chain == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "simulation needs a graph and a chain");
  }
  const int links = setup_.graph->link_count();
  if (setup_.chain->link_count() != links) {
    throw Error(ErrorCode::InvalidArgument, "chain has " + std::to_string(setup_.chain->link_count()) +
                                                " links but the graph has " + std::to_string(links));
  }
  if (static_cast<int>(setup_.target_ratios.size()) != links) {
    throw Error(ErrorCode::InvalidArgument, "need one target delivery ratio per link");
  }
  for (double p : setup_.target_ratios) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "target delivery ratios must lie in [0, 1]");
  }
  buffers_ = BufferState(links);
  deficits_.assign(static_cast<std::size_t>(links), 0.0);
  metrics_ = RunMetrics(links, setup_.horizon, setup_.series_stride);
}

const Lookahead::Slot& Simulator::at(std::uint64_t slot) {
  if (slot < upcoming_base_) throw Error(ErrorCode::InvalidArgument, "lookahead into the past");
  while (upcoming_base_ + upcoming_.size() <= slot) {
    Slot next;
    if (upcoming_base_ == 0 && upcoming_.empty()) {
      next.state = setup_.chain->initial_state();
    } else {
      const int previous = upcoming_.empty() ? last_state_ : upcoming_.back().state;
      next.state = setup_.chain->step(previous, chain_rng_);
    }
    next.deficit_arrivals = draw_deficit_arrivals(setup_.chain->state(static_cast<std::size_t>(next.state)),
                                                  setup_.admission, setup_.target_ratios, admission_rng_);
    upcoming_.push_back(std::move(next));
  }
  return upcoming_[slot - upcoming_base_];
}

bool Simulator::step() {
  if (slot_ >= setup_.horizon) return false;
  const std::uint64_t t = slot_;

  emit(Phase::Observe);
  const Slot current = at(t);
  const auto& state = setup_.chain->state(static_cast<std::size_t>(current.state));

  emit(Phase::Admit);
  enqueue_arrivals(buffers_, state, t);
  for (int l = 0; l < state.link_count(); ++l) metrics_.arrivals_total[l] += state.arrival_count(l);

  emit(Phase::Decide);
  const LinkSet nonempty = buffers_.nonempty();
  LinkSet schedule;
  if (!nonempty.empty() || policy_->needs_lookahead()) {
    SlotView view;
    view.graph = setup_.graph;
    view.buffers = &buffers_;
    view.deficits = deficits_;
    view.success_probs = state.success_probs;
    view.slot = t;
    view.lookahead = policy_->needs_lookahead() ? this : nullptr;
    try {
      schedule = policy_->decide(view, policy_rng_);
    } catch (const Error& e) {
      throw Error(e.code(), "slot " + std::to_string(t) + ": " + e.what());
    }
  }
  if (!is_valid_schedule(*setup_.graph, schedule, nonempty)) {
    throw Error(ErrorCode::ScheduleInvalid, "slot " + std::to_string(t) + ": " + policy_->name() +
                                                " returned invalid schedule " + schedule.to_string());
  }

  emit(Phase::SampleChannels);
  const LinkSet on = sample_channels(state.success_probs, setup_.channel, channel_rng_);

  emit(Phase::Apply);
  const ServiceOutcome outcome = apply_schedule(buffers_, schedule, on);
  for (int l : schedule) ++metrics_.scheduled_count[l];
  for (int l : outcome.served) ++metrics_.delivered_total[l];
  if (schedule.empty()) ++metrics_.idle_slots;

  emit(Phase::UpdateDeficits);
  update_deficits(deficits_, current.deficit_arrivals, outcome.served);

  emit(Phase::Age);
  const auto expired = age_buffers(buffers_);
  for (std::size_t l = 0; l < expired.size(); ++l) metrics_.expired_total[l] += static_cast<std::uint64_t>(expired[l]);

  if (policy_->clears_buffers_after(t)) {
    emit(Phase::FrameClear);
    std::uint64_t dropped = 0;
    for (int l = 0; l < buffers_.link_count(); ++l) {
      metrics_.dropped_total[l] += static_cast<std::uint64_t>(buffers_.size(l));
      dropped += static_cast<std::uint64_t>(buffers_.size(l));
    }
    buffers_.clear();
    metrics_.max_frame_drop = std::max(metrics_.max_frame_drop, dropped);
  }
  metrics_.record_deficits(t, deficits_);

  emit(Phase::Advance);
  last_state_ = current.state;
  upcoming_.pop_front();
  ++upcoming_base_;
  last_schedule_ = schedule;
  last_channels_ = on;
  ++slot_;
  metrics_.slots_run = slot_;
  return true;
}

const RunMetrics& Simulator::run() {
  while (step()) {
  }
  return metrics_;
}

}  // namespace rts
