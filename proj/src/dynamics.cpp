#include "rtsched/dynamics.hpp"

#include <algorithm>
#include <tuple>

#include "rtsched/error.hpp"

namespace rts {

void BufferState::push(int link, int deadline, std::uint64_t arrival_slot) {
  links_[link].push_back(Packet{link, deadline, arrival_slot, next_seq_++});
}

std::size_t BufferState::total() const {
  std::size_t n = 0;
  for (const auto& b : links_) n += b.size();
  return n;
}

LinkSet BufferState::nonempty() const {
  LinkSet out;
  for (int l = 0; l < link_count(); ++l)
    if (!links_[l].empty()) out.insert(l);
  return out;
}

namespace {

auto packet_key(const Packet& p) { return std::tie(p.remaining_deadline, p.arrival_slot, p.seq); }

}  // namespace

std::optional<int> BufferState::earliest_deadline(int link) const {
  const auto& b = links_[link];
  if (b.empty()) return std::nullopt;
  int best = b.front().remaining_deadline;
  for (const auto& p : b) best = std::min(best, p.remaining_deadline);
  return best;
}

Packet BufferState::pop_earliest(int link) {
  auto& b = links_[link];
  auto it = std::min_element(b.begin(), b.end(),
                             [](const Packet& x, const Packet& y) { return packet_key(x) < packet_key(y); });
  Packet p = *it;
  b.erase(it);
  return p;
}

std::vector<int> BufferState::age() {
  std::vector<int> expired(links_.size(), 0);
  for (std::size_t l = 0; l < links_.size(); ++l) {
    auto& b = links_[l];
    for (auto& p : b) --p.remaining_deadline;
    const auto keep = std::remove_if(b.begin(), b.end(), [](const Packet& p) { return p.remaining_deadline <= 0; });
    expired[l] = static_cast<int>(b.end() - keep);
    b.erase(keep, b.end());
  }
  return expired;
}

std::size_t BufferState::clear() {
  const std::size_t n = total();
  for (auto& b : links_) b.clear();
  return n;
}

std::vector<double> draw_deficit_arrivals(const TrafficFadingState& state, AdmissionMode mode,
                                          std::span<const double> p, Rng& rng) {
  const int links = state.link_count();
  std::vector<double> increments(static_cast<std::size_t>(links), 0.0);
  for (int l = 0; l < links; ++l) {
    const int count = state.arrival_count(l);
    if (mode == AdmissionMode::Deterministic) {
      increments[l] = count * p[l];
    } else {
      int heads = 0;
      for (int i = 0; i < count; ++i) heads += rng.bernoulli(p[l]) ? 1 : 0;
      increments[l] = heads;
    }
  }
  return increments;
}

void enqueue_arrivals(BufferState& buffers, const TrafficFadingState& state, std::uint64_t slot) {
  for (int l = 0; l < state.link_count(); ++l)
    for (const auto& g : state.arrivals[l])
      for (int i = 0; i < g.count; ++i) buffers.push(l, g.deadline, slot);
}

std::vector<double> admit_arrivals(BufferState& buffers, const TrafficFadingState& state,
                                   AdmissionMode mode, std::span<const double> p, Rng& rng,
                                   std::uint64_t slot) {
  enqueue_arrivals(buffers, state, slot);
  return draw_deficit_arrivals(state, mode, p, rng);
}

LinkSet sample_channels(std::span<const double> success_probs, const ChannelModel& model, Rng& rng) {
  LinkSet on;
  const bool shared = model.kind == ChannelModel::Kind::CommonShock && rng.bernoulli(model.rho);
  const double common = shared ? rng.uniform() : 0.0;
  for (std::size_t l = 0; l < success_probs.size(); ++l) {
    const double u = shared ? common : rng.uniform();
    if (u < success_probs[l]) on.insert(static_cast<int>(l));
  }
  return on;
}

ServiceOutcome apply_schedule(BufferState& buffers, LinkSet schedule, LinkSet channels_on) {
  for (int l : schedule) {
    if (l >= buffers.link_count() || buffers.empty(l)) {
      throw Error(ErrorCode::ScheduleInvalid, "scheduled link " + std::to_string(l) + " has no packet");
    }
  }
  ServiceOutcome out;
  for (int l : schedule & channels_on) {
    out.delivered.push_back(buffers.pop_earliest(l));
    out.served.insert(l);
  }
  return out;
}

void update_deficits(std::vector<double>& deficits, std::span<const double> deficit_arrivals,
                     LinkSet served) {
  for (std::size_t l = 0; l < deficits.size(); ++l) {
    const double next = deficits[l] + deficit_arrivals[l] - (served.contains(static_cast<int>(l)) ? 1.0 : 0.0);
    deficits[l] = std::max(next, 0.0);
  }
}

std::vector<int> age_buffers(BufferState& buffers) { return buffers.age(); }

std::optional<int> earliest_deadline(const BufferState& buffers, int link) {
  return buffers.earliest_deadline(link);
}

RunMetrics::RunMetrics(int link_count, std::uint64_t horizon_slots, std::uint64_t stride)
    : horizon(horizon_slots), series_stride(stride) {
  const auto n = static_cast<std::size_t>(link_count);
  arrivals_total.assign(n, 0);
  delivered_total.assign(n, 0);
  expired_total.assign(n, 0);
  dropped_total.assign(n, 0);
  scheduled_count.assign(n, 0);
  deficit_sum.assign(n, 0.0);
  early_window_sum.assign(n, 0.0);
  late_window_sum.assign(n, 0.0);
  final_deficits.assign(n, 0.0);
}

void RunMetrics::record_deficits(std::uint64_t slot, std::span<const double> deficits) {
  const std::uint64_t half = horizon / 2;
  const std::uint64_t three_quarters = (3 * horizon) / 4;
  for (std::size_t l = 0; l < deficits.size(); ++l) {
    deficit_sum[l] += deficits[l];
    if (slot >= half && slot < three_quarters) {
      early_window_sum[l] += deficits[l];
    } else if (slot >= three_quarters && slot < horizon) {
      late_window_sum[l] += deficits[l];
    }
  }
  final_deficits.assign(deficits.begin(), deficits.end());
  if (series_stride > 0 && slot % series_stride == 0) {
    series_slots.push_back(slot);
    deficit_series.emplace_back(deficits.begin(), deficits.end());
  }
}

std::uint64_t RunMetrics::early_window_length() const { return (3 * horizon) / 4 - horizon / 2; }
std::uint64_t RunMetrics::late_window_length() const { return horizon - (3 * horizon) / 4; }

double RunMetrics::delivery_ratio(int link) const {
  if (arrivals_total[link] == 0) return 1.0;
  return static_cast<double>(delivered_total[link]) / static_cast<double>(arrivals_total[link]);
}

double RunMetrics::mean_deficit(int link) const {
  return slots_run == 0 ? 0.0 : deficit_sum[link] / static_cast<double>(slots_run);
}

double RunMetrics::scheduling_frequency(int link) const {
  return slots_run == 0 ? 0.0 : static_cast<double>(scheduled_count[link]) / static_cast<double>(slots_run);
}

}  // namespace rts
