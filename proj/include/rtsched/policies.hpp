#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtsched/dynamics.hpp"
#include "rtsched/interference.hpp"
#include "rtsched/link_set.hpp"
#include "rtsched/rng.hpp"
#include "rtsched/traffic_fading.hpp"

namespace rts {

/// Future chain states and deficit increments, pre-sampled by the simulator.
/// Only handed to policies that ask for it (the non-causal frame oracle).
class Lookahead {
 public:
  struct Slot {
    int state = 0;
    std::vector<double> deficit_arrivals;
  };

  virtual ~Lookahead() = default;
  /// Slot `slot` (>= the current slot), sampling further ahead if needed.
  virtual const Slot& at(std::uint64_t slot) = 0;
  virtual const TrafficFadingChain& chain() const = 0;
  virtual AdmissionMode admission() const = 0;
};

/// Everything a policy may observe when deciding slot t. Channel outcomes of
/// slot t are deliberately absent.
struct SlotView {
  const InterferenceGraph* graph = nullptr;
  const BufferState* buffers = nullptr;
  std::span<const double> deficits;
  std::span<const double> success_probs;
  std::uint64_t slot = 0;
  Lookahead* lookahead = nullptr;

  LinkSet nonempty() const { return buffers->nonempty(); }
};

/// Σ_{l∈M} w_l q_l, summed in ascending link order.
double schedule_weight(LinkSet schedule, std::span<const double> deficits,
                       std::span<const double> success_probs);

struct WeightedSchedule {
  LinkSet schedule;
  double weight = 0.0;
};

struct ScheduleChoice {
  LinkSet schedule;
  double probability = 0.0;
};

/// Randomized selection over maximal schedules, sorted by weight descending
/// (ties in canonical order). Entries past `support_size` have probability 0.
struct ScheduleDistribution {
  struct Entry {
    LinkSet schedule;
    double weight = 0.0;
    double probability = 0.0;
  };
  std::vector<Entry> entries;
  int support_size = 0;

  double expected_weight() const;
  double probability_sum() const;
};

/// {D ∩ B : D ∈ family} without empty sets or duplicates, in canonical order.
std::vector<LinkSet> active_schedules(std::span<const LinkSet> family, LinkSet nonempty);

/// Max-weight schedule; ties go to the canonically first schedule.
/// Throws Error{NoSchedule} when `schedules` is empty.
LinkSet mws_select(std::span<const LinkSet> schedules, std::span<const double> deficits,
                   std::span<const double> success_probs);

/// Greedy maximal scheduling by decreasing w_l q_l (ties: lowest index).
LinkSet gms_select(const InterferenceGraph& graph, LinkSet nonempty,
                   std::span<const double> deficits, std::span<const double> success_probs);

enum class NStarSearch { Linear, Binary };

/// (n-1) / Σ_{i<n} 1/W_i over the n largest weights (sorted descending).
double subharmonic_average(std::span<const double> sorted_weights, int n);

/// Largest n whose subharmonic probabilities are all nonnegative.
int find_support_size(std::span<const double> sorted_positive_weights, NStarSearch search);

/// Subharmonic randomization over maximal schedules. Zero-weight schedules
/// never receive probability. Throws Error{AllWeightsZero} if no weight is
/// positive and Error{NoSchedule} if `schedules` is empty.
ScheduleDistribution famix_ms_distribution(std::span<const LinkSet> schedules,
                                           std::span<const double> deficits,
                                           std::span<const double> success_probs,
                                           NStarSearch search = NStarSearch::Linear);

/// Same randomization restricted to {D ∩ B : D ∈ restricted_family}.
ScheduleDistribution famix_restricted_distribution(std::span<const LinkSet> restricted_family,
                                                   LinkSet nonempty,
                                                   std::span<const double> deficits,
                                                   std::span<const double> success_probs,
                                                   NStarSearch search = NStarSearch::Linear);

struct NdLink {
  int link = 0;
  double deficit = 0.0;
  int earliest_deadline = 0;
};

/// `a` dominates `b` when it is at least as urgent and has at least the
/// deficit. Exact duplicates are resolved in favour of the lower index.
bool dominates(const NdLink& a, const NdLink& b);

/// Non-dominated links by repeatedly taking the largest-deficit candidate
/// (ties: earlier deadline, then lower index) and discarding whatever it
/// dominates. Result is ordered by deficit, strictly decreasing.
std::vector<NdLink> non_dominated_links(std::vector<NdLink> candidates);

/// π_i = min{(1/q)(1 - w_{i+1}/w_i), 1 - Σ_{j<i} π_j} with w_{n+1} = 0.
std::vector<double> famix_nd_probabilities(std::span<const double> sorted_deficits, double q);

struct LinkChoice {
  int link = 0;
  double probability = 0.0;
};

/// Collocated randomization over the non-dominated nonempty links with a
/// common success probability q. Throws Error{ZeroQ} when q == 0 and
/// Error{NoSchedule} when every buffer is empty.
std::vector<LinkChoice> famix_nd_distribution(const BufferState& buffers,
                                              std::span<const double> deficits, double q);

/// Timer-based distributed selection: exponential timers, contention window
/// T_C = max_l(-log δ / ν_l), a link joins iff its timer fires inside the
/// window before any neighbour joined.
LinkSet myopic_sample(const InterferenceGraph& graph, LinkSet nonempty, std::span<const double> rates,
                      double delta, Rng& rng);

/// Exact law of myopic_sample for equal timer rates (each link misses the
/// window independently with probability δ, the rest fire in uniformly
/// random order). Limited to 10 nonempty links.
std::vector<ScheduleChoice> myopic_distribution(const InterferenceGraph& graph, LinkSet nonempty,
                                                double delta);

/// Picks from `choices` using one uniform draw.
LinkSet sample_choice(std::span<const ScheduleChoice> choices, Rng& rng);

enum class ColoringOrder { Degree, Natural };

struct OracleLimits {
  int max_links = 3;
  int max_frame = 8;
  int max_deadline = 3;
  int max_arrivals = 1;
  std::size_t max_states = 10'000'000;
};

struct PolicyParams {
  double delta = 0.01;
  /// Timer rates; empty means 1.0 for every link.
  std::vector<double> timer_rates;
  ColoringOrder coloring_order = ColoringOrder::Degree;
  NStarSearch nstar_search = NStarSearch::Linear;
  /// FAMIX-ND with unequal q: use q_min instead of failing.
  bool allow_qmin = true;
  int enumeration_cap = kDefaultEnumerationCap;
  int frame_cycles = 2;
  /// Frame anchor state; -1 means the chain's preferred anchor.
  int frame_anchor = -1;
  std::uint64_t max_return_time = 10'000;
  OracleLimits oracle;
};

/// Decision-side events worth reporting with run results.
struct PolicyStats {
  std::uint64_t uniform_fallbacks = 0;
  std::uint64_t qmin_substitutions = 0;
  std::uint64_t zero_q_idles = 0;
  std::uint64_t frames = 0;
  std::uint64_t max_frame_states = 0;
};

/// A Markov scheduling policy: state in, schedule out.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual LinkSet decide(const SlotView& view, Rng& rng) = 0;
  /// Exact distribution of decide() for this view.
  virtual std::vector<ScheduleChoice> distribution(const SlotView& view) const = 0;
  virtual bool needs_lookahead() const { return false; }
  /// Framed policies drop all buffered packets after their frame's last slot.
  virtual bool clears_buffers_after(std::uint64_t /*slot*/) const { return false; }
  const PolicyStats& stats() const { return stats_; }

 protected:
  mutable PolicyStats stats_;
};

class MwsPolicy final : public Policy {
 public:
  MwsPolicy(const InterferenceGraph& graph, const PolicyParams& params);
  std::string name() const override { return "mws"; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;

 private:
  std::vector<LinkSet> family_;
};

class GmsPolicy final : public Policy {
 public:
  std::string name() const override { return "gms"; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;
};

/// FAMIX over a fixed family of maximal independent sets: the full family
/// ("famix-ms") or the extended color classes ("famix-coloring").
class FamixMsPolicy final : public Policy {
 public:
  FamixMsPolicy(std::string name, std::vector<LinkSet> family, NStarSearch search);
  static std::unique_ptr<FamixMsPolicy> full(const InterferenceGraph& graph, const PolicyParams& params);
  static std::unique_ptr<FamixMsPolicy> coloring(const InterferenceGraph& graph, const PolicyParams& params);

  std::string name() const override { return name_; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;
  const std::vector<LinkSet>& family() const { return family_; }

 private:
  std::string name_;
  std::vector<LinkSet> family_;
  NStarSearch search_;
};

class FamixNdPolicy final : public Policy {
 public:
  FamixNdPolicy(const InterferenceGraph& graph, const PolicyParams& params);
  std::string name() const override { return "famix-nd"; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;

 private:
  bool allow_qmin_;
};

class MyopicPolicy final : public Policy {
 public:
  MyopicPolicy(const InterferenceGraph& graph, const PolicyParams& params);
  std::string name() const override { return "myopic"; }
  LinkSet decide(const SlotView& view, Rng& rng) override;
  /// Exact only for equal timer rates; throws Error{PolicyIncompatible} otherwise.
  std::vector<ScheduleChoice> distribution(const SlotView& view) const override;

 private:
  std::vector<double> rates_;
  double delta_;
};

}  // namespace rts
