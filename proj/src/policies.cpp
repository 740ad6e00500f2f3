#include "rtsched/policies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rtsched/error.hpp"

namespace rts {

namespace {

constexpr double kFeasibilityTol = 1e-12;

std::vector<ScheduleChoice> point_mass(LinkSet schedule) { return {{schedule, 1.0}}; }

std::vector<ScheduleChoice> uniform_over(std::span<const LinkSet> schedules) {
  std::vector<ScheduleChoice> out;
  const double p = 1.0 / static_cast<double>(schedules.size());
  for (LinkSet s : schedules) out.push_back({s, p});
  return out;
}

std::vector<ScheduleChoice> to_choices(const ScheduleDistribution& dist) {
  std::vector<ScheduleChoice> out;
  for (const auto& e : dist.entries)
    if (e.probability > 0.0) out.push_back({e.schedule, e.probability});
  return out;
}

}  // namespace

double schedule_weight(LinkSet schedule, std::span<const double> deficits,
                       std::span<const double> success_probs) {
  double weight = 0.0;
  for (int l : schedule) weight += deficits[l] * success_probs[l];
  return weight;
}

double ScheduleDistribution::expected_weight() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.probability * e.weight;
  return total;
}

double ScheduleDistribution::probability_sum() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.probability;
  return total;
}

std::vector<LinkSet> active_schedules(std::span<const LinkSet> family, LinkSet nonempty) {
  std::vector<LinkSet> out;
  out.reserve(family.size());
  for (LinkSet d : family) {
    const LinkSet m = d & nonempty;
    if (!m.empty()) out.push_back(m);
  }
  std::sort(out.begin(), out.end(), LexLess{});
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LinkSet mws_select(std::span<const LinkSet> schedules, std::span<const double> deficits,
                   std::span<const double> success_probs) {
  if (schedules.empty()) throw Error(ErrorCode::NoSchedule, "no active schedule to choose from");
  LinkSet best = schedules.front();
  double best_weight = schedule_weight(best, deficits, success_probs);
  for (LinkSet m : schedules.subspan(1)) {
    const double w = schedule_weight(m, deficits, success_probs);
    if (w > best_weight || (w == best_weight && lex_less(m, best))) {
      best = m;
      best_weight = w;
    }
  }
  return best;
}

LinkSet gms_select(const InterferenceGraph& graph, LinkSet nonempty,
                   std::span<const double> deficits, std::span<const double> success_probs) {
  LinkSet remaining = nonempty;
  LinkSet schedule;
  while (!remaining.empty()) {
    int pick = remaining.front();
    double pick_weight = deficits[pick] * success_probs[pick];
    for (int l : remaining) {
      const double w = deficits[l] * success_probs[l];
      if (w > pick_weight) {
        pick = l;
        pick_weight = w;
      }
    }
    schedule.insert(pick);
    remaining -= neighborhood(graph, pick);
  }
  return schedule;
}

double subharmonic_average(std::span<const double> sorted_weights, int n) {
  double reciprocal_sum = 0.0;
  for (int i = 0; i < n; ++i) reciprocal_sum += 1.0 / sorted_weights[i];
  return static_cast<double>(n - 1) / reciprocal_sum;
}

int find_support_size(std::span<const double> sorted_positive_weights, NStarSearch search) {
  const int r = static_cast<int>(sorted_positive_weights.size());
  if (r == 0) throw Error(ErrorCode::AllWeightsZero, "no schedule has positive weight");
  // Probabilities of the n-support sum to one for every n, so n is feasible
  // iff its smallest term 1 - H_n / W_n is nonnegative.
  std::vector<double> reciprocal_prefix(static_cast<std::size_t>(r) + 1, 0.0);
  for (int i = 0; i < r; ++i) reciprocal_prefix[i + 1] = reciprocal_prefix[i] + 1.0 / sorted_positive_weights[i];
  auto feasible = [&](int n) {
    const double h = static_cast<double>(n - 1) / reciprocal_prefix[n];
    return 1.0 - h / sorted_positive_weights[n - 1] >= -kFeasibilityTol;
  };
  if (search == NStarSearch::Linear) {
    int best = 1;
    for (int n = 2; n <= r; ++n)
      if (feasible(n)) best = n;
    return best;
  }
  int lo = 1;
  int hi = r;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

ScheduleDistribution famix_ms_distribution(std::span<const LinkSet> schedules,
                                           std::span<const double> deficits,
                                           std::span<const double> success_probs,
                                           NStarSearch search) {
  if (schedules.empty()) throw Error(ErrorCode::NoSchedule, "no active schedule to choose from");
  ScheduleDistribution dist;
  for (LinkSet m : schedules) dist.entries.push_back({m, schedule_weight(m, deficits, success_probs), 0.0});
  std::sort(dist.entries.begin(), dist.entries.end(),
            [](const auto& a, const auto& b) { return lex_less(a.schedule, b.schedule); });
  std::stable_sort(dist.entries.begin(), dist.entries.end(),
                   [](const auto& a, const auto& b) { return a.weight > b.weight; });

  std::vector<double> positive;
  for (const auto& e : dist.entries)
    if (e.weight > 0.0) positive.push_back(e.weight);
  const int n_star = find_support_size(positive, search);
  const double h = subharmonic_average(positive, n_star);
  for (int i = 0; i < n_star; ++i)
    dist.entries[i].probability = std::max(0.0, 1.0 - h / dist.entries[i].weight);
  dist.support_size = n_star;
  return dist;
}

ScheduleDistribution famix_restricted_distribution(std::span<const LinkSet> restricted_family,
                                                   LinkSet nonempty,
                                                   std::span<const double> deficits,
                                                   std::span<const double> success_probs,
                                                   NStarSearch search) {
  const auto active = active_schedules(restricted_family, nonempty);
  return famix_ms_distribution(active, deficits, success_probs, search);
}

bool dominates(const NdLink& a, const NdLink& b) {
  if (a.link == b.link) return false;
  if (!(a.earliest_deadline <= b.earliest_deadline && a.deficit >= b.deficit)) return false;
  const bool identical = a.earliest_deadline == b.earliest_deadline && a.deficit == b.deficit;
  return !identical || a.link < b.link;
}

std::vector<NdLink> non_dominated_links(std::vector<NdLink> candidates) {
  std::vector<NdLink> chosen;
  while (!candidates.empty()) {
    const auto top = std::min_element(candidates.begin(), candidates.end(), [](const NdLink& a, const NdLink& b) {
      if (a.deficit != b.deficit) return a.deficit > b.deficit;
      if (a.earliest_deadline != b.earliest_deadline) return a.earliest_deadline < b.earliest_deadline;
      return a.link < b.link;
    });
    const NdLink pick = *top;
    chosen.push_back(pick);
    std::erase_if(candidates, [&](const NdLink& c) { return c.link == pick.link || dominates(pick, c); });
  }
  return chosen;
}

std::vector<double> famix_nd_probabilities(std::span<const double> sorted_deficits, double q) {
  const std::size_t n = sorted_deficits.size();
  std::vector<double> pi(n, 0.0);
  double assigned = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double remainder = std::max(0.0, 1.0 - assigned);
    const double next = i + 1 < n ? sorted_deficits[i + 1] : 0.0;
    const double w = sorted_deficits[i];
    const double boosted = w > 0.0 ? (1.0 - next / w) / q : remainder;
    pi[i] = std::min(boosted, remainder);
    assigned += pi[i];
  }
  // The w_{n+1} = 0 term always absorbs the remainder; only rounding is left.
  if (n > 0 && assigned < 1.0) pi.back() += 1.0 - assigned;
  return pi;
}

std::vector<LinkChoice> famix_nd_distribution(const BufferState& buffers,
                                              std::span<const double> deficits, double q) {
  if (!(q > 0.0)) throw Error(ErrorCode::ZeroQ, "success probability is zero; nothing can be delivered");
  std::vector<NdLink> candidates;
  for (int l : buffers.nonempty()) candidates.push_back({l, deficits[l], *buffers.earliest_deadline(l)});
  if (candidates.empty()) throw Error(ErrorCode::NoSchedule, "all buffers are empty");
  const auto nd = non_dominated_links(std::move(candidates));
  std::vector<double> sorted;
  for (const auto& c : nd) sorted.push_back(c.deficit);
  const auto pi = famix_nd_probabilities(sorted, q);
  std::vector<LinkChoice> out;
  for (std::size_t i = 0; i < nd.size(); ++i) out.push_back({nd[i].link, pi[i]});
  return out;
}

LinkSet myopic_sample(const InterferenceGraph& graph, LinkSet nonempty, std::span<const double> rates,
                      double delta, Rng& rng) {
  double window = 0.0;
  for (int l = 0; l < graph.link_count(); ++l) window = std::max(window, -std::log(delta) / rates[l]);
  std::vector<std::pair<double, int>> timers;
  for (int l : nonempty) timers.emplace_back(rng.exponential(rates[l]), l);
  std::sort(timers.begin(), timers.end());
  LinkSet joined;
  for (const auto& [t, l] : timers) {
    if (t >= window) break;
    if (!graph.neighbors(l).intersects(joined)) joined.insert(l);
  }
  return joined;
}

std::vector<ScheduleChoice> myopic_distribution(const InterferenceGraph& graph, LinkSet nonempty,
                                                double delta) {
  if (nonempty.size() > 10) {
    throw Error(ErrorCode::StateSpaceTooLarge, "exact myopic law is limited to 10 nonempty links");
  }
  const std::vector<int> links = nonempty.to_vector();
  const int n = static_cast<int>(links.size());
  std::map<std::uint64_t, double> law;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    std::vector<int> fired;
    for (int i = 0; i < n; ++i)
      if ((code >> i) & 1U) fired.push_back(links[i]);
    const int k = static_cast<int>(fired.size());
    const double p_set = std::pow(1.0 - delta, k) * std::pow(delta, n - k);
    double orders = 1.0;
    for (int i = 2; i <= k; ++i) orders *= i;
    std::sort(fired.begin(), fired.end());
    do {
      LinkSet joined;
      for (int l : fired)
        if (!graph.neighbors(l).intersects(joined)) joined.insert(l);
      law[joined.bits()] += p_set / orders;
    } while (std::next_permutation(fired.begin(), fired.end()));
  }
  std::vector<ScheduleChoice> out;
  for (const auto& [bits, p] : law) out.push_back({LinkSet(bits), p});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return lex_less(a.schedule, b.schedule); });
  return out;
}

LinkSet sample_choice(std::span<const ScheduleChoice> choices, Rng& rng) {
  if (choices.empty()) return {};
  if (choices.size() == 1) return choices.front().schedule;
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : choices) {
    acc += c.probability;
    if (u < acc) return c.schedule;
  }
  for (auto it = choices.rbegin(); it != choices.rend(); ++it)
    if (it->probability > 0.0) return it->schedule;
  return choices.back().schedule;
}

// ---------------------------------------------------------------------------

MwsPolicy::MwsPolicy(const InterferenceGraph& graph, const PolicyParams& params)
    : family_(enumerate_mis(graph, params.enumeration_cap)) {}

std::vector<ScheduleChoice> MwsPolicy::distribution(const SlotView& view) const {
  const auto active = active_schedules(family_, view.nonempty());
  if (active.empty()) return point_mass({});
  return point_mass(mws_select(active, view.deficits, view.success_probs));
}

LinkSet MwsPolicy::decide(const SlotView& view, Rng&) { return distribution(view).front().schedule; }

std::vector<ScheduleChoice> GmsPolicy::distribution(const SlotView& view) const {
  return point_mass(gms_select(*view.graph, view.nonempty(), view.deficits, view.success_probs));
}

LinkSet GmsPolicy::decide(const SlotView& view, Rng&) {
  return gms_select(*view.graph, view.nonempty(), view.deficits, view.success_probs);
}

FamixMsPolicy::FamixMsPolicy(std::string name, std::vector<LinkSet> family, NStarSearch search)
    : name_(std::move(name)), family_(std::move(family)), search_(search) {}

std::unique_ptr<FamixMsPolicy> FamixMsPolicy::full(const InterferenceGraph& graph, const PolicyParams& params) {
  return std::make_unique<FamixMsPolicy>("famix-ms", enumerate_mis(graph, params.enumeration_cap),
                                         params.nstar_search);
}

std::unique_ptr<FamixMsPolicy> FamixMsPolicy::coloring(const InterferenceGraph& graph, const PolicyParams& params) {
  const auto order = params.coloring_order == ColoringOrder::Degree ? descending_degree_order(graph)
                                                                     : natural_order(graph);
  auto sets = greedy_coloring(graph, order).extended_sets;
  std::sort(sets.begin(), sets.end(), LexLess{});
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return std::make_unique<FamixMsPolicy>("famix-coloring", std::move(sets), params.nstar_search);
}

std::vector<ScheduleChoice> FamixMsPolicy::distribution(const SlotView& view) const {
  const auto active = active_schedules(family_, view.nonempty());
  if (active.empty()) return point_mass({});
  try {
    return to_choices(famix_ms_distribution(active, view.deficits, view.success_probs, search_));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllWeightsZero) throw;
    ++stats_.uniform_fallbacks;
    return uniform_over(active);
  }
}

LinkSet FamixMsPolicy::decide(const SlotView& view, Rng& rng) {
  return sample_choice(distribution(view), rng);
}

FamixNdPolicy::FamixNdPolicy(const InterferenceGraph& graph, const PolicyParams& params)
    : allow_qmin_(params.allow_qmin) {
  if (!graph.is_complete()) {
    throw Error(ErrorCode::PolicyIncompatible, "famix-nd requires a collocated (complete) interference graph");
  }
}

std::vector<ScheduleChoice> FamixNdPolicy::distribution(const SlotView& view) const {
  const LinkSet nonempty = view.nonempty();
  if (nonempty.empty()) return point_mass({});
  double q_min = 1.0;
  double q_max = 0.0;
  for (int l : nonempty) {
    q_min = std::min(q_min, view.success_probs[l]);
    q_max = std::max(q_max, view.success_probs[l]);
  }
  if (q_max - q_min > 1e-12) {
    if (!allow_qmin_) {
      throw Error(ErrorCode::NotCollocatedUniform, "famix-nd needs equal success probabilities across links");
    }
    ++stats_.qmin_substitutions;
  }
  if (!(q_min > 0.0)) {
    ++stats_.zero_q_idles;
    return point_mass({});
  }
  std::vector<ScheduleChoice> out;
  for (const auto& c : famix_nd_distribution(*view.buffers, view.deficits, q_min))
    if (c.probability > 0.0) out.push_back({LinkSet::single(c.link), c.probability});
  return out;
}

LinkSet FamixNdPolicy::decide(const SlotView& view, Rng& rng) {
  return sample_choice(distribution(view), rng);
}

MyopicPolicy::MyopicPolicy(const InterferenceGraph& graph, const PolicyParams& params)
    : rates_(params.timer_rates), delta_(params.delta) {
  if (rates_.empty()) rates_.assign(static_cast<std::size_t>(graph.link_count()), 1.0);
  if (static_cast<int>(rates_.size()) != graph.link_count()) {
    throw Error(ErrorCode::InvalidArgument, "myopic needs one timer rate per link");
  }
  for (double r : rates_)
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "timer rates must be positive");
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
}

LinkSet MyopicPolicy::decide(const SlotView& view, Rng& rng) {
  return myopic_sample(*view.graph, view.nonempty(), rates_, delta_, rng);
}

std::vector<ScheduleChoice> MyopicPolicy::distribution(const SlotView& view) const {
  if (std::adjacent_find(rates_.begin(), rates_.end(), std::not_equal_to<>()) != rates_.end()) {
    throw Error(ErrorCode::PolicyIncompatible, "exact myopic law requires equal timer rates");
  }
  return myopic_distribution(*view.graph, view.nonempty(), delta_);
}

}  // namespace rts
