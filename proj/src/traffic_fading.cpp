#include "rtsched/traffic_fading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "rtsched/error.hpp"

namespace rts {

int TrafficFadingState::arrival_count(int l) const {
  int total = 0;
  for (const auto& g : arrivals[l]) total += g.count;
  return total;
}

TrafficFadingState quiet_state(std::vector<double> success_probs) {
  TrafficFadingState s;
  s.arrivals.resize(success_probs.size());
  s.success_probs = std::move(success_probs);
  return s;
}

namespace {

void check_state(const TrafficFadingState& s, std::size_t index, int link_count, int a_max,
                 int d_max) {
  const std::string where = "state " + std::to_string(index);
  if (s.link_count() != link_count || static_cast<int>(s.arrivals.size()) != link_count) {
    throw Error(ErrorCode::SpecViolation, where + ": link count mismatch");
  }
  for (int l = 0; l < link_count; ++l) {
    const double q = s.success_probs[l];
    if (!(q >= 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::SpecViolation,
                  where + ": success probability of link " + std::to_string(l) + " outside [0,1]");
    }
    for (const auto& g : s.arrivals[l]) {
      if (g.count < 0) throw Error(ErrorCode::SpecViolation, where + ": negative arrival count");
      if (g.deadline < 1 || g.deadline > d_max) {
        throw Error(ErrorCode::SpecViolation, where + ": deadline " + std::to_string(g.deadline) +
                                                  " of link " + std::to_string(l) +
                                                  " outside 1.." + std::to_string(d_max));
      }
    }
    if (s.arrival_count(l) > a_max) {
      throw Error(ErrorCode::SpecViolation, where + ": link " + std::to_string(l) +
                                                " receives more than a_max=" +
                                                std::to_string(a_max) + " packets");
    }
  }
}

}  // namespace

TrafficFadingChain::TrafficFadingChain(std::vector<TrafficFadingState> states,
                                       std::vector<std::vector<double>> transition_matrix,
                                       int initial_state, int a_max, int d_max)
    : states_(std::move(states)),
      matrix_(std::move(transition_matrix)),
      initial_(initial_state),
      a_max_(a_max),
      d_max_(d_max) {
  if (states_.empty()) throw Error(ErrorCode::SpecViolation, "chain needs at least one state");
  if (a_max_ < 0 || d_max_ < 1) throw Error(ErrorCode::SpecViolation, "need a_max >= 0 and d_max >= 1");
  const int links = states_.front().link_count();
  if (links < 1) throw Error(ErrorCode::SpecViolation, "states must describe at least one link");
  for (std::size_t i = 0; i < states_.size(); ++i) check_state(states_[i], i, links, a_max_, d_max_);
  if (matrix_.size() != states_.size()) {
    throw Error(ErrorCode::SpecViolation, "transition matrix must have one row per state");
  }
  for (const auto& row : matrix_) {
    if (row.size() != states_.size()) {
      throw Error(ErrorCode::SpecViolation, "transition matrix must be square");
    }
    for (double p : row)
      if (!(p >= 0.0)) throw Error(ErrorCode::SpecViolation, "negative transition probability");
  }
  if (initial_ < 0 || static_cast<std::size_t>(initial_) >= states_.size()) {
    throw Error(ErrorCode::SpecViolation, "initial state out of range");
  }
}

void TrafficFadingChain::set_frame_anchor(int state) {
  if (state < 0 || static_cast<std::size_t>(state) >= states_.size()) {
    throw Error(ErrorCode::InvalidArgument, "frame anchor out of range");
  }
  anchor_ = state;
}

int TrafficFadingChain::step(int current, Rng& rng) const {
  const auto& row = matrix_[current];
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last_positive = current;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    acc += row[j];
    last_positive = static_cast<int>(j);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

TrafficFadingChain build_alternating_pattern(const PatternSpec& spec) {
  if (spec.patterns.empty()) throw Error(ErrorCode::SpecViolation, "need at least one pattern");
  if (!(spec.switch_prob >= 0.0 && spec.switch_prob <= 1.0)) {
    throw Error(ErrorCode::SpecViolation, "switch probability outside [0,1]");
  }
  std::vector<TrafficFadingState> states;
  std::vector<std::size_t> first;
  for (const auto& pattern : spec.patterns) {
    if (pattern.empty()) throw Error(ErrorCode::SpecViolation, "pattern length must be >= 1");
    first.push_back(states.size());
    states.insert(states.end(), pattern.begin(), pattern.end());
  }
  const std::size_t n = states.size();
  const std::size_t pattern_count = spec.patterns.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
  for (std::size_t p = 0; p < pattern_count; ++p) {
    const std::size_t begin = first[p];
    const std::size_t last = begin + spec.patterns[p].size() - 1;
    for (std::size_t i = begin; i < last; ++i) matrix[i][i + 1] = 1.0;
    if (pattern_count == 1) {
      matrix[last][begin] = 1.0;
      continue;
    }
    matrix[last][begin] += 1.0 - spec.switch_prob;
    const double share = spec.switch_prob / static_cast<double>(pattern_count - 1);
    for (std::size_t o = 0; o < pattern_count; ++o)
      if (o != p) matrix[last][first[o]] += share;
  }
  TrafficFadingChain chain(std::move(states), std::move(matrix), 0, spec.a_max, spec.d_max);
  chain.set_frame_anchor(static_cast<int>(spec.patterns.front().size() - 1));
  return chain;
}

TrafficFadingChain build_iid(std::span<const double> arrival_probs, int deadline,
                             std::span<const double> success_probs, std::size_t state_cap) {
  const std::size_t links = arrival_probs.size();
  if (links == 0 || success_probs.size() != links) {
    throw Error(ErrorCode::SpecViolation, "arrival and success probability vectors must match");
  }
  std::vector<int> random_links;
  for (std::size_t l = 0; l < links; ++l) {
    const double a = arrival_probs[l];
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::SpecViolation, "arrival probability outside [0,1]");
    if (a > 0.0 && a < 1.0) random_links.push_back(static_cast<int>(l));
  }
  if (random_links.size() >= 63 || (std::size_t{1} << random_links.size()) > state_cap) {
    throw Error(ErrorCode::StateSpaceTooLarge,
                "i.i.d. product space has 2^" + std::to_string(random_links.size()) +
                    " states, above the cap of " + std::to_string(state_cap));
  }
  const std::size_t n = std::size_t{1} << random_links.size();
  std::vector<TrafficFadingState> states;
  std::vector<double> weights;
  for (std::size_t code = 0; code < n; ++code) {
    TrafficFadingState s = quiet_state({success_probs.begin(), success_probs.end()});
    double weight = 1.0;
    for (std::size_t l = 0; l < links; ++l) {
      bool arrives = arrival_probs[l] >= 1.0;
      const auto pos = std::find(random_links.begin(), random_links.end(), static_cast<int>(l));
      if (pos != random_links.end()) {
        arrives = (code >> (pos - random_links.begin())) & 1U;
        weight *= arrives ? arrival_probs[l] : 1.0 - arrival_probs[l];
      }
      if (arrives) s.arrivals[l].push_back({1, deadline});
    }
    states.push_back(std::move(s));
    weights.push_back(weight);
  }
  std::vector<std::vector<double>> matrix(n, weights);
  return TrafficFadingChain(std::move(states), std::move(matrix), 0, 1, deadline);
}

namespace {

std::vector<std::vector<int>> successors(const TrafficFadingChain& chain) {
  const auto& m = chain.transition_matrix();
  std::vector<std::vector<int>> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[i][j] > 0.0) out[i].push_back(static_cast<int>(j));
  return out;
}

std::vector<bool> reachable(const std::vector<std::vector<int>>& adj, int from) {
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> frontier;
  frontier.push(from);
  seen[from] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }
  return seen;
}

}  // namespace

ValidationReport validate(const TrafficFadingChain& chain) {
  ValidationReport report;
  const auto& m = chain.transition_matrix();
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = std::accumulate(m[i].begin(), m[i].end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
      report.violation = ChainViolation::RowNotStochastic;
      report.state = static_cast<int>(i);
      report.message = "row " + std::to_string(i) + " sums to " + std::to_string(sum);
      return report;
    }
  }

  const auto fwd = successors(chain);
  std::vector<std::vector<int>> bwd(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int j : fwd[i]) bwd[j].push_back(static_cast<int>(i));
  const auto from0 = reachable(fwd, 0);
  const auto to0 = reachable(bwd, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!from0[i] || !to0[i]) {
      report.violation = ChainViolation::Reducible;
      report.state = static_cast<int>(i);
      report.message = "chain is reducible: state " + std::to_string(i) +
                       (from0[i] ? " cannot reach state 0" : " is unreachable from state 0");
      return report;
    }
  }

  // can_serve[j][z]: from z, a state with q_l > 0 is reachable within j steps.
  // A packet arriving with deadline d can be served in slots t..t+d-1.
  for (int l = 0; l < chain.link_count(); ++l) {
    std::vector<bool> can_serve(n);
    for (std::size_t z = 0; z < n; ++z) can_serve[z] = chain.state(z).success_probs[l] > 0.0;
    bool servable = false;
    for (int d = 1; d <= chain.d_max() && !servable; ++d) {
      for (std::size_t z = 0; z < n && !servable; ++z) {
        if (!can_serve[z]) continue;
        for (const auto& g : chain.state(z).arrivals[l])
          if (g.count > 0 && g.deadline == d) servable = true;
      }
      std::vector<bool> next = can_serve;
      for (std::size_t z = 0; z < n; ++z)
        for (int s : fwd[z])
          if (can_serve[s]) next[z] = true;
      can_serve = std::move(next);
    }
    if (!servable) {
      report.violation = ChainViolation::LinkNeverServable;
      report.link = l;
      report.message = "link " + std::to_string(l) +
                       " never sees a positive success probability before a deadline expires";
      return report;
    }
  }
  return report;
}

std::vector<double> stationary_distribution(const TrafficFadingChain& chain) {
  const auto& m = chain.transition_matrix();
  const std::size_t n = m.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * 0.5 * (m[i][j] + (i == j ? 1.0 : 0.0));
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (delta < 1e-15) break;
  }
  return pi;
}

std::vector<double> mean_arrival_rates(const TrafficFadingChain& chain) {
  const auto pi = stationary_distribution(chain);
  std::vector<double> rates(static_cast<std::size_t>(chain.link_count()), 0.0);
  for (std::size_t z = 0; z < chain.state_count(); ++z)
    for (int l = 0; l < chain.link_count(); ++l)
      rates[l] += pi[z] * chain.state(z).arrival_count(l);
  return rates;
}

}  // namespace rts
