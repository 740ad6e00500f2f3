#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "rtsched/error.hpp"
#include "rtsched/oracle.hpp"
#include "rtsched/registry.hpp"
#include "rtsched/simulator.hpp"
#include "../support.hpp"

using namespace rts;

namespace {

FrameSlot make_slot(const std::vector<int>& deadlines, std::vector<double> q, std::vector<int> increments) {
  FrameSlot s;
  s.state = quiet_state(std::move(q));
  for (std::size_t l = 0; l < deadlines.size(); ++l)
    if (deadlines[l] > 0) s.state.arrivals[l].push_back({1, deadlines[l]});
  s.deficit_arrivals = std::move(increments);
  return s;
}

/// Random frame problem with at most one arrival per link and slot.
FrameProblem random_problem(const InterferenceGraph& g, int frame, int d_max, bool deterministic_q,
                            std::mt19937_64& gen) {
  const int k = g.link_count();
  static const double kQ[] = {0.0, 0.3, 0.5, 0.8, 1.0};
  FrameProblem p;
  p.graph = &g;
  p.initial_buffers = BufferState(k);
  for (int l = 0; l < k; ++l) {
    p.initial_deficits.push_back(static_cast<long long>(gen() % 6));
    if (gen() % 3 == 0) p.initial_buffers.push(l, 1 + static_cast<int>(gen() % d_max), 0);
  }
  for (int t = 0; t < frame; ++t) {
    std::vector<int> deadlines(k, 0), inc(k, 0);
    std::vector<double> q(k);
    for (int l = 0; l < k; ++l) {
      if (gen() % 2 == 0) {
        deadlines[l] = 1 + static_cast<int>(gen() % d_max);
        inc[l] = static_cast<int>(gen() % 2);
      }
      q[l] = deterministic_q ? 1.0 : kQ[gen() % 5];
    }
    p.slots.push_back(make_slot(deadlines, q, inc));
  }
  return p;
}

/// Every independent subset of the nonempty links, the empty one included.
std::vector<LinkSet> valid_actions(const InterferenceGraph& g, LinkSet nonempty) {
  std::vector<LinkSet> out;
  for (std::uint64_t m = nonempty.bits();; m = (m - 1) & nonempty.bits()) {
    if (testing::independent_by_pairs(g, m)) out.emplace_back(m);
    if (m == 0) break;
  }
  return out;
}

struct Realized {
  BufferState buffers;
  std::vector<double> w;
  double gain = 0.0;
};

/// One slot of the frame driven by the simulator's building blocks.
Realized play(const FrameProblem& p, int t, const BufferState& before, const std::vector<double>& w,
              LinkSet action, LinkSet on) {
  Realized r{before, w, 0.0};
  auto out = apply_schedule(r.buffers, action, on);
  for (int l : out.served) r.gain += w[l];
  std::vector<double> inc(p.slots[t].deficit_arrivals.begin(), p.slots[t].deficit_arrivals.end());
  update_deficits(r.w, inc, out.served);
  age_buffers(r.buffers);
  if (t + 1 < static_cast<int>(p.slots.size())) enqueue_arrivals(r.buffers, p.slots[t + 1].state, t + 1);
  return r;
}

std::vector<std::pair<LinkSet, double>> channel_outcomes(LinkSet action, const std::vector<double>& q) {
  std::vector<std::pair<LinkSet, double>> out;
  for (std::uint64_t s = action.bits();; s = (s - 1) & action.bits()) {
    double pr = 1.0;
    for (int l : action) pr *= ((s >> l) & 1U) ? q[l] : 1 - q[l];
    out.emplace_back(LinkSet(s), pr);
    if (s == 0) break;
  }
  return out;
}

BufferState with_first_arrivals(const FrameProblem& p) {
  BufferState b = p.initial_buffers;
  enqueue_arrivals(b, p.slots[0].state, 0);
  return b;
}

std::vector<double> as_double(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("brute-force max weight examples") {
  const InterferenceGraph single(1, {});
  const std::vector<double> w1 = {2.0}, q1 = {0.5};
  CHECK(brute_force_mws(single, LinkSet{0}, w1, q1) == LinkSet{0});

  const InterferenceGraph path(3, {{0, 1}, {1, 2}});
  const std::vector<double> zero = {0, 0, 0}, q = {1, 1, 1};
  CHECK(brute_force_mws(path, LinkSet{0, 1, 2}, zero, q) == LinkSet{0, 2});
  CHECK_THROWS_AS(brute_force_mws(InterferenceGraph(13, {}), LinkSet{0}, std::vector<double>(13, 1.0),
                                  std::vector<double>(13, 1.0)),
                  Error);
}

TEST_CASE("single link, single slot") {
  const InterferenceGraph g(1, {});
  FrameProblem p;
  p.graph = &g;
  p.initial_buffers = BufferState(1);
  p.initial_buffers.push(0, 1, 0);
  p.initial_deficits = {2};
  p.slots = {make_slot({0}, {0.5}, {0})};
  const auto r = frame_optimal_gain(p);
  CHECK(r.expected_gain == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.first_schedule == LinkSet{0});
}

TEST_CASE("a frame with no arrivals idles with zero gain") {
  const InterferenceGraph g(2, {{0, 1}});
  FrameProblem p;
  p.graph = &g;
  p.initial_buffers = BufferState(2);
  p.initial_deficits = {3, 4};
  p.slots = {make_slot({0, 0}, {1, 1}, {0, 0}), make_slot({0, 0}, {1, 1}, {0, 0})};
  const auto r = frame_optimal_gain(p);
  CHECK(r.expected_gain == 0.0);
  CHECK(r.first_schedule.empty());
}

TEST_CASE("two-slot frames match an enumeration of all policy trees") {
  // Two collocated links and two slots: a policy tree is a first action plus
  // one second-slot action for each channel outcome of the first.
  std::mt19937_64 gen(2024);
  const auto g = InterferenceGraph::complete(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_problem(g, 2, 3, false, gen);
    const BufferState b0 = with_first_arrivals(p);
    const auto w0 = as_double(p.initial_deficits);
    const auto& q0 = p.slots[0].state.success_probs;
    const auto& q1 = p.slots[1].state.success_probs;

    double best = -1.0;
    for (LinkSet a0 : valid_actions(g, b0.nonempty())) {
      const auto outs = channel_outcomes(a0, q0);
      std::vector<Realized> after;
      std::vector<std::vector<LinkSet>> second;
      for (const auto& [on, pr] : outs) {
        after.push_back(play(p, 0, b0, w0, a0, on));
        second.push_back(valid_actions(g, after.back().buffers.nonempty()));
      }
      // Odometer over one choice per branch.
      std::vector<std::size_t> pick(outs.size(), 0);
      while (true) {
        double value = 0.0;
        for (std::size_t i = 0; i < outs.size(); ++i) {
          const LinkSet a1 = second[i][pick[i]];
          double inner = 0.0;
          for (const auto& [on1, pr1] : channel_outcomes(a1, q1))
            inner += pr1 * play(p, 1, after[i].buffers, after[i].w, a1, on1).gain;
          value += outs[i].second * (after[i].gain + inner);
        }
        best = std::max(best, value);
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == second[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
      }
    }
    CHECK(frame_optimal_gain(p).expected_gain == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("with reliable channels the optimum equals the best schedule sequence") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 150; ++trial) {
    const bool collocated = trial % 2 == 0;
    const InterferenceGraph g = collocated ? InterferenceGraph::complete(2) : InterferenceGraph(2, {});
    const int frame = 1 + static_cast<int>(gen() % 5);
    const auto p = random_problem(g, frame, 3, true, gen);

    std::function<double(int, const BufferState&, const std::vector<double>&)> search =
        [&](int t, const BufferState& b, const std::vector<double>& w) -> double {
      if (t == frame) return 0.0;
      double best = 0.0;
      for (LinkSet a : valid_actions(g, b.nonempty())) {
        const auto r = play(p, t, b, w, a, a);
        best = std::max(best, r.gain + search(t + 1, r.buffers, r.w));
      }
      return best;
    };
    const double expected = search(0, with_first_arrivals(p), as_double(p.initial_deficits));
    CHECK(frame_optimal_gain(p).expected_gain == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("memoization does not change the value") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 3);
    const auto g = testing::random_graph(k, 0.5, gen);
    const int frame = 1 + static_cast<int>(gen() % 5);
    const auto p = random_problem(g, frame, 1 + static_cast<int>(gen() % 3), false, gen);
    const auto memo = frame_optimal_gain(p, {}, true);
    const auto plain = frame_optimal_gain(p, {}, false);
    CHECK(std::abs(memo.expected_gain - plain.expected_gain) <= 1e-9);
    CHECK(memo.first_schedule == plain.first_schedule);
    CHECK(memo.states <= plain.states);
  }
}

TEST_CASE("two-slot fragment: serve the tight packet first") {
  // Link 0: deadline 2, q = 1 in both slots. Link 1: deadline 1, q = 0.5.
  const auto g = InterferenceGraph::complete(2);
  FrameProblem p;
  p.graph = &g;
  p.initial_buffers = BufferState(2);
  p.initial_deficits = {1, 1};
  p.slots = {make_slot({2, 1}, {1.0, 0.5}, {0, 0}), make_slot({0, 0}, {1.0, 0.0}, {0, 0})};
  const auto r = frame_optimal_gain(p);
  CHECK(r.first_schedule == LinkSet{1});
  CHECK(r.expected_gain == doctest::Approx(1.5).epsilon(1e-12));

  auto mws = make_policy("mws", g, {});
  CHECK(evaluate_policy_gain(p, *mws) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("causal policies never beat the oracle in expectation") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 3);
    const auto g = testing::random_graph(k, 0.5, gen);
    const auto p = random_problem(g, 1 + static_cast<int>(gen() % 6), 3, false, gen);
    const double best = frame_optimal_gain(p).expected_gain;
    for (const auto& name : {"mws", "gms", "famix-ms", "famix-coloring", "myopic"}) {
      auto policy = make_policy(name, g, {});
      CHECK(evaluate_policy_gain(p, *policy) <= best + 1e-9);
    }
  }
}

TEST_CASE("oracle limits") {
  const InterferenceGraph big(4, {});
  CHECK_THROWS_AS(make_policy("frame-optimal", big, {}), Error);

  const auto g = InterferenceGraph::complete(2);
  std::mt19937_64 gen(1);
  const auto p = random_problem(g, 6, 3, false, gen);
  OracleLimits tiny;
  tiny.max_states = 3;
  try {
    frame_optimal_gain(p, tiny);
    FAIL("expected StateSpaceExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateSpaceExceeded);
  }

  FrameProblem long_frame = random_problem(g, 9, 3, false, gen);
  CHECK_THROWS_AS(frame_optimal_gain(long_frame), Error);

  FrameProblem too_many = random_problem(g, 2, 2, false, gen);
  too_many.slots[0].state.arrivals[0] = {{2, 1}};
  CHECK_THROWS_AS(frame_optimal_gain(too_many), Error);
}

TEST_CASE("frame wrapper in the simulator") {
  // Pattern B and its mirror on two collocated links.
  const auto g = InterferenceGraph::complete(2);
  PatternSpec spec;
  spec.d_max = 2;
  auto slot = [](std::vector<int> d) {
    TrafficFadingState s = quiet_state({0.6, 0.6});
    for (std::size_t l = 0; l < d.size(); ++l)
      if (d[l] > 0) s.arrivals[l].push_back({1, d[l]});
    return s;
  };
  spec.patterns = {{slot({2, 1}), slot({0, 0})}, {slot({1, 2}), slot({0, 0})}};
  const auto chain = build_alternating_pattern(spec);
  auto policy = make_policy("frame-optimal", g, {});
  SimulationSetup setup{&g, &chain, {0.5, 0.5}, AdmissionMode::CoinToss, {}, 4000, 3, 0};
  Simulator sim(setup, *policy);
  int clears = 0;
  sim.set_trace([&](Phase ph, std::uint64_t) { clears += ph == Phase::FrameClear; });
  const auto& m = sim.run();
  CHECK(policy->stats().frames > 0);
  // The last frame may still be open when the horizon ends.
  const int frames = static_cast<int>(policy->stats().frames);
  CHECK(clears >= frames - 1);
  CHECK(clears <= frames);
  // At most d_max · a_max · K packets are dropped at a frame end.
  CHECK(m.max_frame_drop <= 2u * 1u * 2u);
  for (int l = 0; l < 2; ++l) {
    CHECK(m.arrivals_total[l] == m.delivered_total[l] + m.expired_total[l] + m.dropped_total[l] +
                                     static_cast<std::uint64_t>(sim.buffers().size(l)));
  }

  SimulationSetup deterministic = setup;
  deterministic.admission = AdmissionMode::Deterministic;
  auto again = make_policy("frame-optimal", g, {});
  Simulator bad(deterministic, *again);
  CHECK_THROWS_AS(bad.run(), Error);
}
