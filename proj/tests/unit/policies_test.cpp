#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rtsched/error.hpp"
#include "rtsched/oracle.hpp"
#include "rtsched/policies.hpp"
#include "rtsched/registry.hpp"
#include "../support.hpp"

using namespace rts;

namespace {

InterferenceGraph path3() { return InterferenceGraph(3, {{0, 1}, {1, 2}}); }

std::vector<double> ones(int n) { return std::vector<double>(static_cast<std::size_t>(n), 1.0); }

BufferState full_buffers(int links, int deadline = 1) {
  BufferState b(links);
  for (int l = 0; l < links; ++l) b.push(l, deadline, 0);
  return b;
}

}  // namespace

TEST_CASE("active schedules") {
  const auto family = enumerate_mis(path3());
  CHECK(active_schedules(family, LinkSet{0, 1, 2}) == family);
  CHECK(active_schedules(family, LinkSet{}).empty());
  CHECK(active_schedules(family, LinkSet{1}) == std::vector<LinkSet>{LinkSet{1}});
  // {0,2} ∩ {0,1} = {0} and {1} ∩ {0,1} = {1}
  CHECK(active_schedules(family, LinkSet{0, 1}) == std::vector<LinkSet>{LinkSet{0}, LinkSet{1}});
}

TEST_CASE("max-weight selection examples") {
  const auto family = enumerate_mis(path3());
  const std::vector<double> w = {3, 5, 4};
  CHECK(mws_select(family, w, ones(3)) == LinkSet{0, 2});

  const std::vector<LinkSet> one = {LinkSet{1}};
  CHECK(mws_select(one, w, ones(3)) == LinkSet{1});

  const std::vector<LinkSet> tied = {LinkSet{1}, LinkSet{0}};
  const std::vector<double> equal = {2, 2, 2};
  CHECK(mws_select(tied, equal, ones(3)) == LinkSet{0});

  CHECK_THROWS_AS(mws_select(std::vector<LinkSet>{}, w, ones(3)), Error);
}

TEST_CASE("greedy maximal scheduling examples") {
  const std::vector<double> w = {3, 5, 4};
  CHECK(gms_select(path3(), LinkSet{0, 1, 2}, w, ones(3)) == LinkSet{1});

  const auto k3 = InterferenceGraph::complete(3);
  const std::vector<double> w2 = {1, 9, 5};
  CHECK(gms_select(k3, LinkSet{0, 1, 2}, w2, ones(3)) == LinkSet{1});

  // Weight ties go to the lower index; the result is always maximal among
  // the nonempty links.
  const std::vector<double> flat = {1, 1, 1};
  CHECK(gms_select(path3(), LinkSet{0, 1, 2}, flat, ones(3)) == LinkSet{0, 2});
}

TEST_CASE("greedy schedules are maximal within the nonempty links") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 8);
    const auto g = testing::random_graph(k, 0.4, gen);
    const LinkSet b(gen() & LinkSet::first_n(k).bits());
    std::vector<double> w(k), q(k);
    for (int l = 0; l < k; ++l) {
      w[l] = std::floor(u(gen) * 5);
      q[l] = u(gen);
    }
    const LinkSet m = gms_select(g, b, w, q);
    CHECK(is_valid_schedule(g, m, b));
    for (int l : b - m) CHECK(g.neighbors(l).intersects(m));
  }
}

TEST_CASE("subharmonic randomization examples") {
  SUBCASE("weights 4, 2, 1") {
    const std::vector<LinkSet> sets = {LinkSet{0}, LinkSet{1}, LinkSet{2}};
    const std::vector<double> w = {4, 2, 1};
    const auto d = famix_ms_distribution(sets, w, ones(3));
    CHECK(d.support_size == 2);
    CHECK(d.entries[0].probability == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(d.entries[1].probability == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(d.entries[2].probability == 0.0);
    CHECK(subharmonic_average(std::vector<double>{4, 2, 1}, 2) == doctest::Approx(4.0 / 3.0));
  }
  SUBCASE("equal weights are uniform") {
    for (int r = 1; r <= 6; ++r) {
      std::vector<LinkSet> sets;
      for (int l = 0; l < r; ++l) sets.push_back(LinkSet::single(l));
      const std::vector<double> w(static_cast<std::size_t>(r), 3.0);
      const auto d = famix_ms_distribution(sets, w, ones(r));
      CHECK(d.support_size == r);
      for (const auto& e : d.entries) CHECK(e.probability == doctest::Approx(1.0 / r).epsilon(1e-12));
    }
  }
  SUBCASE("all weights zero") {
    const std::vector<LinkSet> sets = {LinkSet{0}, LinkSet{1}};
    const std::vector<double> w = {0, 0};
    CHECK_THROWS_AS(famix_ms_distribution(sets, w, ones(2)), Error);
  }
}

TEST_CASE("linear and binary n* searches agree") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int r = 1 + static_cast<int>(gen() % 12);
    std::vector<double> w(static_cast<std::size_t>(r));
    for (auto& x : w) x = u(gen);
    std::sort(w.rbegin(), w.rend());
    CHECK(find_support_size(w, NStarSearch::Linear) == find_support_size(w, NStarSearch::Binary));
  }
}

TEST_CASE("restricted family") {
  const auto g = path3();
  const auto family = enumerate_mis(g);
  const std::vector<double> w = {3, 5, 4};
  const std::vector<double> q = {0.5, 0.9, 0.7};
  const auto full = famix_ms_distribution(active_schedules(family, LinkSet{0, 1, 2}), w, q);
  const auto restricted = famix_restricted_distribution(family, LinkSet{0, 1, 2}, w, q);
  REQUIRE(full.entries.size() == restricted.entries.size());
  for (std::size_t i = 0; i < full.entries.size(); ++i) {
    CHECK(full.entries[i].schedule == restricted.entries[i].schedule);
    CHECK(full.entries[i].probability == restricted.entries[i].probability);
  }

  // Bipartite path: two colors, so at most two schedules get probability.
  const InterferenceGraph path5(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  auto coloring = FamixMsPolicy::coloring(path5, {});
  CHECK(coloring->family().size() <= 2);
  const auto b = full_buffers(5);
  const std::vector<double> w5 = {1, 2, 3, 4, 5};
  SlotView view;
  view.graph = &path5;
  view.buffers = &b;
  view.deficits = w5;
  const auto q5 = ones(5);
  view.success_probs = q5;
  CHECK(coloring->distribution(view).size() <= 2);

  BufferState empty(5);
  view.buffers = &empty;
  const auto idle = coloring->distribution(view);
  REQUIRE(idle.size() == 1);
  CHECK(idle[0].schedule.empty());
}

TEST_CASE("domination and the non-dominated set") {
  CHECK_FALSE(dominates({0, 5, 2}, {1, 3, 1}));
  CHECK_FALSE(dominates({1, 3, 1}, {0, 5, 2}));
  CHECK(dominates({0, 5, 1}, {1, 3, 2}));
  CHECK(dominates({0, 4, 2}, {1, 4, 2}));
  CHECK_FALSE(dominates({1, 4, 2}, {0, 4, 2}));

  const auto both = non_dominated_links({{0, 5, 2}, {1, 3, 1}});
  CHECK(both.size() == 2);
  const auto one = non_dominated_links({{0, 5, 1}, {1, 3, 2}});
  REQUIRE(one.size() == 1);
  CHECK(one[0].link == 0);
}

TEST_CASE("collocated randomization examples") {
  const std::vector<double> w = {4, 2, 1};
  const auto pi = famix_nd_probabilities(w, 1.0);
  CHECK(pi[0] == doctest::Approx(0.5));
  CHECK(pi[1] == doctest::Approx(0.5));
  CHECK(pi[2] == doctest::Approx(0.0));

  const std::vector<double> w2 = {4, 2};
  const auto pi2 = famix_nd_probabilities(w2, 0.5);
  CHECK(pi2[0] == doctest::Approx(1.0));
  CHECK(pi2[1] == doctest::Approx(0.0));

  BufferState b(3);
  b.push(0, 3, 0);
  b.push(1, 2, 0);
  b.push(2, 1, 0);
  const std::vector<double> deficits = {4, 2, 1};
  const auto choices = famix_nd_distribution(b, deficits, 1.0);
  REQUIRE(choices.size() == 3);
  CHECK(choices[0].link == 0);
  CHECK_THROWS_AS(famix_nd_distribution(b, deficits, 0.0), Error);
  BufferState empty(3);
  CHECK_THROWS_AS(famix_nd_distribution(empty, deficits, 1.0), Error);
}

TEST_CASE("famix-nd policy needs a collocated graph") {
  CHECK_THROWS_AS(make_policy("famix-nd", path3(), {}), Error);
  CHECK_NOTHROW(make_policy("famix-nd", InterferenceGraph::complete(3), {}));
}

TEST_CASE("famix-nd substitutes q_min for unequal probabilities") {
  const auto g = InterferenceGraph::complete(2);
  auto policy = make_policy("famix-nd", g, {});
  const auto b = full_buffers(2);
  const std::vector<double> w = {4, 2};
  const std::vector<double> q = {0.5, 0.9};
  SlotView view{&g, &b, w, q, 0, nullptr};
  const auto d = policy->distribution(view);
  // q_min = 0.5: π_1 = min{2(1 - 1/2), 1} = 1
  REQUIRE(d.size() == 1);
  CHECK(d[0].schedule == LinkSet{0});
  CHECK(policy->stats().qmin_substitutions == 1);

  PolicyParams strict;
  strict.allow_qmin = false;
  auto strict_policy = make_policy("famix-nd", g, strict);
  CHECK_THROWS_AS(strict_policy->distribution(view), Error);
}

TEST_CASE("myopic timer selection") {
  Rng rng(12);
  const int n = 100000;

  SUBCASE("single nonempty link joins with probability 1 - delta") {
    const InterferenceGraph g(1, {});
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += myopic_sample(g, LinkSet{0}, ones(1), 0.01, rng).contains(0);
    CHECK(std::abs(hits / double(n) - 0.99) < 0.005);
  }
  SUBCASE("two adjacent links split evenly") {
    const auto g = InterferenceGraph::complete(2);
    int first = 0;
    for (int i = 0; i < n; ++i) first += myopic_sample(g, LinkSet{0, 1}, ones(2), 1e-9, rng).contains(0);
    CHECK(std::abs(first / double(n) - 0.5) < 0.01);
  }
  SUBCASE("empty network") {
    const auto g = InterferenceGraph::complete(2);
    CHECK(myopic_sample(g, LinkSet{}, ones(2), 0.01, rng).empty());
  }
}

TEST_CASE("exact myopic law matches sampling") {
  const InterferenceGraph g(4, {{0, 1}, {1, 2}, {2, 3}});
  const double delta = 0.2;
  const auto law = myopic_distribution(g, LinkSet{0, 1, 2, 3}, delta);
  double total = 0.0;
  std::map<std::uint64_t, double> expected;
  for (const auto& c : law) {
    total += c.probability;
    expected[c.schedule.bits()] += c.probability;
    CHECK(is_independent(g, c.schedule));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(31);
  std::map<std::uint64_t, int> seen;
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++seen[myopic_sample(g, LinkSet{0, 1, 2, 3}, ones(4), delta, rng).bits()];
  for (const auto& [bits, p] : expected) {
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(seen[bits] / double(n) - p) < 5 * sd + 1e-9);
  }
}

TEST_CASE("registry") {
  const auto& names = policy_names();
  CHECK(names.size() == 7);
  const auto g = InterferenceGraph::complete(2);
  for (const auto& name : names) CHECK(make_policy(name, g, {})->name() == name);
  CHECK_THROWS_AS(make_policy("nope", g, {}), Error);
}

TEST_CASE("every policy returns valid schedules with probabilities summing to one") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 6);
    const bool collocated = trial % 3 == 0;
    const auto g = collocated ? InterferenceGraph::complete(k) : testing::random_graph(k, 0.4, gen);
    BufferState b(k);
    for (int l = 0; l < k; ++l)
      if (gen() % 3 != 0) b.push(l, 1 + static_cast<int>(gen() % 3), 0);
    std::vector<double> w(k), q(k);
    for (int l = 0; l < k; ++l) {
      w[l] = std::floor(u(gen) * 6);
      q[l] = collocated ? 0.7 : 0.1 + 0.9 * u(gen);
    }
    SlotView view{&g, &b, w, q, 0, nullptr};
    for (const auto& name : {"mws", "gms", "famix-ms", "famix-coloring", "myopic", "famix-nd"}) {
      if (std::string(name) == "famix-nd" && !collocated) continue;
      auto policy = make_policy(name, g, {});
      const auto d = policy->distribution(view);
      double total = 0.0;
      for (const auto& c : d) {
        CHECK(c.probability >= 0.0);
        CHECK(is_valid_schedule(g, c.schedule, b.nonempty()));
        total += c.probability;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}
