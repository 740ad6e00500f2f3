#pragma once

// Test-side reference computations. Everything here is written directly from
// the definitions and deliberately avoids the library's own helpers.

#include <cstdint>
#include <random>
#include <vector>

#include "rtsched/interference.hpp"

namespace rts::testing {

inline InterferenceGraph random_graph(int links, double edge_prob, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(edge_prob);
  std::vector<InterferenceGraph::Edge> edges;
  for (int a = 0; a < links; ++a)
    for (int b = a + 1; b < links; ++b)
      if (coin(gen)) edges.emplace_back(a, b);
  return InterferenceGraph(links, edges);
}

inline bool independent_by_pairs(const InterferenceGraph& g, std::uint64_t mask) {
  for (int a = 0; a < g.link_count(); ++a)
    for (int b = a + 1; b < g.link_count(); ++b)
      if (((mask >> a) & 1U) && ((mask >> b) & 1U) && g.adjacent(a, b)) return false;
  return true;
}

/// Largest Σ w_l q_l over independent subsets of `within`.
inline double max_weight_independent(const InterferenceGraph& g, std::uint64_t within,
                                     const std::vector<double>& w, const std::vector<double>& q) {
  double best = 0.0;
  for (std::uint64_t m = within;; m = (m - 1) & within) {
    if (independent_by_pairs(g, m)) {
      double total = 0.0;
      for (int l = 0; l < g.link_count(); ++l)
        if ((m >> l) & 1U) total += w[l] * q[l];
      if (total > best) best = total;
    }
    if (m == 0) break;
  }
  return best;
}

/// Interference degree: the most pairwise non-adjacent links inside any
/// closed neighborhood.
inline int interference_degree_by_scan(const InterferenceGraph& g) {
  int beta = 0;
  const int k = g.link_count();
  for (int l = 0; l < k; ++l) {
    std::uint64_t closed = std::uint64_t{1} << l;
    for (int o = 0; o < k; ++o)
      if (g.adjacent(l, o)) closed |= std::uint64_t{1} << o;
    for (std::uint64_t m = closed; m != 0; m = (m - 1) & closed) {
      if (independent_by_pairs(g, m)) beta = std::max(beta, static_cast<int>(__builtin_popcountll(m)));
    }
  }
  return beta;
}

/// Maximal independent sets found by scanning every subset.
inline std::vector<std::uint64_t> maximal_sets_by_scan(const InterferenceGraph& g) {
  std::vector<std::uint64_t> out;
  const int k = g.link_count();
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
    if (!independent_by_pairs(g, m)) continue;
    bool maximal = true;
    for (int l = 0; l < k && maximal; ++l)
      if (!((m >> l) & 1U) && independent_by_pairs(g, m | (std::uint64_t{1} << l))) maximal = false;
    if (maximal) out.push_back(m);
  }
  return out;
}

}  // namespace rts::testing
