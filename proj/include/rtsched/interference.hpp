#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rtsched/link_set.hpp"

namespace rts {

/// Conflict graph over links 0..K-1. Adjacent links may not transmit in the
/// same slot. Immutable once built.
class InterferenceGraph {
 public:
  using Edge = std::pair<int, int>;

  InterferenceGraph(int link_count, std::span<const Edge> edges);
  InterferenceGraph(int link_count, std::initializer_list<Edge> edges)
      : InterferenceGraph(link_count, std::span<const Edge>(edges.begin(), edges.size())) {}

  static InterferenceGraph complete(int link_count);

  int link_count() const { return static_cast<int>(adjacency_.size()); }
  LinkSet all_links() const { return LinkSet::first_n(link_count()); }
  /// Open neighborhood (excludes l).
  LinkSet neighbors(int l) const { return adjacency_[l]; }
  bool adjacent(int a, int b) const { return adjacency_[a].contains(b); }
  int degree(int l) const { return adjacency_[l].size(); }
  int max_degree() const;
  bool is_complete() const;
  /// Sorted (a < b) edge list.
  std::vector<Edge> edges() const;

 private:
  std::vector<LinkSet> adjacency_;
};

/// Default cap on K for exhaustive maximal-independent-set enumeration.
inline constexpr int kDefaultEnumerationCap = 24;

/// All maximal independent sets, each canonical, family sorted by `lex_less`.
/// Throws Error{GraphTooLarge} when K exceeds `cap`.
std::vector<LinkSet> enumerate_mis(const InterferenceGraph& graph,
                                   int cap = kDefaultEnumerationCap);

/// Closed neighborhood {l} ∪ neighbors(l).
LinkSet neighborhood(const InterferenceGraph& graph, int l);

bool is_independent(const InterferenceGraph& graph, LinkSet set);
bool is_maximal_independent(const InterferenceGraph& graph, LinkSet set);

/// True iff `schedule` only uses nonempty links and is independent.
bool is_valid_schedule(const InterferenceGraph& graph, LinkSet schedule, LinkSet nonempty_links);

/// Maximum number of mutually non-interfering links within any closed
/// neighborhood.
int interference_degree(const InterferenceGraph& graph);

/// Size of a maximum independent set inside `within`.
int max_independent_size(const InterferenceGraph& graph, LinkSet within);

struct ColoringFamily {
  std::vector<LinkSet> color_classes;
  /// extended_sets[i] is a maximal independent superset of color_classes[i].
  std::vector<LinkSet> extended_sets;
  int color_count() const { return static_cast<int>(color_classes.size()); }
};

/// First-fit coloring along `order` (a permutation of 0..K-1); each class is
/// then grown to a maximal independent set by adding the lowest-indexed
/// compatible links.
ColoringFamily greedy_coloring(const InterferenceGraph& graph, std::span<const int> order);

/// Links by non-increasing degree, ties by index.
std::vector<int> descending_degree_order(const InterferenceGraph& graph);
std::vector<int> natural_order(const InterferenceGraph& graph);

/// Grows `set` to a maximal independent set, scanning links in index order.
LinkSet extend_to_maximal(const InterferenceGraph& graph, LinkSet set);

}  // namespace rts
