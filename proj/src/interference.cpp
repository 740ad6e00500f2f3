#include "rtsched/interference.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rtsched/error.hpp"

namespace rts {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GraphTooLarge: return "GraphTooLarge";
    case ErrorCode::SpecViolation: return "SpecViolation";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::ScheduleInvalid: return "ScheduleInvalid";
    case ErrorCode::NoSchedule: return "NoSchedule";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::NotCollocatedUniform: return "NotCollocatedUniform";
    case ErrorCode::ZeroQ: return "ZeroQ";
    case ErrorCode::StateSpaceExceeded: return "StateSpaceExceeded";
    case ErrorCode::LookaheadUnavailable: return "LookaheadUnavailable";
    case ErrorCode::ChainInvalid: return "ChainInvalid";
    case ErrorCode::PolicyIncompatible: return "PolicyIncompatible";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

InterferenceGraph::InterferenceGraph(int link_count, std::span<const Edge> edges) {
  if (link_count < 1 || link_count > LinkSet::kMaxLinks) {
    throw Error(ErrorCode::InvalidArgument,
                "link count must be in [1, 64], got " + std::to_string(link_count));
  }
  adjacency_.assign(static_cast<std::size_t>(link_count), LinkSet{});
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= link_count || b >= link_count) {
      throw Error(ErrorCode::InvalidArgument,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw Error(ErrorCode::InvalidArgument, "self-loop on link " + std::to_string(a));
    }
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
  }
}

InterferenceGraph InterferenceGraph::complete(int link_count) {
  std::vector<Edge> edges;
  for (int a = 0; a < link_count; ++a)
    for (int b = a + 1; b < link_count; ++b) edges.emplace_back(a, b);
  return InterferenceGraph(link_count, edges);
}

int InterferenceGraph::max_degree() const {
  int best = 0;
  for (const auto& adj : adjacency_) best = std::max(best, adj.size());
  return best;
}

bool InterferenceGraph::is_complete() const {
  for (int l = 0; l < link_count(); ++l)
    if (degree(l) != link_count() - 1) return false;
  return true;
}

std::vector<InterferenceGraph::Edge> InterferenceGraph::edges() const {
  std::vector<Edge> out;
  for (int a = 0; a < link_count(); ++a)
    for (int b : adjacency_[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

namespace {

// Bron–Kerbosch with Tomita pivoting on the complement graph: maximal cliques
// of the complement are exactly the maximal independent sets.
class MisEnumerator {
 public:
  explicit MisEnumerator(const InterferenceGraph& graph) : all_(graph.all_links()) {
    for (int l = 0; l < graph.link_count(); ++l)
      compatible_.push_back(all_ - graph.neighbors(l) - LinkSet::single(l));
  }

  std::vector<LinkSet> run() {
    expand(LinkSet{}, all_, LinkSet{});
    return std::move(found_);
  }

 private:
  void expand(LinkSet chosen, LinkSet candidates, LinkSet excluded) {
    if (candidates.empty()) {
      if (excluded.empty()) found_.push_back(chosen);
      return;
    }
    int pivot = -1;
    int pivot_hits = -1;
    for (int u : candidates | excluded) {
      const int hits = (candidates & compatible_[u]).size();
      if (hits > pivot_hits) {
        pivot_hits = hits;
        pivot = u;
      }
    }
    for (int v : candidates - compatible_[pivot]) {
      expand(chosen | LinkSet::single(v), candidates & compatible_[v], excluded & compatible_[v]);
      candidates.erase(v);
      excluded.insert(v);
    }
  }

  LinkSet all_;
  std::vector<LinkSet> compatible_;
  std::vector<LinkSet> found_;
};

}  // namespace

std::vector<LinkSet> enumerate_mis(const InterferenceGraph& graph, int cap) {
  if (graph.link_count() > cap) {
    throw Error(ErrorCode::GraphTooLarge,
                "maximal independent set enumeration is capped at " + std::to_string(cap) +
                    " links; graph has " + std::to_string(graph.link_count()) +
                    " (use a coloring-restricted, greedy or myopic policy)");
  }
  auto family = MisEnumerator(graph).run();
  std::sort(family.begin(), family.end(), LexLess{});
  family.erase(std::unique(family.begin(), family.end()), family.end());
  return family;
}

LinkSet neighborhood(const InterferenceGraph& graph, int l) {
  return graph.neighbors(l) | LinkSet::single(l);
}

bool is_independent(const InterferenceGraph& graph, LinkSet set) {
  for (int l : set)
    if (graph.neighbors(l).intersects(set)) return false;
  return true;
}

bool is_maximal_independent(const InterferenceGraph& graph, LinkSet set) {
  if (!is_independent(graph, set)) return false;
  for (int l : graph.all_links() - set)
    if (!graph.neighbors(l).intersects(set)) return false;
  return true;
}

bool is_valid_schedule(const InterferenceGraph& graph, LinkSet schedule, LinkSet nonempty_links) {
  return schedule.subset_of(nonempty_links) && schedule.subset_of(graph.all_links()) &&
         is_independent(graph, schedule);
}

int max_independent_size(const InterferenceGraph& graph, LinkSet within) {
  if (within.empty()) return 0;
  // A vertex with at most one neighbor left is always in some maximum set.
  for (int v : within) {
    if ((graph.neighbors(v) & within).size() <= 1)
      return 1 + max_independent_size(graph, within - neighborhood(graph, v));
  }
  const int v = within.front();
  return std::max(1 + max_independent_size(graph, within - neighborhood(graph, v)),
                  max_independent_size(graph, within - LinkSet::single(v)));
}

int interference_degree(const InterferenceGraph& graph) {
  int beta = 0;
  for (int l = 0; l < graph.link_count(); ++l)
    beta = std::max(beta, max_independent_size(graph, neighborhood(graph, l)));
  return beta;
}

LinkSet extend_to_maximal(const InterferenceGraph& graph, LinkSet set) {
  for (int l = 0; l < graph.link_count(); ++l) {
    if (!set.contains(l) && !graph.neighbors(l).intersects(set)) set.insert(l);
  }
  return set;
}

ColoringFamily greedy_coloring(const InterferenceGraph& graph, std::span<const int> order) {
  const int k = graph.link_count();
  std::vector<int> seen(static_cast<std::size_t>(k), 0);
  if (static_cast<int>(order.size()) != k) {
    throw Error(ErrorCode::InvalidArgument, "coloring order must list every link exactly once");
  }
  for (int l : order) {
    if (l < 0 || l >= k || seen[l]++) {
      throw Error(ErrorCode::InvalidArgument, "coloring order must be a permutation of the links");
    }
  }

  ColoringFamily family;
  for (int l : order) {
    auto cls = std::find_if(family.color_classes.begin(), family.color_classes.end(),
                            [&](LinkSet c) { return !graph.neighbors(l).intersects(c); });
    if (cls == family.color_classes.end()) {
      family.color_classes.push_back(LinkSet::single(l));
    } else {
      cls->insert(l);
    }
  }
  for (LinkSet cls : family.color_classes)
    family.extended_sets.push_back(extend_to_maximal(graph, cls));
  return family;
}

std::vector<int> descending_degree_order(const InterferenceGraph& graph) {
  std::vector<int> order = natural_order(graph);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return graph.degree(a) > graph.degree(b); });
  return order;
}

std::vector<int> natural_order(const InterferenceGraph& graph) {
  std::vector<int> order(static_cast<std::size_t>(graph.link_count()));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace rts
