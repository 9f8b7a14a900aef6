#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coloring.hpp"
#include "graph.hpp"
#include "rules.hpp"

namespace inflab {

inline bool edge_conflicted(ProcessKind kind, Color a, Color b) {
  return (a == b) == (kind == ProcessKind::minority);
}

// Number of neighbors of v that v is in conflict with.
inline std::int64_t conflict_count(const Graph& g, const Coloring& col, ProcessKind kind,
                                   NodeId v) {
  std::int64_t k = 0;
  for (NodeId u : g.neighbors(v)) k += edge_conflicted(kind, col[v], col[u]);
  return k;
}

// Conflicted edges in the whole graph.  An edge is in conflict for one
// endpoint exactly when it is for the other, so this is well defined.
inline std::int64_t total_conflicts(const Graph& g, const Coloring& col, ProcessKind kind) {
  std::int64_t total = 0;
  for (const auto& [u, v] : g.edges()) total += edge_conflicted(kind, col[u], col[v]);
  return total;
}

inline bool is_switchable(const Graph& g, const Coloring& col, ProcessKind kind,
                          const SwitchRule& rule, NodeId v) {
  return rule.triggers(conflict_count(g, col, kind, v), g.degree(v));
}

// Flips v in place and returns the change in total conflict count.  Every
// incident edge toggles conflict status, so the delta is d_v - 2*|N_c(v)|,
// strictly negative whenever the switch was legal.
inline std::int64_t apply_switch(const Graph& g, Coloring& col, ProcessKind kind, NodeId v) {
  std::int64_t k = conflict_count(g, col, kind, v);
  col[v] = flip(col[v]);
  return g.degree(v) - 2 * k;
}

// Incremental view of a running process: per-node conflict counts and the
// global total, updated in O(d_v) per flip.  The engine, the oracle, and the
// adaptive schedule generators all sit on top of this.
class ConflictState {
 public:
  ConflictState(const Graph& g, Coloring col, ProcessKind kind, SwitchRule rule)
      : g_(&g), col_(std::move(col)), kind_(kind), rule_(rule) {
    if (col_.size() != static_cast<std::size_t>(g.node_count()))
      throw std::invalid_argument("coloring size does not match graph");
    conflicts_.assign(col_.size(), 0);
    for (const auto& [u, v] : g.edges()) {
      if (edge_conflicted(kind_, col_[u], col_[v])) {
        ++conflicts_[u];
        ++conflicts_[v];
        ++total_;
      }
    }
  }

  const Graph& graph() const { return *g_; }
  const Coloring& coloring() const { return col_; }
  ProcessKind kind() const { return kind_; }
  const SwitchRule& rule() const { return rule_; }

  std::int64_t conflicts(NodeId v) const { return conflicts_[v]; }
  std::int64_t total() const { return total_; }
  bool switchable(NodeId v) const { return rule_.triggers(conflicts_[v], g_->degree(v)); }

  std::int64_t switchable_count() const {
    std::int64_t c = 0;
    for (NodeId v = 0; v < g_->node_count(); ++v) c += switchable(v);
    return c;
  }

  // Flips v and returns the conflict delta (callers decide legality).
  std::int64_t flip_node(NodeId v) {
    std::int64_t before = conflicts_[v];
    for (NodeId u : g_->neighbors(v)) {
      if (edge_conflicted(kind_, col_[v], col_[u])) --conflicts_[u];
      else ++conflicts_[u];
    }
    col_[v] = flip(col_[v]);
    std::int64_t degree = g_->degree(v);
    conflicts_[v] = degree - before;
    std::int64_t delta = degree - 2 * before;
    total_ += delta;
    return delta;
  }

 private:
  const Graph* g_;
  Coloring col_;
  ProcessKind kind_;
  SwitchRule rule_;
  std::vector<std::int64_t> conflicts_;
  std::int64_t total_ = 0;
};

}  // namespace inflab
