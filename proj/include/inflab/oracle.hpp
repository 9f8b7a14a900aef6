#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dynamics.hpp"
#include "trace.hpp"

namespace inflab {

struct OracleResult {
  std::int64_t max_length = 0;
  Trace witness;  // a schedule that attains max_length
};

namespace detail {

inline std::uint64_t coloring_key(const Coloring& col) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < col.size(); ++i)
    if (col.colors[i] == Color::white) key |= (1ull << i);
  return key;
}

class OracleSearch {
 public:
  OracleSearch(const Graph& g, ProcessKind kind, const SwitchRule& rule)
      : g_(g), kind_(kind), rule_(rule) {}

  std::int64_t longest(Coloring& col) {
    std::uint64_t key = coloring_key(col);
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    std::int64_t best = 0;
    for (NodeId v = 0; v < g_.node_count(); ++v) {
      if (!rule_.triggers(conflict_count(g_, col, kind_, v), g_.degree(v))) continue;
      col[v] = flip(col[v]);
      best = std::max(best, 1 + longest(col));
      col[v] = flip(col[v]);
    }
    memo_.emplace(key, best);
    return best;
  }

 private:
  const Graph& g_;
  ProcessKind kind_;
  SwitchRule rule_;
  std::unordered_map<std::uint64_t, std::int64_t> memo_;
};

}  // namespace detail

// Exhaustive maximum over all sequential schedules, memoized on the
// coloring.  Every switch strictly drops the total conflict count, so the
// state graph is acyclic and the recursion terminates.  State space is 2^n;
// refuse n > 16 unless the caller overrides.
inline OracleResult max_stabilization_oracle(const Graph& g, const Coloring& initial,
                                             ProcessKind kind, const SwitchRule& rule,
                                             int node_limit = 16) {
  if (g.node_count() > node_limit)
    throw std::invalid_argument("oracle limited to " + std::to_string(node_limit) +
                                " nodes (override to force)");
  if (g.node_count() > 63)
    throw std::invalid_argument("oracle states must fit in 64 bits");

  detail::OracleSearch search(g, kind, rule);
  Coloring col = initial;
  OracleResult result;
  result.max_length = search.longest(col);

  // Recover one maximizing schedule by walking greedily along the memo.
  result.witness.initial = initial;
  std::int64_t remaining = result.max_length;
  while (remaining > 0) {
    bool advanced = false;
    for (NodeId v = 0; v < g.node_count() && !advanced; ++v) {
      if (!rule.triggers(conflict_count(g, col, kind, v), g.degree(v))) continue;
      col[v] = flip(col[v]);
      if (search.longest(col) == remaining - 1) {
        std::int64_t k = conflict_count(g, col, kind, v);  // post-flip view
        std::int64_t degree = g.degree(v);
        // delta recomputed from the pre-flip count: k_pre = degree - k_post
        result.witness.steps.push_back({v, degree - 2 * (degree - k)});
        remaining -= 1;
        advanced = true;
      } else {
        col[v] = flip(col[v]);
      }
    }
    if (!advanced) throw std::logic_error("oracle witness reconstruction failed");
  }
  result.witness.stabilized = true;
  return result;
}

}  // namespace inflab
