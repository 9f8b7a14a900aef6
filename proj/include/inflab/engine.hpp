#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "dynamics.hpp"
#include "scheduler.hpp"
#include "trace.hpp"

namespace inflab {

struct ProcessConfig {
  ProcessKind kind = ProcessKind::majority;
  SwitchRule rule = SwitchRule::basic();
  // 0 means the default cap of 4 * |E| steps.
  std::int64_t step_limit = 0;

  std::int64_t effective_step_limit(const Graph& g) const {
    return step_limit > 0 ? step_limit : 4 * static_cast<std::int64_t>(g.edge_count());
  }
};

// A scripted step asked for a node that was not switchable (or out of range).
struct ScheduleViolation : std::runtime_error {
  std::size_t step_index;
  NodeId node;
  ScheduleViolation(std::size_t index, NodeId v)
      : std::runtime_error("schedule violation at step " + std::to_string(index) +
                           ": node " + std::to_string(v) + " is not switchable"),
        step_index(index), node(v) {}
};

// The run hit the step cap without stabilizing or exhausting its script.
struct StepLimitExceeded : std::runtime_error {
  explicit StepLimitExceeded(std::int64_t limit)
      : std::runtime_error("step limit " + std::to_string(limit) + " exceeded") {}
};

namespace detail {

// Greedy adversary: among switchable nodes, pick one whose switch removes
// the fewest conflicts; ties go to the lowest node id.  Lazy max-heap keyed
// by (conflicts removed, id); stale entries are skipped on pop.
class GreedyPicker {
 public:
  explicit GreedyPicker(const ConflictState& st) {
    for (NodeId v = 0; v < st.graph().node_count(); ++v)
      if (st.switchable(v)) push(st, v);
  }

  void touch(const ConflictState& st, NodeId v) {
    if (st.switchable(v)) push(st, v);
  }

  std::optional<NodeId> pick(const ConflictState& st) {
    while (!heap_.empty()) {
      auto [removed, v] = heap_.top();
      removed = -removed;
      if (st.switchable(v) && 2 * st.conflicts(v) - st.graph().degree(v) == removed)
        return v;
      heap_.pop();
    }
    return std::nullopt;
  }

 private:
  void push(const ConflictState& st, NodeId v) {
    heap_.emplace(-(2 * st.conflicts(v) - st.graph().degree(v)), v);
  }
  // pair (-removed, id): std::priority_queue is a max-heap, so top() is the
  // smallest removal; among equal removals the comparison on the second
  // member must prefer the smallest id, hence greater<>.
  using Entry = std::pair<std::int64_t, NodeId>;
  struct Cmp {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Cmp> heap_;
};

// Uniform pick over the switchable set, maintained as a swap-removal vector.
class RandomPicker {
 public:
  RandomPicker(const ConflictState& st, std::uint64_t seed) : rng_(seed) {
    position_.assign(st.graph().node_count(), -1);
    for (NodeId v = 0; v < st.graph().node_count(); ++v)
      if (st.switchable(v)) insert(v);
  }

  void touch(const ConflictState& st, NodeId v) {
    bool now = st.switchable(v);
    bool was = position_[v] >= 0;
    if (now && !was) insert(v);
    else if (!now && was) erase(v);
  }

  std::optional<NodeId> pick() {
    if (members_.empty()) return std::nullopt;
    // modulo draw on a 64-bit stream; bias is negligible and the stream is
    // pinned by the standard, which keeps runs reproducible across builds
    return members_[rng_() % members_.size()];
  }

 private:
  void insert(NodeId v) {
    position_[v] = static_cast<std::int64_t>(members_.size());
    members_.push_back(v);
  }
  void erase(NodeId v) {
    std::int64_t at = position_[v];
    NodeId last = members_.back();
    members_[at] = last;
    position_[last] = at;
    members_.pop_back();
    position_[v] = -1;
  }
  std::mt19937_64 rng_;
  std::vector<NodeId> members_;
  std::vector<std::int64_t> position_;
};

}  // namespace detail

// Runs the scripted sequence.  Throws ScheduleViolation on an illegal entry
// and StepLimitExceeded when the cap is hit with script entries remaining.
inline Trace run_scripted(const Graph& g, const Coloring& initial, const ProcessConfig& cfg,
                          const Script& script) {
  ConflictState st(g, initial, cfg.kind, cfg.rule);
  std::vector<NodeId> order = expand_script(g, script);
  Trace trace;
  trace.initial = initial;
  trace.steps.reserve(order.size());
  std::int64_t limit = cfg.effective_step_limit(g);
  for (std::size_t i = 0; i < order.size(); ++i) {
    NodeId v = order[i];
    if (static_cast<std::int64_t>(i) >= limit) throw StepLimitExceeded(limit);
    if (v < 0 || v >= g.node_count() || !st.switchable(v)) throw ScheduleViolation(i, v);
    std::int64_t delta = st.flip_node(v);
    trace.steps.push_back({v, delta});
  }
  trace.stabilized = (st.switchable_count() == 0);
  return trace;
}

// Runs greedy-adversarial or uniform-random scheduling until stabilization.
// Throws StepLimitExceeded if the cap is reached first.
inline Trace run_free(const Graph& g, const Coloring& initial, const ProcessConfig& cfg,
                      SchedulerKind kind, std::uint64_t seed = 0) {
  if (kind == SchedulerKind::scripted)
    throw std::invalid_argument("scripted runs need a script; use run_scripted");
  ConflictState st(g, initial, cfg.kind, cfg.rule);
  Trace trace;
  trace.initial = initial;
  std::int64_t limit = cfg.effective_step_limit(g);

  std::optional<detail::GreedyPicker> greedy;
  std::optional<detail::RandomPicker> random;
  if (kind == SchedulerKind::greedy_adversary) greedy.emplace(st);
  else random.emplace(st, seed);

  for (;;) {
    std::optional<NodeId> next =
        greedy ? greedy->pick(st) : random->pick();
    if (!next) break;
    if (static_cast<std::int64_t>(trace.steps.size()) >= limit)
      throw StepLimitExceeded(limit);
    NodeId v = *next;
    std::int64_t delta = st.flip_node(v);
    trace.steps.push_back({v, delta});
    if (greedy) {
      greedy->touch(st, v);
      for (NodeId u : g.neighbors(v)) greedy->touch(st, u);
    } else {
      random->touch(st, v);
      for (NodeId u : g.neighbors(v)) random->touch(st, u);
    }
  }
  trace.stabilized = true;
  return trace;
}

inline std::int64_t count_initially_switchable(const Graph& g, const Coloring& col,
                                               ProcessKind kind, const SwitchRule& rule) {
  ConflictState st(g, col, kind, rule);
  return st.switchable_count();
}

// Per-step conflict ledger over the classifier's high-degree set.
//   original: edges conflicted in every state seen so far
//   rigid:    original edges whose endpoints are both high-degree
//   active:   currently conflicted edges that are not rigid
struct LedgerRow {
  std::int64_t step;    // 0 = initial state, k = after step k
  std::int64_t active;
  std::int64_t rigid;
};

struct LedgerRun {
  Trace trace;
  std::vector<LedgerRow> rows;
  // steps whose active count failed to decrease strictly
  std::vector<std::int64_t> violations;

  std::string rows_to_csv() const {
    std::string out = "step,active,rigid\n";
    for (const LedgerRow& r : rows)
      out += std::to_string(r.step) + "," + std::to_string(r.active) + "," +
             std::to_string(r.rigid) + "\n";
    return out;
  }
};

// Replays a trace while tracking the ledger.  The trace may come from any
// scheduler; legality is re-checked.
inline LedgerRun ledger_replay(const Graph& g, const Trace& trace, const ProcessConfig& cfg,
                               const DegreeClassifier& classifier) {
  ConflictState st(g, trace.initial, cfg.kind, cfg.rule);
  std::vector<std::uint8_t> high(g.node_count(), 0);
  for (NodeId v = 0; v < g.node_count(); ++v)
    high[v] = classifier.is_high_degree(g.degree(v)) ? 1 : 0;

  std::vector<std::uint8_t> conflicted(g.edge_count(), 0);
  std::vector<std::uint8_t> original(g.edge_count(), 0);
  std::int64_t conflicted_count = 0, rigid_count = 0;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    auto [u, v] = g.edges()[e];
    if (edge_conflicted(cfg.kind, trace.initial[u], trace.initial[v])) {
      conflicted[e] = original[e] = 1;
      ++conflicted_count;
      if (high[u] && high[v]) ++rigid_count;
    }
  }

  LedgerRun run;
  run.trace.initial = trace.initial;
  run.rows.push_back({0, conflicted_count - rigid_count, rigid_count});

  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    NodeId v = trace.steps[i].node;
    if (!st.switchable(v)) throw ScheduleViolation(i, v);
    auto edge_ids = g.incident_edges(v);
    auto nbrs = g.neighbors(v);
    for (NodeId idx = 0; idx < nbrs.size(); ++idx) {
      EdgeId e = edge_ids.begin()[idx];
      NodeId u = nbrs.begin()[idx];
      if (conflicted[e]) {
        conflicted[e] = 0;
        --conflicted_count;
        if (original[e]) {
          original[e] = 0;  // once resolved, never original again
          if (high[u] && high[v]) --rigid_count;
        }
      } else {
        conflicted[e] = 1;
        ++conflicted_count;
      }
    }
    std::int64_t delta = st.flip_node(v);
    run.trace.steps.push_back({v, delta});
    std::int64_t active = conflicted_count - rigid_count;
    if (active >= run.rows.back().active)
      run.violations.push_back(static_cast<std::int64_t>(i) + 1);
    run.rows.push_back({static_cast<std::int64_t>(i) + 1, active, rigid_count});
  }
  run.trace.stabilized = (st.switchable_count() == 0);
  return run;
}

// Convenience: free-scheduled run plus its ledger.
inline LedgerRun run_with_ledger(const Graph& g, const Coloring& initial,
                                 const ProcessConfig& cfg, SchedulerKind scheduler,
                                 const DegreeClassifier& classifier, std::uint64_t seed = 0) {
  Trace t = run_free(g, initial, cfg, scheduler, seed);
  return ledger_replay(g, t, cfg, classifier);
}

}  // namespace inflab
