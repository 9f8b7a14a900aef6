#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <inflab/coloring.hpp>
#include <inflab/dynamics.hpp>
#include <inflab/engine.hpp>
#include <inflab/graph.hpp>
#include <inflab/rules.hpp>
#include <inflab/scheduler.hpp>
#include <inflab/trace.hpp>

namespace inflab {

struct ConstructionRun {
  Graph graph;
  Coloring initial;
  ScheduleBundle schedule;
};

// ---------------------------------------------------------------------------
// edge gadget: disjoint union of single edges; the second endpoint of every
// edge is marked as "designated".  The designated group is a marker set, not
// a shared-neighborhood group.

struct EdgeGadgetParams {
  std::int64_t copies = 1;
};

inline Graph gen_edge_gadget(const EdgeGadgetParams& p) {
  if (p.copies < 1) throw std::invalid_argument("edge gadget needs copies >= 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> designated;
  edges.reserve(p.copies);
  for (std::int64_t i = 0; i < p.copies; ++i) {
    NodeId u = static_cast<NodeId>(2 * i);
    edges.push_back({u, u + 1});
    designated.push_back(u + 1);
  }
  return Graph(static_cast<NodeId>(2 * p.copies), std::move(edges),
               {{"designated", std::move(designated)}});
}

// ---------------------------------------------------------------------------
// amplifier trees: full binary trees whose root can be driven to a target
// color with a probability that grows with depth.  Internal nodes flip once
// both children carry the target color; two supporters out of at most three
// neighbors meet every threshold up to 2/3, so this works for any
// proportional rule with lambda <= 1/3 (and for basic switching).

inline boost::multiprecision::cpp_rational amplifier_recurrence(int depth) {
  if (depth < 0) throw std::invalid_argument("amplifier depth must be >= 0");
  using boost::multiprecision::cpp_rational;
  cpp_rational p(1, 2);
  for (int k = 0; k < depth; ++k) p = cpp_rational(1, 2) + p * p / 2;
  return p;
}

// heap layout: root 0, children of k are 2k+1 and 2k+2
inline Graph gen_amplifier_tree(int depth) {
  if (depth < 0) throw std::invalid_argument("amplifier depth must be >= 0");
  if (depth > 20) throw std::invalid_argument("amplifier depth too large");
  NodeId n = static_cast<NodeId>((1ll << (depth + 1)) - 1);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 0; 2 * v + 2 < n; ++v) {
    edges.push_back({v, 2 * v + 1});
    edges.push_back({v, 2 * v + 2});
  }
  return Graph(n, std::move(edges), {{"root", {0}}});
}

// Flips appended children-first; a node is scheduled only when both child
// subtrees end up target-colored, which matches the recurrence exactly.
inline bool amplifier_plan_flips(const Coloring& col, NodeId v, NodeId n, Color target,
                                 std::vector<NodeId>& flips) {
  NodeId l = 2 * v + 1, r = 2 * v + 2;
  if (r >= n) return col[v] == target;  // leaves are never switched
  bool bl = amplifier_plan_flips(col, l, n, target, flips);
  bool br = amplifier_plan_flips(col, r, n, target, flips);
  if (col[v] == target) return true;
  if (bl && br) {
    flips.push_back(v);
    return true;
  }
  return false;
}

inline std::vector<NodeId> amplifier_blackening_script(const Graph& g, const Coloring& col,
                                                       Color target = Color::black) {
  std::vector<NodeId> flips;
  amplifier_plan_flips(col, 0, g.node_count(), target, flips);
  return flips;
}

// ---------------------------------------------------------------------------
// degree ladder: equal-width levels, consecutive levels joined as D-regular
// circulant bipartite graphs with doubling D.  Used on its own for the
// alternating color-swap demonstrations and embedded by the tower builder.

struct DegreeLadderParams {
  int levels = 4;
  NodeId width = 64;
  int d0 = 8;
};

struct LadderLayout {
  std::vector<std::vector<NodeId>> level;
  std::vector<int> gap_degree;  // gap i joins level i and i+1
};

inline void add_circulant_gap(std::vector<std::pair<NodeId, NodeId>>& edges,
                              const std::vector<NodeId>& lo, const std::vector<NodeId>& hi,
                              int degree) {
  if (degree > static_cast<int>(hi.size()))
    throw std::invalid_argument("circulant degree exceeds level width");
  for (std::size_t j = 0; j < lo.size(); ++j)
    for (int r = 0; r < degree; ++r)
      edges.push_back({lo[j], hi[(j + r) % hi.size()]});
}

inline Graph gen_degree_ladder(const DegreeLadderParams& p, LadderLayout* lay_out = nullptr) {
  if (p.levels < 2 || p.width < 2 || p.d0 < 1)
    throw std::invalid_argument("ladder needs >= 2 levels, width >= 2, d0 >= 1");
  LadderLayout lay;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::map<std::string, std::vector<NodeId>> groups;
  NodeId next = 0;
  for (int i = 0; i < p.levels; ++i) {
    std::vector<NodeId> ids(p.width);
    for (NodeId j = 0; j < p.width; ++j) ids[j] = next++;
    groups["level_" + std::to_string(i + 1)] = ids;
    lay.level.push_back(std::move(ids));
  }
  int d = p.d0;
  for (int i = 0; i + 1 < p.levels; ++i) {
    add_circulant_gap(edges, lay.level[i], lay.level[i + 1], d);
    lay.gap_degree.push_back(d);
    d *= 2;
  }
  Graph g(next, std::move(edges), std::move(groups));
  if (lay_out) *lay_out = std::move(lay);
  return g;
}

// Sweeps every level repeatedly, flipping nodes toward the target whenever
// the rule allows it, until a full pass makes no progress.
inline std::vector<NodeId> ladder_sweep_script(const Graph& g, const LadderLayout& lay,
                                               const Coloring& initial, Color target,
                                               ProcessKind kind, const SwitchRule& rule) {
  ConflictState st(g, initial, kind, rule);
  std::vector<NodeId> flips;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& level : lay.level)
      for (NodeId v : level)
        if (st.coloring()[v] != target && st.switchable(v)) {
          st.flip_node(v);
          flips.push_back(v);
          progress = true;
        }
  }
  return flips;
}

// ---------------------------------------------------------------------------
// bipartite color swap: majority and minority dynamics coincide on bipartite
// graphs once the intended colors on one side are inverted.  Traces carry
// over node-for-node with identical deltas.

inline Coloring swap_side_colors(const Coloring& col, const std::vector<std::uint8_t>& side) {
  if (side.size() != col.size()) throw std::invalid_argument("side mask size mismatch");
  Coloring out = col;
  for (std::size_t v = 0; v < side.size(); ++v)
    if (side[v]) out.colors[v] = flip(out.colors[v]);
  return out;
}

inline Trace bipartite_color_swap(const Graph& g, const std::vector<std::uint8_t>& side,
                                  const Trace& t) {
  if (static_cast<NodeId>(side.size()) != g.node_count())
    throw std::invalid_argument("side mask size mismatch");
  Trace out;
  out.initial = swap_side_colors(t.initial, side);
  out.steps = t.steps;
  out.stabilized = t.stabilized;
  return out;
}

// ---------------------------------------------------------------------------
// quadratic family, minority flavor.  Pivot group of m nodes plus a parity
// node, two pools of m, two anchors of m+1.  Anchors pin the pools; the pivot
// group is pulsed between the colors while pool nodes feed it one switch at
// a time.

struct BasicMinorityParams {
  std::int64_t m = 16;
};

struct MinorityLayout {
  std::vector<NodeId> pivot, left_pool, right_pool, left_anchor, right_anchor;
  NodeId parity = -1;
};

namespace detail {

inline std::vector<NodeId> id_range(NodeId from, std::int64_t count) {
  std::vector<NodeId> ids(count);
  for (std::int64_t i = 0; i < count; ++i) ids[i] = from + static_cast<NodeId>(i);
  return ids;
}

inline void add_complete_bipartite(std::vector<std::pair<NodeId, NodeId>>& edges,
                                   const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  for (NodeId u : a)
    for (NodeId v : b) edges.push_back({u, v});
}

inline std::int64_t count_color(const Coloring& col, const std::vector<NodeId>& ids, Color c) {
  std::int64_t k = 0;
  for (NodeId v : ids) k += (col[v] == c);
  return k;
}

}  // namespace detail

inline Graph basic_minority_graph(const BasicMinorityParams& p, MinorityLayout* lay_out = nullptr) {
  const std::int64_t m = p.m;
  if (m < 12) throw std::invalid_argument("minority construction needs m >= 12");
  MinorityLayout lay;
  NodeId next = 0;
  lay.pivot = detail::id_range(next, m); next += m;
  lay.parity = next++;
  lay.left_pool = detail::id_range(next, m); next += m;
  lay.right_pool = detail::id_range(next, m); next += m;
  lay.left_anchor = detail::id_range(next, m + 1); next += m + 1;
  lay.right_anchor = detail::id_range(next, m + 1); next += m + 1;

  std::vector<std::pair<NodeId, NodeId>> edges;
  detail::add_complete_bipartite(edges, lay.pivot, lay.left_pool);
  detail::add_complete_bipartite(edges, lay.pivot, lay.right_pool);
  detail::add_complete_bipartite(edges, lay.pivot, {lay.parity});
  detail::add_complete_bipartite(edges, lay.left_pool, lay.left_anchor);
  detail::add_complete_bipartite(edges, lay.right_pool, lay.right_anchor);
  detail::add_complete_bipartite(edges, lay.left_anchor, lay.right_anchor);

  std::map<std::string, std::vector<NodeId>> groups = {
      {"pivot", lay.pivot},           {"parity", {lay.parity}},
      {"left_pool", lay.left_pool},   {"right_pool", lay.right_pool},
      {"left_anchor", lay.left_anchor}, {"right_anchor", lay.right_anchor}};
  Graph g(next, std::move(edges), std::move(groups));
  if (lay_out) *lay_out = std::move(lay);
  return g;
}

inline ScheduleBundle basic_minority_schedule(const Graph& g, const MinorityLayout& lay,
                                              const Coloring& initial) {
  const std::int64_t m = static_cast<std::int64_t>(lay.pivot.size());
  Coloring col = initial;
  Script script;
  std::int64_t steps = 0;
  auto flip1 = [&](NodeId v) {
    col[v] = flip(col[v]);
    script.push_back(v);
    ++steps;
  };

  // anchors first: the left anchor takes its forced color, the right anchor
  // the opposite one (guaranteed because the left anchor outnumbers a pool)
  std::int64_t wn = detail::count_color(col, lay.left_pool, Color::white) +
                    detail::count_color(col, lay.right_anchor, Color::white);
  Color ca = (wn <= m) ? Color::white : Color::black;  // minority preference
  for (NodeId v : lay.left_anchor)
    if (col[v] != ca) flip1(v);
  for (NodeId v : lay.right_anchor)
    if (col[v] == ca) flip1(v);

  // pool nodes pinned by their anchor: left nodes colored ca and right nodes
  // colored the opposite stay switchable until they are used up
  std::vector<NodeId> use_left, use_right;
  for (NodeId v : lay.left_pool)
    if (col[v] == ca) use_left.push_back(v);
  for (NodeId v : lay.right_pool)
    if (col[v] != ca) use_right.push_back(v);

  // left usables flip away from ca, right usables flip toward ca
  std::vector<NodeId>& dec = (ca == Color::white) ? use_left : use_right;  // lowers W
  std::vector<NodeId>& inc = (ca == Color::white) ? use_right : use_left;
  std::size_t di = 0, ii = 0;

  std::int64_t w0 = detail::count_color(col, lay.left_pool, Color::white) +
                    detail::count_color(col, lay.right_pool, Color::white) +
                    (col[lay.parity] == Color::white ? 1 : 0);
  std::int64_t w = w0;

  ScheduleBundle bundle;
  auto fail = [&](const std::string& why) {
    bundle.script.clear();
    bundle.good_event = false;
    bundle.failure_reason = why;
    bundle.diagnostics["usable_left"] = use_left.size();
    bundle.diagnostics["usable_right"] = use_right.size();
    bundle.diagnostics["initial_white_neighbors"] = w0;
    return bundle;
  };

  // enter the alternation at (pivot uniformly black, W = m+1)
  if (w >= m + 1) {
    for (NodeId v : lay.pivot)
      if (col[v] == Color::white) flip1(v);
    std::int64_t need = w - (m + 1);
    if (static_cast<std::int64_t>(dec.size()) < need) return fail("balance-event failure");
    for (std::int64_t k = 0; k < need; ++k) flip1(dec[di++]);
    w = m + 1;
  } else {
    for (NodeId v : lay.pivot)
      if (col[v] == Color::black) flip1(v);
    std::int64_t need = (m + 1) - w;
    if (static_cast<std::int64_t>(inc.size()) < need) return fail("balance-event failure");
    for (std::int64_t k = 0; k < need; ++k) flip1(inc[ii++]);
    w = m + 1;
    script.push_back(std::string("pivot"));  // all white, W = m+1: pulse to black
    for (NodeId v : lay.pivot) col[v] = Color::black;
    steps += m;
  }

  // each pair: one dec switch, full pulse to white, one inc switch, pulse back
  while (di < dec.size() && ii < inc.size()) {
    flip1(dec[di++]);  // W = m, black pivots see a same-color majority
    script.push_back(std::string("pivot"));
    for (NodeId v : lay.pivot) col[v] = Color::white;
    steps += m;
    flip1(inc[ii++]);  // W = m+1 again
    script.push_back(std::string("pivot"));
    for (NodeId v : lay.pivot) col[v] = Color::black;
    steps += m;
  }
  if (di < dec.size()) {
    flip1(dec[di++]);
    script.push_back(std::string("pivot"));
    for (NodeId v : lay.pivot) col[v] = Color::white;
    steps += m;
  }

  std::int64_t target = (m * m + 1) / 2;
  bundle.script = std::move(script);
  bundle.good_event = steps >= target;
  if (!bundle.good_event) {
    bundle.script.clear();
    bundle.failure_reason = "balance-event failure";
  }
  bundle.diagnostics["usable_left"] = use_left.size();
  bundle.diagnostics["usable_right"] = use_right.size();
  bundle.diagnostics["initial_white_neighbors"] = w0;
  bundle.diagnostics["projected_steps"] = steps;
  bundle.diagnostics["target_steps"] = target;
  bundle.diagnostics["preferred_color"] = (ca == Color::white) ? "white" : "black";
  return bundle;
}

inline ConstructionRun gen_basic_minority(const BasicMinorityParams& p, std::uint64_t seed) {
  MinorityLayout lay;
  Graph g = basic_minority_graph(p, &lay);
  Coloring col = random_coloring(g, seed);
  ScheduleBundle bundle = basic_minority_schedule(g, lay, col);
  if (bundle.good_event) {
    ProcessConfig cfg;
    cfg.kind = ProcessKind::minority;
    cfg.step_limit = 8 * static_cast<std::int64_t>(g.edge_count());
    run_scripted(g, col, cfg, bundle.script);  // throws if the plan is broken
  }
  return {std::move(g), std::move(col), std::move(bundle)};
}

// ---------------------------------------------------------------------------
// quadratic family, majority flavor.  Same pivot/pool skeleton; anchors are
// steered through per-index selector/trigger group chains instead of an
// anchor-to-anchor edge.  The requested m is adjusted so the group count h
// divides it with an odd quotient (no ties inside selector groups).

struct BasicMajorityParams {
  std::int64_t m = 16;
  double c0 = 0.6;  // h ~ c0 * ln(m), forced odd
};

struct MajorityLayout {
  std::vector<NodeId> pivot, left_pool, right_pool, left_anchor, right_anchor;
  std::vector<std::vector<NodeId>> left_selector, left_trigger, right_selector, right_trigger;
  NodeId parity = -1;
  std::int64_t m = 0;  // adjusted size
  std::int64_t h = 0;
};

inline std::pair<std::int64_t, std::int64_t> majority_adjusted_sizes(std::int64_t m, double c0) {
  if (m < 12) throw std::invalid_argument("majority construction needs m >= 12");
  if (c0 <= 0) throw std::invalid_argument("c0 must be positive");
  std::int64_t h = std::llround(c0 * std::log(static_cast<double>(m)));
  if (h < 1) h = 1;
  if (h % 2 == 0) ++h;
  std::int64_t q = std::llround(static_cast<double>(m) / static_cast<double>(h));
  if (q < 1) q = 1;
  if (q % 2 == 0) ++q;
  return {h * q, h};
}

inline Graph basic_majority_graph(const BasicMajorityParams& p, MajorityLayout* lay_out = nullptr) {
  auto [m, h] = majority_adjusted_sizes(p.m, p.c0);
  const std::int64_t q = m / h;
  MajorityLayout lay;
  lay.m = m;
  lay.h = h;
  NodeId next = 0;
  lay.pivot = detail::id_range(next, m); next += m;
  lay.parity = next++;
  lay.left_pool = detail::id_range(next, m); next += m;
  lay.right_pool = detail::id_range(next, m); next += m;
  lay.left_anchor = detail::id_range(next, m + 1); next += m + 1;
  lay.right_anchor = detail::id_range(next, m + 1); next += m + 1;
  for (std::int64_t i = 0; i < h; ++i) { lay.left_selector.push_back(detail::id_range(next, q)); next += q; }
  for (std::int64_t i = 0; i < h; ++i) { lay.left_trigger.push_back(detail::id_range(next, q)); next += q; }
  for (std::int64_t i = 0; i < h; ++i) { lay.right_selector.push_back(detail::id_range(next, q)); next += q; }
  for (std::int64_t i = 0; i < h; ++i) { lay.right_trigger.push_back(detail::id_range(next, q)); next += q; }

  std::vector<std::pair<NodeId, NodeId>> edges;
  detail::add_complete_bipartite(edges, lay.pivot, lay.left_pool);
  detail::add_complete_bipartite(edges, lay.pivot, lay.right_pool);
  detail::add_complete_bipartite(edges, lay.pivot, {lay.parity});
  detail::add_complete_bipartite(edges, lay.left_pool, lay.left_anchor);
  detail::add_complete_bipartite(edges, lay.right_pool, lay.right_anchor);
  for (std::int64_t i = 0; i < h; ++i) {
    detail::add_complete_bipartite(edges, lay.left_anchor, lay.left_selector[i]);
    detail::add_complete_bipartite(edges, lay.left_selector[i], lay.left_trigger[i]);
    detail::add_complete_bipartite(edges, lay.right_anchor, lay.right_selector[i]);
    detail::add_complete_bipartite(edges, lay.right_selector[i], lay.right_trigger[i]);
  }

  std::map<std::string, std::vector<NodeId>> groups = {
      {"pivot", lay.pivot},           {"parity", {lay.parity}},
      {"left_pool", lay.left_pool},   {"right_pool", lay.right_pool},
      {"left_anchor", lay.left_anchor}, {"right_anchor", lay.right_anchor}};
  for (std::int64_t i = 0; i < h; ++i) {
    groups["left_selector_" + std::to_string(i + 1)] = lay.left_selector[i];
    groups["left_trigger_" + std::to_string(i + 1)] = lay.left_trigger[i];
    groups["right_selector_" + std::to_string(i + 1)] = lay.right_selector[i];
    groups["right_trigger_" + std::to_string(i + 1)] = lay.right_trigger[i];
  }
  Graph g(next, std::move(edges), std::move(groups));
  if (lay_out) *lay_out = std::move(lay);
  return g;
}

namespace detail {

// Scripted steering for the majority construction.  Works on a scratch
// coloring with per-group counters; every flip it emits is majority-legal by
// the complete-bipartite structure, and the finished script is replayed for
// verification anyway.
class MajorityPlanner {
 public:
  MajorityPlanner(const MajorityLayout& lay, const Coloring& initial)
      : lay_(lay), col_(initial), m_(lay.m), h_(lay.h), q_(lay.m / lay.h) {}

  // target color for the left side; the right side takes the opposite.
  // first_left picks which side is steered (and pumped) first.
  ScheduleBundle run(Color left_target, bool first_left) {
    Color rt = flip(left_target);
    steps_ = 0;
    script_.clear();
    ok_ = true;
    why_.clear();

    std::int64_t reserve = pairs_needed();
    if (first_left) {
      steer_side(true, left_target, reserve);
      steer_side(false, rt, reserve);
    } else {
      steer_side(false, rt, reserve);
      steer_side(true, left_target, reserve);
    }
    if (ok_) lock_sides(left_target);
    if (ok_) alternate(left_target);

    ScheduleBundle b;
    std::int64_t target = (m_ * m_ + 1) / 2;
    b.good_event = ok_ && steps_ >= target;
    if (b.good_event) b.script = script_;
    else if (why_.empty()) why_ = "balance-event failure";
    b.failure_reason = b.good_event ? "" : why_;
    b.diagnostics["projected_steps"] = steps_;
    b.diagnostics["target_steps"] = target;
    b.diagnostics["left_target"] = left_target == Color::white ? "white" : "black";
    b.diagnostics["steered_left_first"] = first_left;
    b.diagnostics["alternation_pairs"] = pairs_done_;
    return b;
  }

 private:
  std::int64_t count(const std::vector<NodeId>& ids, Color c) const {
    return count_color(col_, ids, c);
  }
  std::int64_t whites_around_pivot() const {
    return count(lay_.left_pool, Color::white) + count(lay_.right_pool, Color::white) +
           (col_[lay_.parity] == Color::white ? 1 : 0);
  }
  std::int64_t pivot_count(Color c) const { return count(lay_.pivot, c); }

  void flip1(NodeId v) {
    col_[v] = flip(col_[v]);
    script_.push_back(v);
    ++steps_;
  }
  void flip_group_members(const std::vector<NodeId>& ids, Color away_from) {
    for (NodeId v : ids)
      if (col_[v] == away_from) flip1(v);
  }

  std::int64_t pairs_needed() const {
    // enough alternation pairs to clear the quadratic target on their own
    std::int64_t target = (m_ * m_ + 1) / 2;
    return target / (2 * m_ + 2) + 2;
  }

  // flips every group member toward t whenever the group condition allows it;
  // returns true if anything moved
  bool fixpoint_pass(bool left, Color t) {
    const auto& anchor = left ? lay_.left_anchor : lay_.right_anchor;
    const auto& pool = left ? lay_.left_pool : lay_.right_pool;
    const auto& sel = left ? lay_.left_selector : lay_.right_selector;
    const auto& trig = left ? lay_.left_trigger : lay_.right_trigger;
    bool moved = false;
    for (std::int64_t i = 0; i < h_; ++i) {
      // trigger nodes follow a strict selector majority (q odd, never tied)
      if (2 * count(sel[i], t) > q_ && count(trig[i], flip(t)) > 0) {
        flip_group_members(trig[i], flip(t));
        moved = true;
      }
      // selector nodes see anchor + their trigger group, m+q+1 odd
      std::int64_t support = count(anchor, t) + count(trig[i], t);
      if (2 * support > m_ + q_ + 1 && count(sel[i], flip(t)) > 0) {
        flip_group_members(sel[i], flip(t));
        moved = true;
      }
    }
    std::int64_t anchor_support = count(pool, t);
    for (std::int64_t i = 0; i < h_; ++i) anchor_support += count(sel[i], t);
    if (anchor_support >= m_ + 1 && count(anchor, flip(t)) > 0) {
      flip_group_members(anchor, flip(t));
      moved = true;
    }
    return moved;
  }

  // makes the pivot group uniformly c if the pool majority allows it
  bool pulse_pivot(Color c) {
    std::int64_t w = whites_around_pivot();
    bool legal = (c == Color::white) ? (w >= m_ + 1) : (w <= m_);
    if (!legal) return false;
    flip_group_members(lay_.pivot, flip(c));
    return true;
  }

  // flips pool nodes toward t one at a time, keeping `reserve` of them for
  // the alternation; used to close an anchor deficit
  bool pump_pool(bool left, Color t, std::int64_t want, std::int64_t reserve) {
    const auto& pool = left ? lay_.left_pool : lay_.right_pool;
    const auto& anchor = left ? lay_.left_anchor : lay_.right_anchor;
    std::int64_t inventory = count(pool, flip(t));
    if (inventory - want < reserve) return false;
    // pool nodes see pivot + anchor (2m+1 neighbors, odd)
    auto pool_flip_legal = [&] {
      return pivot_count(t) + count(anchor, t) >= m_ + 1;
    };
    if (!pool_flip_legal()) {
      // try to drag the pivot group toward t first, via the parity node if
      // the pool majority is one short
      if (!pulse_pivot(t)) {
        std::int64_t w = whites_around_pivot();
        bool parity_helps = (t == Color::white) ? (w == m_ && col_[lay_.parity] == Color::black)
                                                : (w == m_ + 1 && col_[lay_.parity] == Color::white);
        if (parity_helps && 2 * pivot_count(flip(col_[lay_.parity])) > m_) {
          flip1(lay_.parity);
          if (!pulse_pivot(t)) return false;
        } else {
          return false;
        }
      }
      if (!pool_flip_legal()) return false;
    }
    std::int64_t done = 0;
    for (NodeId v : pool) {
      if (done == want) break;
      if (col_[v] == flip(t)) {
        flip1(v);
        ++done;
      }
    }
    return done == want;
  }

  void steer_side(bool left, Color t, std::int64_t reserve) {
    if (!ok_) return;
    const auto& anchor = left ? lay_.left_anchor : lay_.right_anchor;
    const auto& pool = left ? lay_.left_pool : lay_.right_pool;
    const auto& sel = left ? lay_.left_selector : lay_.right_selector;
    while (fixpoint_pass(left, t)) {}
    if (count(anchor, flip(t)) == 0) return;  // anchor already uniform
    // anchor deficit: pump pool nodes toward t, then resweep
    std::int64_t support = count(pool, t);
    for (std::int64_t i = 0; i < h_; ++i) support += count(sel[i], t);
    std::int64_t deficit = (m_ + 1) - support;
    if (deficit > 0 && !pump_pool(left, t, deficit, reserve)) {
      ok_ = false;
      why_ = left ? "anchor-event failure (left)" : "anchor-event failure (right)";
      return;
    }
    while (fixpoint_pass(left, t)) {}
    if (count(anchor, flip(t)) != 0) {
      ok_ = false;
      why_ = "anchor-event failure";
    }
  }

  // once both anchors are uniform, saturating the selector chains locks them
  void lock_sides(Color left_target) {
    while (fixpoint_pass(true, left_target) | fixpoint_pass(false, flip(left_target))) {}
  }

  void alternate(Color left_target) {
    // usable pool nodes flip toward their side's target; the side whose
    // target is black lowers the white count around the pivot
    std::vector<NodeId> to_white, to_black;
    const auto& white_pool = (left_target == Color::white) ? lay_.left_pool : lay_.right_pool;
    const auto& black_pool = (left_target == Color::white) ? lay_.right_pool : lay_.left_pool;
    for (NodeId v : white_pool)
      if (col_[v] == Color::black) to_white.push_back(v);
    for (NodeId v : black_pool)
      if (col_[v] == Color::white) to_black.push_back(v);

    std::int64_t w = whites_around_pivot();
    std::size_t bi = 0, wi = 0;
    // entry: pivot uniformly white with W = m+1
    if (w >= m_ + 1) {
      flip_group_members(lay_.pivot, Color::black);
      std::int64_t need = w - (m_ + 1);
      if (static_cast<std::int64_t>(to_black.size()) < need) {
        ok_ = false;
        why_ = "balance-event failure";
        return;
      }
      for (std::int64_t k = 0; k < need; ++k) flip1(to_black[bi++]);
    } else {
      flip_group_members(lay_.pivot, Color::white);
      std::int64_t need = (m_ + 1) - w;
      if (static_cast<std::int64_t>(to_white.size()) < need) {
        ok_ = false;
        why_ = "balance-event failure";
        return;
      }
      for (std::int64_t k = 0; k < need; ++k) flip1(to_white[wi++]);
      script_.push_back(std::string("pivot"));  // blacks see W = m+1 whites
      for (NodeId v : lay_.pivot) col_[v] = Color::white;
      steps_ += m_;
    }

    pairs_done_ = 0;
    while (bi < to_black.size() && wi < to_white.size()) {
      flip1(to_black[bi++]);  // W = m: white pivots see a black majority
      script_.push_back(std::string("pivot"));
      for (NodeId v : lay_.pivot) col_[v] = Color::black;
      steps_ += m_;
      flip1(to_white[wi++]);  // W = m+1
      script_.push_back(std::string("pivot"));
      for (NodeId v : lay_.pivot) col_[v] = Color::white;
      steps_ += m_;
      ++pairs_done_;
    }
    if (bi < to_black.size()) {
      flip1(to_black[bi++]);
      script_.push_back(std::string("pivot"));
      for (NodeId v : lay_.pivot) col_[v] = Color::black;
      steps_ += m_;
    }
  }

  const MajorityLayout& lay_;
  Coloring col_;
  std::int64_t m_, h_, q_;
  Script script_;
  std::int64_t steps_ = 0;
  std::int64_t pairs_done_ = 0;
  bool ok_ = true;
  std::string why_;
};

}  // namespace detail

inline ScheduleBundle basic_majority_schedule(const Graph& g, const MajorityLayout& lay,
                                              const Coloring& initial) {
  (void)g;
  ScheduleBundle best;
  best.good_event = false;
  best.failure_reason = "selector-event failure";
  const std::pair<Color, bool> variants[] = {{Color::white, true},
                                             {Color::white, false},
                                             {Color::black, true},
                                             {Color::black, false}};
  for (auto [t, first_left] : variants) {
    detail::MajorityPlanner planner(lay, initial);
    ScheduleBundle b = planner.run(t, first_left);
    if (b.good_event) return b;
    best.diagnostics["attempt_" + std::string(t == Color::white ? "white" : "black") +
                     (first_left ? "_left" : "_right")] = b.failure_reason;
  }
  return best;
}

inline ConstructionRun gen_basic_majority(const BasicMajorityParams& p, std::uint64_t seed) {
  MajorityLayout lay;
  Graph g = basic_majority_graph(p, &lay);
  Coloring col = random_coloring(g, seed);
  ScheduleBundle bundle = basic_majority_schedule(g, lay, col);
  if (bundle.good_event) {
    ProcessConfig cfg;
    cfg.kind = ProcessKind::majority;
    cfg.step_limit = 8 * static_cast<std::int64_t>(g.edge_count());
    run_scripted(g, col, cfg, bundle.script);
  }
  return {std::move(g), std::move(col), std::move(bundle)};
}

}  // namespace inflab
