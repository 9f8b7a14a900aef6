#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <inflab/coloring.hpp>
#include <inflab/constructions.hpp>
#include <inflab/dynamics.hpp>
#include <inflab/engine.hpp>
#include <inflab/graph.hpp>
#include <inflab/rules.hpp>
#include <inflab/scheduler.hpp>
#include <inflab/trace.hpp>

namespace inflab {

// Smallest conflict count that triggers the proportional rule at this degree.
inline std::int64_t prop_threshold(const Rational& lambda, std::int64_t degree) {
  __int128 num = static_cast<__int128>(lambda.num + lambda.den) * degree;
  std::int64_t den = 2 * lambda.den;
  return static_cast<std::int64_t>((num + den - 1) / den);
}

// ---------------------------------------------------------------------------
// proportional tower: a majority instance at threshold parameter lambda that
// drags a small embedded instance through a scripted run at the stronger
// parameter 2*lambda/(1-lambda).  Two mirrored halves are built; one darkens
// black, the other white.  Each half is
//
//   feeder trees -> anchor stack  (stays dark, pins the control row)
//               \-> reversal stack (whitens except its withheld final row)
//   control row  = hold half + flip half, wired to both stack finals
//   filler pads  top every control node's output degree up to exactly m
//
// The control row first flips dark against the anchor plus the still-random
// reversal final, the embedded nodes wired into this half settle to their
// start colors, then the reversal final flips light and drags the flip half
// after it.  With one half of each control row dark forever and the other
// light, every embedded node sees a fixed conflict offset of c, which turns
// the host rule at lambda into the embedded rule at 2*lambda/(1-lambda).

struct ProportionalTowerParams {
  Rational lambda{1, 4};  // host threshold parameter, in (0, 1/3)
  std::int64_t m = 32;    // base width; the embedded instance has m nodes
  double alpha = 8.0;     // anchor stack width over m (>= 4; window math may need more)
  double mu = 0.5;        // row degree growth, gap degrees scale by 1+mu; the
                          // gentler default widens every row's switch margin
                          // against unlucky initial colorings
  double p = 0.775;       // target per-tree success probability, sets the depth
  double c0 = 1.55;       // base gap degree d0 = ceil(c0 * ln n), solved as a fixed point
  double epsilon = 0.0;   // slack reserve; 0 picks min(delta/2, (1-2l-ml)/(2-2m))
};

struct TowerResolved {
  Rational lambda;       // host threshold parameter
  Rational lambda_inner; // parameter certified for the embedded instance
  std::int64_t m = 0;
  std::int64_t m3 = 0;        // control row width, 2m
  std::int64_t w_anchor = 0;  // anchor stack width, alpha*m
  std::int64_t w_reversal = 0;  // reversal stack width, 2*alpha*m
  int depth = 0;                // feeder tree depth
  std::int64_t tree_nodes = 0;  // nodes per feeder tree
  std::int64_t d0 = 0;          // base gap degree
  std::int64_t trees_per_collector = 0;  // 4*d0
  int levels = 0;                        // rows per stack
  std::vector<std::int64_t> gap;  // circulant degree between consecutive rows
  std::int64_t k = 0;             // embedded side size, m/2
  std::int64_t c = 0;             // wiring edges per embedded node into each control half
  std::int64_t t_inner = 0;       // embedded switching threshold; equals c
  std::int64_t control_degree = 0;  // 3*w_anchor + m, uniform over the control row
  std::int64_t core_degree = 0;     // k + 2c, uniform over embedded nodes
  std::int64_t pads_per_tower = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::int64_t node_count = 0;
  std::int64_t edge_count = 0;
};

// Embedded instance handed to the tower: a graph in its own id space, the
// coloring the host must establish before the run, and a switch sequence
// that is legal under the majority process at `lambda`.
struct PropBlackBox {
  Graph graph;
  Coloring target_initial;
  Script script;
  Rational lambda;
  std::int64_t claimed_length = 0;
};

struct TowerStackLayout {
  NodeId tree_base = 0;
  std::int64_t tree_count = 0;
  std::vector<std::vector<NodeId>> row;  // row[0] collects the trees, row.back() is the final
};

struct HalfTowerLayout {
  Color dark = Color::black;
  TowerStackLayout anchor;
  TowerStackLayout reversal;
  std::vector<NodeId> control;
  std::vector<NodeId> hold_half;
  std::vector<NodeId> flip_half;
  std::vector<NodeId> filler;
};

struct TowerLayout {
  TowerResolved r;
  std::array<HalfTowerLayout, 2> half;  // half[0] darkens black, half[1] white
  std::vector<NodeId> core;             // host ids of the embedded nodes, by embedded id
  PropBlackBox box;
};

// Complete bipartite wiring test instance on m nodes: side L targets white,
// side R black, and the script borrows s = k - t right nodes to walk every
// left node across the threshold before returning them.  Replayed here at
// construction so a broken sequence never leaves this function.
inline PropBlackBox make_core_instance(std::int64_t m, const Rational& lambda) {
  if (m < 4 || m % 2 != 0) throw std::invalid_argument("core instance needs even m >= 4");
  if (lambda.num <= 0 || 3 * lambda.num >= lambda.den)
    throw std::invalid_argument("core instance needs lambda in (0, 1/3)");
  std::int64_t k = m / 2;
  PropBlackBox box;
  box.lambda = Rational(2 * lambda.num, lambda.den - lambda.num);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(k * k));
  for (std::int64_t i = 0; i < k; ++i)
    for (std::int64_t j = 0; j < k; ++j)
      edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(k + j)});
  box.graph = Graph(static_cast<NodeId>(m), std::move(edges),
                    {{"left", detail::id_range(0, k)},
                     {"right", detail::id_range(static_cast<NodeId>(k), k)}});
  box.target_initial = Coloring(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i)
    box.target_initial[i] = i < k ? Color::white : Color::black;

  std::int64_t t = prop_threshold(box.lambda, k);
  std::int64_t s = k - t;  // >= 0 whenever lambda < 1/3
  for (std::int64_t i = 0; i < s; ++i) {
    box.script.push_back(static_cast<NodeId>(i));
    box.script.push_back(static_cast<NodeId>(k + i));
  }
  for (std::int64_t i = s; i < k; ++i) box.script.push_back(static_cast<NodeId>(i));
  for (std::int64_t i = 0; i < s; ++i) box.script.push_back(static_cast<NodeId>(k + i));
  box.claimed_length = k + 2 * s;

  ProcessConfig cfg;
  cfg.kind = ProcessKind::majority;
  cfg.rule = SwitchRule::proportional(box.lambda);
  Trace tr = run_scripted(box.graph, box.target_initial, cfg, box.script);
  Coloring fin = tr.final_coloring();
  for (std::int64_t i = 0; i < m; ++i)
    if (fin[i] != Color::black) throw std::logic_error("core instance: run does not end all black");
  if (static_cast<std::int64_t>(tr.length()) != box.claimed_length)
    throw std::logic_error("core instance: length mismatch");
  return box;
}

namespace detail {

// Circulant gap with offsets spread by a stride coprime to the width: node j
// joins hi[(j + r*stride) % width] for r < degree.  Consecutive offsets would
// let neighboring nodes share almost their entire window, and unlucky
// colorings then stall in contiguous arcs that starve whole rows; the spread
// keeps pairwise window overlap small, so per-node support concentrates.
inline void add_spread_gap(std::vector<std::pair<NodeId, NodeId>>& edges,
                           const std::vector<NodeId>& lo, const std::vector<NodeId>& hi,
                           std::int64_t degree) {
  auto w = static_cast<std::int64_t>(hi.size());
  if (degree > w || lo.size() != hi.size())
    throw std::invalid_argument("spread gap needs equal widths and degree <= width");
  auto stride = std::max<std::int64_t>(1, std::llround(static_cast<double>(w) * 0.6180339887));
  while (std::gcd(stride, w) != 1) ++stride;
  for (std::size_t j = 0; j < lo.size(); ++j)
    for (std::int64_t r = 0; r < degree; ++r)
      edges.push_back({lo[j], hi[static_cast<std::size_t>(
                                 (static_cast<std::int64_t>(j) + r * stride) % w)]});
}

inline boost::multiprecision::cpp_rational exact_unit_rational(double x) {
  int e = 0;
  double fr = std::frexp(x, &e);  // x = fr * 2^e with fr in [0.5, 1)
  auto mant = static_cast<std::int64_t>(std::ldexp(fr, 53));
  boost::multiprecision::cpp_int num = mant, den = 1;
  int shift = 53 - e;
  if (shift >= 0) den <<= shift;
  else num <<= -shift;
  return boost::multiprecision::cpp_rational(num, den);
}

}  // namespace detail

inline TowerResolved resolve_tower_params(const ProportionalTowerParams& p) {
  TowerResolved r;
  if (p.lambda.num <= 0 || 3 * p.lambda.num >= p.lambda.den)
    throw std::invalid_argument("tower needs lambda in (0, 1/3)");
  r.lambda = p.lambda;
  if (p.m < 4 || p.m % 2 != 0) throw std::invalid_argument("tower needs even m >= 4");
  r.m = p.m;
  r.m3 = 2 * p.m;
  if (!(p.alpha >= 4.0)) throw std::invalid_argument("tower needs alpha >= 4");
  double wa = p.alpha * static_cast<double>(p.m);
  r.w_anchor = std::llround(wa);
  if (std::abs(wa - static_cast<double>(r.w_anchor)) > 1e-6)
    throw std::invalid_argument("tower needs alpha*m integral");
  r.w_reversal = 2 * r.w_anchor;
  if (!(p.mu > 0.0) || p.mu > 1.0) throw std::invalid_argument("tower needs mu in (0, 1]");
  if (!(p.p > 0.0) || !(p.p < 1.0)) throw std::invalid_argument("tower needs p in (0, 1)");

  {  // feeder depth: first depth whose root success probability reaches p
    using boost::multiprecision::cpp_rational;
    cpp_rational target = detail::exact_unit_rational(p.p);
    cpp_rational q(1, 2);
    int depth = 0;
    while (q < target) {
      q = cpp_rational(1, 2) + q * q / 2;
      if (++depth > 20)
        throw std::invalid_argument("tower target probability needs tree depth > 20; lower p");
    }
    if (depth < 1) throw std::invalid_argument("tower needs p > 1/2");
    r.depth = depth;
    r.tree_nodes = (std::int64_t{1} << (depth + 1)) - 1;
  }

  // embedded instance numbers depend only on lambda and m
  std::int64_t a = p.lambda.num, b = p.lambda.den;
  r.lambda_inner = Rational(2 * a, b - a);
  r.k = p.m / 2;
  {
    __int128 num = static_cast<__int128>(a + b) * r.k;
    std::int64_t den = 2 * (b - a);
    r.c = static_cast<std::int64_t>((num + den - 1) / den);
  }
  r.t_inner = prop_threshold(r.lambda_inner, r.k);
  if (r.t_inner != r.c) throw std::logic_error("tower: embedded threshold mismatch");
  r.core_degree = r.k + 2 * r.c;
  // the host rule must trigger embedded nodes at exactly 2c conflicts, so the
  // fixed offset of c from the control halves reproduces the embedded rule
  if (prop_threshold(r.lambda, r.core_degree) != 2 * r.c)
    throw std::logic_error("tower: threshold equivalence broken");
  r.pads_per_tower = r.m3 * r.m - 2 * r.k * r.c;

  if (!(p.c0 > 0.0)) throw std::invalid_argument("tower needs c0 > 0");
  auto ladder_of = [&](std::int64_t d0, std::vector<std::int64_t>& gap) {
    gap.clear();
    std::int64_t d = d0;
    int levels = 1;
    while (d < r.w_anchor) {  // stop once a row's output degree covers half the main stack
      gap.push_back(d);
      d = static_cast<std::int64_t>(std::ceil((1.0 + p.mu) * static_cast<double>(d)));
      if (++levels > 64) throw std::invalid_argument("tower row growth stalled");
    }
    return levels;
  };
  auto sizes_of = [&](std::int64_t d0, const std::vector<std::int64_t>& gap, int levels,
                      std::int64_t& nodes, std::int64_t& edges) {
    std::int64_t widths = r.w_anchor + r.w_reversal;
    std::int64_t trees = widths * 4 * d0;
    std::int64_t gap_sum = 0;
    for (std::int64_t d : gap) gap_sum += d;
    std::int64_t per_nodes =
        trees * r.tree_nodes + widths * levels + r.m3 + r.pads_per_tower;
    std::int64_t per_edges = trees * (r.tree_nodes - 1) + trees + widths * gap_sum +
                             widths * r.m3 + 3 * r.pads_per_tower;
    nodes = 2 * per_nodes + 2 * r.k;
    edges = 2 * per_edges + r.k * r.k + 4 * r.k * r.c;
  };

  std::int64_t d0 = 8, prev = -1;
  std::vector<std::int64_t> gap;
  int levels = 0;
  std::int64_t nodes = 0, edges = 0;
  for (int it = 0; it < 64; ++it) {
    levels = ladder_of(d0, gap);
    sizes_of(d0, gap, levels, nodes, edges);
    auto next = static_cast<std::int64_t>(
        std::ceil(p.c0 * std::log(static_cast<double>(nodes))));
    if (next < 1) next = 1;
    if (next == d0) break;
    if (next == prev) {  // oscillating by one; settle on the larger
      d0 = std::max(d0, next);
      levels = ladder_of(d0, gap);
      sizes_of(d0, gap, levels, nodes, edges);
      break;
    }
    prev = d0;
    d0 = next;
  }
  r.d0 = d0;
  r.trees_per_collector = 4 * d0;
  r.levels = levels;
  r.gap = gap;
  r.node_count = nodes;
  r.edge_count = edges;
  if (r.d0 < 2) throw std::invalid_argument("tower needs a base gap degree >= 2; raise c0");
  if (r.levels < 2)
    throw std::invalid_argument("tower base gap degree already spans the stack; lower c0");
  for (std::int64_t d : r.gap)
    if (d > r.w_anchor)
      throw std::invalid_argument("tower gap degree exceeds the stack width; no regular gap");

  r.control_degree = 3 * r.w_anchor + r.m;
  // the flip half can only follow the reversal final if that row alone meets
  // the control threshold
  if (prop_threshold(r.lambda, r.control_degree) > r.w_reversal)
    throw std::invalid_argument("tower control row cannot reach its light window; raise alpha");
  // the reversal final must flip light against a fully dark control row
  if (prop_threshold(r.lambda, r.gap.back() + r.m3) > r.gap.back())
    throw std::invalid_argument("tower reversal final cannot flip against the control row");

  r.delta = (1.0 - 3.0 * p.lambda.value()) / 6.0;
  double eps = p.epsilon;
  if (eps <= 0.0) {
    eps = r.delta / 2.0;
    if (p.mu < 1.0) {
      double lam = p.lambda.value();
      eps = std::min(eps, (1.0 - 2.0 * lam - p.mu * lam) / (2.0 * (1.0 - p.mu)));
    }
  }
  if (!(eps > 0.0) || eps >= 0.5) throw std::invalid_argument("tower epsilon out of range");
  r.epsilon = eps;
  return r;
}

inline Graph gen_proportional_tower(const ProportionalTowerParams& p,
                                    TowerLayout* lay_out = nullptr) {
  TowerLayout lay;
  lay.r = resolve_tower_params(p);
  const TowerResolved& r = lay.r;
  lay.box = make_core_instance(r.m, r.lambda);

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(r.edge_count));
  std::map<std::string, std::vector<NodeId>> groups;
  NodeId next = 0;
  auto take = [&](std::int64_t count) {
    std::vector<NodeId> ids = detail::id_range(next, count);
    next += static_cast<NodeId>(count);
    return ids;
  };
  // round-robin spread of the embedded wiring over a control half; both
  // halves see the same loads, so one function covers hold and flip nodes
  std::int64_t spread = r.k * r.c;
  auto load_of = [&](std::int64_t j) { return spread / r.m + (j < spread % r.m ? 1 : 0); };

  for (int t = 0; t < 2; ++t) {
    HalfTowerLayout& ht = lay.half[t];
    ht.dark = t == 0 ? Color::black : Color::white;
    std::string pre = t == 0 ? "t1_" : "t2_";

    auto build_stack = [&](TowerStackLayout& s, std::int64_t width, const std::string& label) {
      s.tree_count = width * r.trees_per_collector;
      s.tree_base = next;
      next += static_cast<NodeId>(s.tree_count * r.tree_nodes);
      for (std::int64_t i = 0; i < s.tree_count; ++i) {
        NodeId base = s.tree_base + static_cast<NodeId>(i * r.tree_nodes);
        for (NodeId v = 0; 2 * v + 2 < r.tree_nodes; ++v) {
          edges.push_back({base + v, base + 2 * v + 1});
          edges.push_back({base + v, base + 2 * v + 2});
        }
      }
      s.row.resize(r.levels);
      for (int li = 0; li < r.levels; ++li) {
        s.row[li] = take(width);
        groups[pre + label + "_row_" + std::to_string(li + 1)] = s.row[li];
      }
      // consecutive blocks of trees feed each collector
      for (std::int64_t j = 0; j < width; ++j)
        for (std::int64_t i = 0; i < r.trees_per_collector; ++i)
          edges.push_back({s.tree_base + static_cast<NodeId>(
                               (j * r.trees_per_collector + i) * r.tree_nodes),
                           s.row[0][j]});
      for (int li = 0; li + 1 < r.levels; ++li)
        detail::add_spread_gap(edges, s.row[li], s.row[li + 1], r.gap[li]);
    };
    build_stack(ht.anchor, r.w_anchor, "anchor");
    build_stack(ht.reversal, r.w_reversal, "reversal");

    ht.control = take(r.m3);
    ht.hold_half.assign(ht.control.begin(), ht.control.begin() + r.m);
    ht.flip_half.assign(ht.control.begin() + r.m, ht.control.end());
    groups[pre + "control"] = ht.control;
    groups[pre + "hold"] = ht.hold_half;
    groups[pre + "flip"] = ht.flip_half;
    detail::add_complete_bipartite(edges, ht.anchor.row.back(), ht.control);
    detail::add_complete_bipartite(edges, ht.reversal.row.back(), ht.control);

    // pads top every control node's outputs up to exactly m; their two other
    // edges lean on the anchor final so they settle dark with it
    std::int64_t rr = 0;
    for (std::int64_t j = 0; j < r.m3; ++j) {
      std::int64_t pads = r.m - load_of(j % r.m);
      for (std::int64_t q = 0; q < pads; ++q) {
        NodeId pid = next++;
        ht.filler.push_back(pid);
        edges.push_back({pid, ht.control[j]});
        edges.push_back({pid, ht.anchor.row.back()[rr++ % r.w_anchor]});
        edges.push_back({pid, ht.anchor.row.back()[rr++ % r.w_anchor]});
      }
    }
    groups[pre + "filler"] = ht.filler;
  }

  lay.core = take(2 * r.k);
  groups["core"] = lay.core;
  groups["core_white_target"] =
      std::vector<NodeId>(lay.core.begin(), lay.core.begin() + r.k);
  groups["core_black_target"] =
      std::vector<NodeId>(lay.core.begin() + r.k, lay.core.end());
  for (const auto& [u, v] : lay.box.graph.edges())
    edges.push_back({lay.core[u], lay.core[v]});
  for (int side = 0; side < 2; ++side) {
    // black targets wire into the black-darkening half, white into the mirror
    const HalfTowerLayout& ht = lay.half[side];
    std::int64_t base = side == 0 ? r.k : 0;
    std::int64_t ch = 0, cf = 0;
    for (std::int64_t j = 0; j < r.k; ++j) {
      NodeId v = lay.core[base + j];
      for (std::int64_t e = 0; e < r.c; ++e)
        edges.push_back({v, ht.hold_half[ch++ % r.m]});
      for (std::int64_t e = 0; e < r.c; ++e)
        edges.push_back({v, ht.flip_half[cf++ % r.m]});
    }
  }

  if (next != r.node_count) throw std::logic_error("tower node budget mismatch");
  if (static_cast<std::int64_t>(edges.size()) != r.edge_count)
    throw std::logic_error("tower edge budget mismatch");
  Graph g(static_cast<NodeId>(r.node_count), std::move(edges), std::move(groups));
  if (lay_out) *lay_out = std::move(lay);
  return g;
}

// Adaptive schedule for one tower coloring.  Phases per half: joint fixpoint
// of trees and rows (reversal final withheld), dark window over the control
// row, embedded nodes of this half to their start colors, reversal final
// light, then the flip half.  Ends with the embedded run, where every step
// must fire.  On any blocked step the bundle reports the phase and keeps the
// diagnostics; the script is cleared since a partial plan certifies nothing.
inline ScheduleBundle proportional_tower_schedule(const Graph& g, const TowerLayout& lay,
                                                  const Coloring& initial) {
  const TowerResolved& r = lay.r;
  ConflictState st(g, initial, ProcessKind::majority, SwitchRule::proportional(r.lambda));
  ScheduleBundle out;
  auto color_of = [&](NodeId v) { return st.coloring()[v]; };
  auto flip_now = [&](NodeId v) {
    st.flip_node(v);
    out.script.push_back(v);
  };
  auto fail = [&](const std::string& why) {
    out.good_event = false;
    out.failure_reason = why;
    return false;
  };

  auto run_half = [&](const HalfTowerLayout& ht, nlohmann::json& dg) {
    Color dark = ht.dark, light = flip(dark);
    auto stack_pass = [&](const TowerStackLayout& s, Color target, bool with_final) {
      std::int64_t flips = 0;
      // trees in reverse id order, so children precede parents; leaves keep
      // their colors, a leaf switch would cost support upstream
      NodeId hi = s.tree_base + static_cast<NodeId>(s.tree_count * r.tree_nodes);
      for (NodeId v = hi - 1; v >= s.tree_base; --v) {
        std::int64_t local = (v - s.tree_base) % r.tree_nodes;
        if (2 * local + 2 >= r.tree_nodes) continue;
        if (color_of(v) != target && st.switchable(v)) { flip_now(v); ++flips; }
      }
      int top = with_final ? r.levels : r.levels - 1;
      for (int li = 0; li < top; ++li)
        for (NodeId v : s.row[li])
          if (color_of(v) != target && st.switchable(v)) { flip_now(v); ++flips; }
      return flips;
    };

    auto row_stuck = [&](const TowerStackLayout& s, Color target) {
      std::vector<std::int64_t> stuck(static_cast<std::size_t>(r.levels), 0);
      for (int li = 0; li < r.levels; ++li)
        for (NodeId v : s.row[li]) stuck[li] += color_of(v) != target;
      return stuck;
    };

    // the anchor and filler settle dark; the reversal stack is left random so
    // the control row can still lean on its final's initial colors
    int passes = 0;
    for (;;) {
      std::int64_t flips = stack_pass(ht.anchor, dark, true);
      for (NodeId v : ht.filler)
        if (color_of(v) != dark && st.switchable(v)) { flip_now(v); ++flips; }
      ++passes;
      if (flips == 0 || passes > 200) break;
    }
    dg["anchor_passes"] = passes;
    std::vector<std::int64_t> anchor_rows = row_stuck(ht.anchor, dark);
    dg["anchor_row_stuck"] = anchor_rows;
    std::int64_t anchor_stuck = 0;
    for (std::int64_t s : anchor_rows) anchor_stuck += s;
    dg["anchor_stuck"] = anchor_stuck;
    if (anchor_stuck > 0) return fail("anchor stack incomplete");
    std::int64_t filler_stuck = 0;
    for (NodeId v : ht.filler) filler_stuck += color_of(v) != dark;
    dg["filler_stuck"] = filler_stuck;
    if (filler_stuck > 0) return fail("filler incomplete");

    std::int64_t slack_min = std::numeric_limits<std::int64_t>::max();
    for (NodeId v : ht.control) {
      if (color_of(v) == dark) continue;
      slack_min = std::min(slack_min, st.conflicts(v) - prop_threshold(r.lambda, g.degree(v)));
      if (!st.switchable(v)) return fail("control dark window blocked");
      flip_now(v);
    }
    if (slack_min != std::numeric_limits<std::int64_t>::max())
      dg["dark_window_slack_min"] = slack_min;

    std::int64_t base = ht.dark == Color::black ? r.k : 0;
    for (std::int64_t j = 0; j < r.k; ++j) {
      NodeId v = lay.core[base + j];
      if (color_of(v) == dark) continue;
      if (!st.switchable(v)) return fail("core initialization blocked");
      flip_now(v);
    }

    // the whole reversal stack whitens as one fixpoint, final included; late
    // final flips feed support back into rows that stalled against it
    int wpasses = 0;
    for (;;) {
      std::int64_t flips = stack_pass(ht.reversal, light, true);
      ++wpasses;
      if (flips == 0 || wpasses > 200) break;
    }
    dg["reversal_passes"] = wpasses;
    std::vector<std::int64_t> reversal_rows = row_stuck(ht.reversal, light);
    dg["reversal_row_stuck"] = reversal_rows;
    dg["penultimate_stuck"] = reversal_rows[r.levels - 2];
    std::int64_t reversal_stuck = 0;
    for (int li = 0; li + 1 < r.levels; ++li) reversal_stuck += reversal_rows[li];
    if (reversal_stuck > 0) return fail("reversal stack incomplete");
    if (reversal_rows[r.levels - 1] > 0) return fail("reversal final blocked");

    std::int64_t ready = 0;
    for (NodeId v : ht.control) ready += st.switchable(v);
    dg["light_window_ready"] = ready;
    if (ready != r.m3) return fail("control light window incomplete");
    for (NodeId v : ht.flip_half) {
      if (color_of(v) == light) continue;
      if (!st.switchable(v)) return fail("control light window blocked");
      flip_now(v);
    }
    return true;
  };

  auto towers = nlohmann::json::array();
  for (int t = 0; t < 2 && out.good_event; ++t) {
    nlohmann::json dg;
    dg["darkens"] = lay.half[t].dark == Color::black ? "black" : "white";
    run_half(lay.half[t], dg);
    towers.push_back(std::move(dg));
  }
  out.diagnostics["towers"] = std::move(towers);

  if (out.good_event) {
    std::int64_t steps = 0;
    for (const ScriptEntry& e : lay.box.script) {
      NodeId v = lay.core[std::get<NodeId>(e)];
      if (!st.switchable(v)) {
        fail("core step blocked");
        break;
      }
      flip_now(v);
      ++steps;
    }
    out.diagnostics["core_steps"] = steps;
  }
  out.diagnostics["core_claimed"] = lay.box.claimed_length;
  out.diagnostics["schedule_length"] = out.script.size();
  if (!out.good_event) out.script.clear();
  return out;
}

// Structural self-checks over a built tower; every field should come back
// true (slack aside) for any parameter set the resolver accepts.
struct TowerAudit {
  bool counts_match = false;          // builder totals equal the closed-form budget
  bool control_degree_uniform = false;  // every control node has degree 3*w_anchor + m
  std::int64_t control_degree = 0;
  bool collector_inputs_exact = false;  // every collector sees 4*d0 feeder roots
  bool row_degrees_exact = false;       // rows carry exactly their budgeted gap degrees
  bool output_budget_exact = false;     // wiring plus filler tops every control node to m
  bool core_degree_exact = false;       // every embedded node has degree k + 2c
  bool threshold_match = false;         // host rule triggers embedded nodes at exactly 2c
  double core_degree_slack = 0.0;       // |(k+2c) - 2k/(1-lambda)|
  std::int64_t node_count = 0;
  std::int64_t edge_count = 0;
  double size_constant = 0.0;  // node_count / (m ln m)

  bool all_good() const {
    return counts_match && control_degree_uniform && collector_inputs_exact &&
           row_degrees_exact && output_budget_exact && core_degree_exact && threshold_match;
  }

  nlohmann::json to_json() const {
    return {{"counts_match", counts_match},
            {"control_degree_uniform", control_degree_uniform},
            {"control_degree", control_degree},
            {"collector_inputs_exact", collector_inputs_exact},
            {"row_degrees_exact", row_degrees_exact},
            {"output_budget_exact", output_budget_exact},
            {"core_degree_exact", core_degree_exact},
            {"threshold_match", threshold_match},
            {"core_degree_slack", core_degree_slack},
            {"node_count", node_count},
            {"edge_count", edge_count},
            {"size_constant", size_constant}};
  }
};

inline TowerAudit audit_proportional_tower(const Graph& g, const TowerLayout& lay) {
  const TowerResolved& r = lay.r;
  TowerAudit audit;
  audit.node_count = g.node_count();
  audit.edge_count = g.edge_count();
  audit.counts_match =
      audit.node_count == r.node_count && audit.edge_count == r.edge_count;
  audit.size_constant = static_cast<double>(audit.node_count) /
                        (static_cast<double>(r.m) * std::log(static_cast<double>(r.m)));

  audit.control_degree = r.control_degree;
  audit.control_degree_uniform = true;
  audit.collector_inputs_exact = true;
  audit.row_degrees_exact = true;
  audit.output_budget_exact = true;

  std::int64_t spread = r.k * r.c;
  auto load_of = [&](std::int64_t j) { return spread / r.m + (j < spread % r.m ? 1 : 0); };

  for (const HalfTowerLayout& ht : lay.half) {
    for (const TowerStackLayout* s : {&ht.anchor, &ht.reversal}) {
      std::int64_t width = static_cast<std::int64_t>(s->row[0].size());
      for (std::int64_t j = 0; j < width; ++j) {
        NodeId coll = s->row[0][j];
        if (g.degree(coll) != r.trees_per_collector + r.gap[0])
          audit.row_degrees_exact = false;
        for (std::int64_t i = 0; i < r.trees_per_collector; ++i) {
          NodeId root = s->tree_base +
                        static_cast<NodeId>((j * r.trees_per_collector + i) * r.tree_nodes);
          if (!g.has_edge(root, coll)) audit.collector_inputs_exact = false;
        }
      }
      for (int li = 1; li + 1 < r.levels; ++li)
        for (NodeId v : s->row[li])
          if (g.degree(v) != r.gap[li - 1] + r.gap[li]) audit.row_degrees_exact = false;
    }
    for (NodeId v : ht.reversal.row.back())
      if (g.degree(v) != r.gap.back() + r.m3) audit.row_degrees_exact = false;
    // anchor finals also carry the pad support edges, spread round-robin
    std::vector<std::int64_t> pad_support(static_cast<std::size_t>(r.w_anchor), 0);
    std::int64_t rr = 0;
    for (std::int64_t j = 0; j < r.m3; ++j)
      for (std::int64_t q = load_of(j % r.m); q < r.m; ++q) {
        ++pad_support[rr++ % r.w_anchor];
        ++pad_support[rr++ % r.w_anchor];
      }
    for (std::int64_t j = 0; j < r.w_anchor; ++j)
      if (g.degree(ht.anchor.row.back()[j]) != r.gap.back() + r.m3 + pad_support[j])
        audit.row_degrees_exact = false;

    auto in_range = [](NodeId v, const std::vector<NodeId>& ids) {
      return !ids.empty() && v >= ids.front() && v <= ids.back();
    };
    for (std::int64_t j = 0; j < r.m3; ++j) {
      NodeId v = ht.control[j];
      if (g.degree(v) != r.control_degree) audit.control_degree_uniform = false;
      std::int64_t from_finals = 0, outputs = 0;
      for (NodeId u : g.neighbors(v)) {
        if (in_range(u, ht.anchor.row.back()) || in_range(u, ht.reversal.row.back()))
          ++from_finals;
        else
          ++outputs;
      }
      if (from_finals != r.w_anchor + r.w_reversal || outputs != r.m)
        audit.output_budget_exact = false;
    }
  }

  audit.core_degree_exact = true;
  for (NodeId v : lay.core)
    if (g.degree(v) != r.core_degree) audit.core_degree_exact = false;
  audit.threshold_match = prop_threshold(r.lambda, r.core_degree) == 2 * r.c &&
                          prop_threshold(r.lambda_inner, r.k) == r.c;
  double ideal = 2.0 * static_cast<double>(r.k) /
                 (1.0 - static_cast<double>(r.lambda.num) / static_cast<double>(r.lambda.den));
  audit.core_degree_slack = std::abs(static_cast<double>(r.core_degree) - ideal);
  return audit;
}

inline ConstructionRun gen_prop_tower(const ProportionalTowerParams& p, std::uint64_t seed) {
  TowerLayout lay;
  Graph g = gen_proportional_tower(p, &lay);
  Coloring col = random_coloring(g, seed);
  ScheduleBundle bundle = proportional_tower_schedule(g, lay, col);
  if (bundle.good_event) {
    ProcessConfig cfg;
    cfg.kind = ProcessKind::majority;
    cfg.rule = SwitchRule::proportional(lay.r.lambda);
    cfg.step_limit = 8 * static_cast<std::int64_t>(g.edge_count());
    run_scripted(g, col, cfg, bundle.script);
  }
  return {std::move(g), std::move(col), std::move(bundle)};
}

}  // namespace inflab
