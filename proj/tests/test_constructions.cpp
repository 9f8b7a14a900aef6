#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include <inflab/constructions.hpp>
#include <inflab/engine.hpp>

#include "test_helpers.hpp"

using namespace inflab;
using testutil::random_bits;
using boost::multiprecision::cpp_rational;

namespace {

Graph random_bipartite(NodeId per_side, double p, std::mt19937_64& rng,
                       std::vector<std::uint8_t>* side_out) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < per_side; ++u)
    for (NodeId v = 0; v < per_side; ++v)
      if (coin(rng)) edges.push_back({u, per_side + v});
  if (side_out) {
    side_out->assign(2 * per_side, 0);
    for (NodeId v = per_side; v < 2 * per_side; ++v) (*side_out)[v] = 1;
  }
  return Graph(2 * per_side, std::move(edges));
}

}  // namespace

TEST_CASE("edge gadget is a disjoint matching with marked endpoints") {
  Graph g = gen_edge_gadget({5});
  CHECK(g.node_count() == 10);
  CHECK(g.edge_count() == 5);
  for (NodeId v = 0; v < g.node_count(); ++v) CHECK(g.degree(v) == 1);
  for (std::int64_t i = 0; i < 5; ++i) CHECK(g.has_edge(2 * i, 2 * i + 1));
  const auto& marked = g.group("designated");
  REQUIRE(marked.size() == 5);
  for (std::size_t i = 0; i < marked.size(); ++i) CHECK(marked[i] == 2 * (NodeId)i + 1);
  // marker set, not an interchangeable node set
  CHECK_FALSE(g.group_is_coherent("designated"));
  CHECK_THROWS_AS(gen_edge_gadget({0}), std::invalid_argument);
}

TEST_CASE("amplifier recurrence takes its exact closed values") {
  CHECK(amplifier_recurrence(0) == cpp_rational(1, 2));
  CHECK(amplifier_recurrence(1) == cpp_rational(5, 8));
  CHECK(amplifier_recurrence(2) == cpp_rational(89, 128));
  CHECK(amplifier_recurrence(3) == cpp_rational(24305, 32768));
  CHECK(amplifier_recurrence(4) == cpp_rational(1664474849ll, 2147483648ll));
  for (int i = 0; i < 12; ++i) {
    CHECK(amplifier_recurrence(i + 1) > amplifier_recurrence(i));
    CHECK(amplifier_recurrence(i + 1) < 1);
  }
  CHECK_THROWS_AS(amplifier_recurrence(-1), std::invalid_argument);
}

TEST_CASE("amplifier tree has heap shape") {
  Graph g = gen_amplifier_tree(3);
  CHECK(g.node_count() == 15);
  CHECK(g.edge_count() == 14);
  CHECK(g.degree(0) == 2);
  for (NodeId v = 1; v < 7; ++v) CHECK(g.degree(v) == 3);
  for (NodeId v = 7; v < 15; ++v) CHECK(g.degree(v) == 1);
  CHECK(g.is_bipartite());
  CHECK(g.group("root") == std::vector<NodeId>{0});
  CHECK_THROWS_AS(gen_amplifier_tree(-1), std::invalid_argument);
  CHECK_THROWS_AS(gen_amplifier_tree(21), std::invalid_argument);
}

TEST_CASE("amplifier script succeeds on exactly the counted colorings") {
  // exhaustive enumeration is an oracle independent of the recurrence:
  // depth 2 must succeed on 89 of 128 colorings, depth 3 on 24305 of 32768
  for (int depth : {2, 3}) {
    Graph g = gen_amplifier_tree(depth);
    NodeId n = g.node_count();
    ProcessConfig cfg;
    cfg.rule = SwitchRule::proportional(1, 4);
    std::int64_t hits = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      Coloring col;
      col.colors.resize(n);
      for (NodeId v = 0; v < n; ++v)
        col.colors[v] = (mask >> v) & 1 ? Color::white : Color::black;
      std::vector<NodeId> flips;
      bool rooted = amplifier_plan_flips(col, 0, n, Color::black, flips);
      std::set<NodeId> uniq(flips.begin(), flips.end());
      CHECK(uniq.size() == flips.size());
      for (NodeId v : flips) CHECK(2 * v + 2 < n);  // leaves never scheduled
      if (depth == 2 || mask % 97 == 0) {
        Script script(flips.begin(), flips.end());
        Trace t = run_scripted(g, col, cfg, script);  // throws if illegal
        CHECK((t.final_coloring()[0] == Color::black) == rooted);
      }
      hits += rooted;
    }
    CHECK(hits == (depth == 2 ? 89 : 24305));
  }
}

TEST_CASE("amplifier success rate over random colorings tracks the recurrence") {
  const int depth = 4;
  Graph g = gen_amplifier_tree(depth);
  const int trials = 4000;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    Coloring col = random_coloring(g, 9000 + s);
    std::vector<NodeId> flips;
    if (amplifier_plan_flips(col, 0, g.node_count(), Color::black, flips)) ++hits;
    if (s % 500 == 0) {
      ProcessConfig cfg;  // basic rule works too: two of three neighbors
      Script script(flips.begin(), flips.end());
      run_scripted(g, col, cfg, script);
    }
  }
  double expect = static_cast<double>(amplifier_recurrence(depth));
  double sigma3 = 3 * std::sqrt(expect * (1 - expect) / trials);
  CHECK(std::abs(hits / double(trials) - expect) < sigma3 + 1e-9);
}

TEST_CASE("degree ladder wires doubling circulant gaps") {
  LadderLayout lay;
  Graph g = gen_degree_ladder({4, 16, 2}, &lay);
  CHECK(g.node_count() == 64);
  REQUIRE(lay.level.size() == 4);
  CHECK(lay.gap_degree == std::vector<int>{2, 4, 8});
  for (NodeId v : lay.level[0]) CHECK(g.degree(v) == 2);
  for (NodeId v : lay.level[1]) CHECK(g.degree(v) == 6);
  for (NodeId v : lay.level[2]) CHECK(g.degree(v) == 12);
  for (NodeId v : lay.level[3]) CHECK(g.degree(v) == 8);
  CHECK(g.is_bipartite());
  CHECK(g.group("level_2") == lay.level[1]);
  CHECK_THROWS_AS(gen_degree_ladder({4, 4, 2}), std::invalid_argument);   // gap 8 > width
  CHECK_THROWS_AS(gen_degree_ladder({1, 16, 2}), std::invalid_argument);
}

TEST_CASE("ladder sweep yields a legal script and its minority mirror") {
  LadderLayout lay;
  Graph g = gen_degree_ladder({3, 12, 2}, &lay);
  Coloring initial = random_coloring(g, 7);
  ProcessConfig cfg;
  cfg.rule = SwitchRule::proportional(1, 4);
  std::vector<NodeId> flips =
      ladder_sweep_script(g, lay, initial, Color::black, cfg.kind, cfg.rule);
  Script script(flips.begin(), flips.end());
  Trace t = run_scripted(g, initial, cfg, script);
  CHECK(verify_trace(g, t, ProcessKind::majority, cfg.rule) == -1);

  auto side = g.bipartition();
  REQUIRE_FALSE(side.empty());
  Trace mirror = bipartite_color_swap(g, side, t);
  CHECK(verify_trace(g, mirror, ProcessKind::minority, cfg.rule) == -1);
  CHECK(mirror.steps == t.steps);
  CHECK(mirror.final_coloring() == swap_side_colors(t.final_coloring(), side));
}

TEST_CASE("color swap carries majority traces to minority traces") {
  std::mt19937_64 rng(20240811);
  int nonempty = 0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::uint8_t> side;
    Graph g = random_bipartite(5 + rep % 6, 0.5, rng, &side);
    Coloring initial = random_bits(g.node_count(), rng);
    for (SwitchRule rule : {SwitchRule::basic(), SwitchRule::proportional(1, 3)}) {
      ProcessConfig cfg;
      cfg.rule = rule;
      Trace t = run_free(g, initial, cfg, SchedulerKind::greedy_adversary);
      CHECK(verify_trace(g, t, ProcessKind::majority, rule) == -1);
      Trace mirror = bipartite_color_swap(g, side, t);
      CHECK(verify_trace(g, mirror, ProcessKind::minority, rule) == -1);
      CHECK(mirror.length() == t.length());
      nonempty += !t.steps.empty();
    }
  }
  CHECK(nonempty > 10);  // the property must be exercised, not vacuous
  CHECK_THROWS_AS(swap_side_colors(Coloring{}, std::vector<std::uint8_t>(3, 0)),
                  std::invalid_argument);
}

TEST_CASE("minority construction shape and group coherence") {
  MinorityLayout lay;
  Graph g = basic_minority_graph({16}, &lay);
  CHECK(g.node_count() == 5 * 16 + 3);
  for (NodeId v : lay.pivot) CHECK(g.degree(v) == 33);
  for (NodeId v : lay.left_pool) CHECK(g.degree(v) == 33);
  for (NodeId v : lay.right_pool) CHECK(g.degree(v) == 33);
  for (NodeId v : lay.left_anchor) CHECK(g.degree(v) == 33);
  for (NodeId v : lay.right_anchor) CHECK(g.degree(v) == 33);
  CHECK(g.degree(lay.parity) == 16);
  for (const char* label : {"pivot", "left_pool", "right_pool", "left_anchor", "right_anchor"})
    CHECK(g.group_is_coherent(label));
  CHECK(g.has_edge(lay.left_anchor[0], lay.right_anchor[0]));
  CHECK_THROWS_AS(basic_minority_graph({11}), std::invalid_argument);
}

TEST_CASE("minority schedule is legal and clears the quadratic bar") {
  const std::int64_t m = 16;
  const std::int64_t target = (m * m + 1) / 2;
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    ConstructionRun run = gen_basic_minority({m}, seed);  // replays internally
    CHECK(run.schedule.diagnostics.at("target_steps").get<std::int64_t>() == target);
    if (!run.schedule.good_event) {
      CHECK(run.schedule.script.empty());
      CHECK_FALSE(run.schedule.failure_reason.empty());
      continue;
    }
    ++good;
    std::vector<NodeId> order = expand_script(run.graph, run.schedule.script);
    CHECK(static_cast<std::int64_t>(order.size()) ==
          run.schedule.diagnostics.at("projected_steps").get<std::int64_t>());
    CHECK(static_cast<std::int64_t>(order.size()) >= target);
    ProcessConfig cfg;
    cfg.kind = ProcessKind::minority;
    cfg.step_limit = 8 * static_cast<std::int64_t>(run.graph.edge_count());
    Trace t = run_scripted(run.graph, run.initial, cfg, run.schedule.script);
    for (const TraceStep& s : t.steps) CHECK(s.delta < 0);
  }
  CHECK(good >= 10);

  ConstructionRun a = gen_basic_minority({m}, 3), b = gen_basic_minority({m}, 3);
  CHECK(a.initial == b.initial);
  CHECK(expand_script(a.graph, a.schedule.script) == expand_script(b.graph, b.schedule.script));
}

TEST_CASE("majority size adjustment keeps group counts odd") {
  CHECK(majority_adjusted_sizes(16, 0.6) == std::pair<std::int64_t, std::int64_t>{15, 3});
  CHECK(majority_adjusted_sizes(32, 0.6) == std::pair<std::int64_t, std::int64_t>{33, 3});
  CHECK(majority_adjusted_sizes(64, 0.6) == std::pair<std::int64_t, std::int64_t>{63, 3});
  CHECK(majority_adjusted_sizes(128, 0.6) == std::pair<std::int64_t, std::int64_t>{129, 3});
  for (std::int64_t m : {16, 32, 64, 128, 500}) {
    auto [am, h] = majority_adjusted_sizes(m, 0.6);
    CHECK(h % 2 == 1);
    CHECK((am / h) % 2 == 1);
    CHECK(am % h == 0);
    CHECK(std::abs(am - m) <= h + am / h);  // adjustment stays local
  }
  CHECK_THROWS_AS(majority_adjusted_sizes(11, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(majority_adjusted_sizes(16, 0.0), std::invalid_argument);
}

TEST_CASE("majority construction shape and group coherence") {
  MajorityLayout lay;
  Graph g = basic_majority_graph({16, 0.6}, &lay);
  REQUIRE(lay.m == 15);
  REQUIRE(lay.h == 3);
  const std::int64_t q = lay.m / lay.h;
  CHECK(g.node_count() == 9 * 15 + 3);
  for (NodeId v : lay.pivot) CHECK(g.degree(v) == 2 * 15 + 1);
  for (NodeId v : lay.left_pool) CHECK(g.degree(v) == 2 * 15 + 1);
  for (NodeId v : lay.left_anchor) CHECK(g.degree(v) == 2 * 15);  // pool + selectors, no twin
  for (NodeId v : lay.right_anchor) CHECK(g.degree(v) == 2 * 15);
  for (const auto& sel : lay.left_selector)
    for (NodeId v : sel) CHECK(g.degree(v) == 15 + 1 + q);
  for (const auto& trig : lay.right_trigger)
    for (NodeId v : trig) CHECK(g.degree(v) == q);
  CHECK(g.degree(lay.parity) == 15);
  CHECK_FALSE(g.has_edge(lay.left_anchor[0], lay.right_anchor[0]));
  for (const char* label : {"pivot", "left_pool", "right_pool", "left_anchor", "right_anchor",
                            "left_selector_1", "left_trigger_2", "right_selector_3",
                            "right_trigger_1"})
    CHECK(g.group_is_coherent(label));
}

TEST_CASE("majority schedule is legal and clears the quadratic bar") {
  MajorityLayout lay;
  Graph g = basic_majority_graph({16, 0.6}, &lay);
  const std::int64_t target = (lay.m * lay.m + 1) / 2;
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    ConstructionRun run = gen_basic_majority({16, 0.6}, seed);  // replays internally
    if (!run.schedule.good_event) {
      CHECK(run.schedule.script.empty());
      CHECK_FALSE(run.schedule.failure_reason.empty());
      continue;
    }
    ++good;
    std::vector<NodeId> order = expand_script(run.graph, run.schedule.script);
    CHECK(static_cast<std::int64_t>(order.size()) ==
          run.schedule.diagnostics.at("projected_steps").get<std::int64_t>());
    CHECK(static_cast<std::int64_t>(order.size()) >= target);
    ProcessConfig cfg;
    cfg.step_limit = 8 * static_cast<std::int64_t>(run.graph.edge_count());
    Trace t = run_scripted(run.graph, run.initial, cfg, run.schedule.script);
    for (const TraceStep& s : t.steps) CHECK(s.delta < 0);
  }
  CHECK(good >= 9);

  ConstructionRun a = gen_basic_majority({16, 0.6}, 5), b = gen_basic_majority({16, 0.6}, 5);
  CHECK(a.initial == b.initial);
  CHECK(expand_script(a.graph, a.schedule.script) == expand_script(b.graph, b.schedule.script));
}
