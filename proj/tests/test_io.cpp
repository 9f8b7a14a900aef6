#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include <inflab/analysis.hpp>
#include <inflab/config.hpp>
#include <inflab/constructions.hpp>
#include <inflab/engine.hpp>
#include <inflab/experiment.hpp>

using namespace inflab;

TEST_CASE("run config json round-trip is the identity") {
  RunConfig c;
  c.subcommand = "experiment";
  c.family = "random";
  c.sizes = {256, 512};
  c.lambda = "3/5";
  c.seed = 42;
  c.composite = true;
  nlohmann::json j = c.to_json();
  RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.sizes == c.sizes);
  CHECK(back.lambda == "3/5");

  // missing keys keep their defaults rather than failing
  RunConfig partial = RunConfig::from_json({{"family", "ladder"}});
  CHECK(partial.family == "ladder");
  CHECK(partial.seed == RunConfig{}.seed);
}

TEST_CASE("graph json round-trip preserves structure and groups") {
  EdgeGadgetParams p;
  p.copies = 4;
  Graph g = gen_edge_gadget(p);
  Graph back = Graph::from_json(g.to_json());
  CHECK(back.node_count() == g.node_count());
  CHECK(back.edges() == g.edges());
  CHECK(back.groups() == g.groups());
  CHECK(back.to_json() == g.to_json());  // serialize-parse-serialize identity
}

TEST_CASE("trace json round-trip preserves steps and deltas") {
  EdgeGadgetParams p;
  p.copies = 6;
  Graph g = gen_edge_gadget(p);
  Coloring col = random_coloring(g, 3);
  ProcessConfig cfg;
  cfg.kind = ProcessKind::minority;
  Trace t = run_free(g, col, cfg, SchedulerKind::greedy_adversary);
  Trace back = Trace::from_json(t.to_json());
  CHECK(back.initial.colors == t.initial.colors);
  CHECK(back.steps == t.steps);
  CHECK(back.stabilized == t.stabilized);
  CHECK(verify_trace(g, back, cfg.kind, cfg.rule) == -1);
}

TEST_CASE("schedule bundle json keeps scripts, outcomes and diagnostics") {
  ScheduleBundle b;
  b.script = {NodeId{3}, std::string("pivot"), NodeId{1}};
  b.good_event = false;
  b.failure_reason = "anchor stack incomplete";
  b.diagnostics = {{"stuck", 7}};
  ScheduleBundle back = ScheduleBundle::from_json(b.to_json());
  CHECK(back.script == b.script);
  CHECK(back.good_event == b.good_event);
  CHECK(back.failure_reason == b.failure_reason);
  CHECK(back.diagnostics == b.diagnostics);
  CHECK(back.to_json() == b.to_json());

  ScheduleBundle ok;
  ok.script = {NodeId{0}};
  nlohmann::json j = ok.to_json();
  CHECK(!j.contains("failure_reason"));  // only failures carry a reason
  CHECK(ScheduleBundle::from_json(j).good_event);
}

TEST_CASE("experiment report serializes to json and csv") {
  ExperimentReport r;
  r.family = "edge-gadget";
  r.sizes = {4, 8};
  r.cells = {{8, 1, 3, true}, {16, 1, 7, false}};
  ExperimentReport back = ExperimentReport::from_json(r.to_json());
  CHECK(back.family == r.family);
  CHECK(back.sizes == r.sizes);
  CHECK(back.cells.size() == 2);
  CHECK(back.cells[1].steps == 7);
  CHECK(back.cells[1].stabilized == false);
  CHECK(back.to_json() == r.to_json());

  CHECK(r.cells_to_csv() ==
        "family,n,seed,steps,stabilized\n"
        "edge-gadget,8,1,3,true\n"
        "edge-gadget,16,1,7,false\n");
}

TEST_CASE("ledger rows serialize as a step csv") {
  LedgerRun run;
  run.rows = {{0, 5, 2}, {1, 4, 2}, {2, 3, 1}};
  CHECK(run.rows_to_csv() ==
        "step,active,rigid\n"
        "0,5,2\n"
        "1,4,2\n"
        "2,3,1\n");
}

TEST_CASE("experiment grid fills every cell deterministically") {
  ExperimentSpec spec;
  spec.family = "edge-gadget";
  spec.sizes = {8, 16, 32};
  spec.seeds_per_size = 5;
  ExperimentReport a = experiment_grid(spec);
  CHECK(a.cells.size() == 15);
  for (const ExperimentCell& c : a.cells) {
    CHECK(c.n > 0);
    CHECK(c.seed >= 1);
    CHECK(c.seed <= 5);
    CHECK(c.stabilized);
    CHECK(c.steps >= 0);
    CHECK(c.steps <= c.n / 2);  // one designated endpoint per copy
  }

  ExperimentReport b = experiment_grid(spec);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].n == b.cells[i].n);
    CHECK(a.cells[i].seed == b.cells[i].seed);
    CHECK(a.cells[i].steps == b.cells[i].steps);
  }

  // per-family size semantics reach the other generators as well
  ExperimentSpec ladder;
  ladder.family = "ladder";
  ladder.sizes = {16};
  ladder.seeds_per_size = 1;
  CHECK(experiment_grid(ladder).cells[0].n == 4 * 16);

  ExperimentSpec bogus;
  bogus.family = "no-such-family";
  bogus.sizes = {8};
  CHECK_THROWS_AS(experiment_grid(bogus), std::invalid_argument);
}

TEST_CASE("thread cap honors the environment override") {
  setenv("INFLAB_THREADS", "3", 1);
  CHECK(experiment_thread_cap() == 3);
  setenv("INFLAB_THREADS", "0", 1);  // nonsense values fall back to hardware
  CHECK(experiment_thread_cap() >= 1);
  unsetenv("INFLAB_THREADS");
  CHECK(experiment_thread_cap() >= 1);

  // a multi-threaded grid produces the same cells as a serial one
  ExperimentSpec spec;
  spec.family = "edge-gadget";
  spec.sizes = {8, 16};
  spec.seeds_per_size = 3;
  setenv("INFLAB_THREADS", "1", 1);
  ExperimentReport serial = experiment_grid(spec);
  setenv("INFLAB_THREADS", "4", 1);
  ExperimentReport parallel = experiment_grid(spec);
  unsetenv("INFLAB_THREADS");
  for (std::size_t i = 0; i < serial.cells.size(); ++i)
    CHECK(serial.cells[i].steps == parallel.cells[i].steps);
}
