#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <inflab/analysis.hpp>
#include <inflab/constructions.hpp>
#include <inflab/engine.hpp>
#include <inflab/tower.hpp>

namespace inflab {

// Erdos-Renyi style G(n, p) with p = mean_degree / n; the upper-bound claims
// this feeds are about any graph, so the sampler is only a measurement choice.
inline Graph gen_random_graph(NodeId n, double mean_degree, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random graph needs n >= 2");
  if (!(mean_degree > 0.0) || mean_degree >= static_cast<double>(n))
    throw std::invalid_argument("mean degree must lie in (0, n)");
  double p = mean_degree / static_cast<double>(n);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(mean_degree * n / 2 * 1.2));
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return Graph(n, std::move(edges), {});
}

// One grid cell: everything needed to rerun and to aggregate.
struct ExperimentSpec {
  std::string family;               // edge-gadget | basic-minority | basic-majority |
                                    // prop-tower | ladder | random
  std::vector<std::int64_t> sizes;  // copies, m, width or n depending on family
  std::int64_t seeds_per_size = 5;
  std::uint64_t seed_base = 0;      // cell seed = seed_base + 1-based seed index
  Rational lambda = Rational(3, 5);         // random + prop-tower families
  ProcessKind kind = ProcessKind::majority; // random family
  double mean_degree = 8.0;                 // random family
  SchedulerKind scheduler = SchedulerKind::greedy_adversary;  // free-running families
};

namespace detail {

inline std::uint64_t scramble_seed(std::uint64_t s) {
  // splitmix64 step; keeps scheduler streams decoupled from coloring streams
  s += 0x9e3779b97f4a7c15ull;
  s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
  s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
  return s ^ (s >> 31);
}

}  // namespace detail

// Runs a single (size, seed) cell of the sweep and reports realized node
// count, trace length, and whether the run ended stabilized.  Constructions
// whose good event fails report zero steps and stabilized=false; the sweep
// aggregates over the worst successful run, so such cells only show up in the
// success-rate bookkeeping.
inline ExperimentCell run_family_cell(const ExperimentSpec& spec, std::int64_t size,
                                      std::uint64_t seed) {
  ExperimentCell cell;
  cell.seed = seed;
  if (spec.family == "edge-gadget") {
    EdgeGadgetParams p;
    p.copies = size;
    Graph g = gen_edge_gadget(p);
    Coloring col = random_coloring(g, seed);
    ProcessConfig cfg;
    cfg.kind = ProcessKind::minority;
    ConflictState st(g, col, cfg.kind, cfg.rule);
    Script script;
    for (NodeId v : g.group("designated"))
      if (st.switchable(v)) script.push_back(v);
    Trace t = run_scripted(g, col, cfg, script);
    cell.n = g.node_count();
    cell.steps = static_cast<std::int64_t>(t.steps.size());
    cell.stabilized = t.stabilized;
  } else if (spec.family == "basic-minority" || spec.family == "basic-majority") {
    ConstructionRun run;
    ProcessConfig cfg;
    if (spec.family == "basic-minority") {
      BasicMinorityParams p;
      p.m = size;
      run = gen_basic_minority(p, seed);
      cfg.kind = ProcessKind::minority;
    } else {
      BasicMajorityParams p;
      p.m = size;
      run = gen_basic_majority(p, seed);
      cfg.kind = ProcessKind::majority;
    }
    cell.n = run.graph.node_count();
    if (run.schedule.good_event) {
      Trace t = run_scripted(run.graph, run.initial, cfg, run.schedule.script);
      cell.steps = static_cast<std::int64_t>(t.steps.size());
      cell.stabilized = t.stabilized;
    }
  } else if (spec.family == "prop-tower") {
    ProportionalTowerParams p;
    p.lambda = spec.lambda;
    p.m = size;
    ConstructionRun run = gen_prop_tower(p, seed);
    cell.n = run.graph.node_count();
    if (run.schedule.good_event) {
      cell.steps = static_cast<std::int64_t>(run.schedule.script.size());
      cell.stabilized = false;  // the script ends at the embedded fixpoint,
                                // surrounding rows may still be switchable
    }
  } else if (spec.family == "ladder") {
    DegreeLadderParams p;
    p.width = static_cast<NodeId>(size);
    // doubling gaps must stay within the level width
    p.d0 = std::max<int>(1, static_cast<int>(size) >> (p.levels - 1));
    LadderLayout lay;
    Graph g = gen_degree_ladder(p, &lay);
    Coloring col = random_coloring(g, seed);
    ProcessConfig cfg;
    cfg.kind = ProcessKind::majority;
    Script script;
    for (NodeId v : ladder_sweep_script(g, lay, col, Color::black, cfg.kind, cfg.rule))
      script.push_back(v);
    Trace t = run_scripted(g, col, cfg, script);
    cell.n = g.node_count();
    cell.steps = static_cast<std::int64_t>(t.steps.size());
    cell.stabilized = t.stabilized;
  } else if (spec.family == "random") {
    Graph g = gen_random_graph(static_cast<NodeId>(size), spec.mean_degree, seed);
    Coloring col = random_coloring(g, detail::scramble_seed(seed));
    ProcessConfig cfg;
    cfg.kind = spec.kind;
    cfg.rule = SwitchRule::proportional(spec.lambda);
    Trace t = run_free(g, col, cfg, spec.scheduler, detail::scramble_seed(seed ^ 0xa5a5));
    cell.n = g.node_count();
    cell.steps = static_cast<std::int64_t>(t.steps.size());
    cell.stabilized = t.stabilized;
  } else {
    throw std::invalid_argument("unknown family: " + spec.family);
  }
  return cell;
}

inline int experiment_thread_cap() {
  if (const char* env = std::getenv("INFLAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs the full (size x seed) grid, concurrently up to the INFLAB_THREADS
// cap.  Cells are independent: generators are pure in (params, seed), so the
// workers share nothing but the output slots.
inline ExperimentReport experiment_grid(const ExperimentSpec& spec) {
  if (spec.sizes.empty()) throw std::invalid_argument("experiment needs at least one size");
  if (spec.seeds_per_size < 1) throw std::invalid_argument("experiment needs >= 1 seed per size");
  ExperimentReport report;
  report.family = spec.family;
  report.sizes = spec.sizes;
  std::size_t total = spec.sizes.size() * static_cast<std::size_t>(spec.seeds_per_size);
  report.cells.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      std::int64_t size = spec.sizes[i / spec.seeds_per_size];
      std::uint64_t seed = spec.seed_base + i % spec.seeds_per_size + 1;
      report.cells[i] = run_family_cell(spec, size, seed);
    }
  };

  int threads = std::min<int>(experiment_thread_cap(), static_cast<int>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return report;
}

}  // namespace inflab
