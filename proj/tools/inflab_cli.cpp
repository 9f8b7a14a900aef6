#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <inflab/analysis.hpp>
#include <inflab/config.hpp>
#include <inflab/constructions.hpp>
#include <inflab/engine.hpp>
#include <inflab/experiment.hpp>
#include <inflab/tower.hpp>

namespace {

using namespace inflab;

// Stable exit-code contract, documented in the README:
//   0 command completed
//   1 internal error
//   2 invalid arguments, config, or input files
//   3 schedule violation during a scripted replay
//   4 step limit exceeded
//   5 the generator's good event failed (artifacts are still written)
constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;
constexpr int exit_violation = 3;
constexpr int exit_step_limit = 4;
constexpr int exit_bad_event = 5;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::invalid_argument("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out.is_open()) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

ProcessConfig process_of(const RunConfig& cfg) {
  ProcessConfig pc;
  if (cfg.kind == "majority") pc.kind = ProcessKind::majority;
  else if (cfg.kind == "minority") pc.kind = ProcessKind::minority;
  else throw std::invalid_argument("kind must be majority|minority");
  if (cfg.rule == "basic") pc.rule = SwitchRule::basic();
  else if (cfg.rule == "proportional") pc.rule = SwitchRule::proportional(parse_rational(cfg.lambda));
  else throw std::invalid_argument("rule must be basic|proportional");
  pc.step_limit = cfg.step_limit;
  return pc;
}

void print_group_audit(const Graph& g) {
  for (const auto& [label, members] : g.groups())
    std::cout << "group " << label << ": " << members.size() << " nodes, "
              << (g.group_is_coherent(label) ? "coherent" : "marker") << "\n";
}

int cmd_generate(const RunConfig& cfg) {
  Graph g;
  Coloring col;
  ScheduleBundle bundle;
  bool has_schedule = true;

  if (cfg.family == "edge-gadget") {
    EdgeGadgetParams p;
    p.copies = cfg.copies;
    g = gen_edge_gadget(p);
    col = random_coloring(g, cfg.seed);
    ConflictState st(g, col, ProcessKind::minority, SwitchRule::basic());
    for (NodeId v : g.group("designated"))
      if (st.switchable(v)) bundle.script.push_back(v);
    bundle.diagnostics["initially_switchable"] = bundle.script.size();
  } else if (cfg.family == "basic-minority") {
    BasicMinorityParams p;
    p.m = cfg.m;
    ConstructionRun run = gen_basic_minority(p, cfg.seed);
    g = std::move(run.graph);
    col = std::move(run.initial);
    bundle = std::move(run.schedule);
  } else if (cfg.family == "basic-majority") {
    BasicMajorityParams p;
    p.m = cfg.m;
    ConstructionRun run = gen_basic_majority(p, cfg.seed);
    g = std::move(run.graph);
    col = std::move(run.initial);
    bundle = std::move(run.schedule);
  } else if (cfg.family == "prop-tower") {
    ProportionalTowerParams p;
    p.lambda = parse_rational(cfg.lambda);
    p.m = cfg.m;
    p.alpha = cfg.alpha;
    p.mu = cfg.mu;
    p.p = cfg.boost;
    p.c0 = cfg.c0;
    TowerLayout lay;
    g = gen_proportional_tower(p, &lay);
    col = random_coloring(g, cfg.seed);
    bundle = proportional_tower_schedule(g, lay, col);
    TowerAudit audit = audit_proportional_tower(g, lay);
    std::cout << "tower audit: " << (audit.all_good() ? "clean" : "FAILED") << "\n"
              << "control degree: " << audit.control_degree << " = (3*alpha+1)*m, uniform: "
              << (audit.control_degree_uniform ? "yes" : "no") << "\n"
              << "embedded degree slack: " << audit.core_degree_slack << " (<= 2 required)\n"
              << "size constant n/(m*ln m): " << audit.size_constant << "\n";
  } else if (cfg.family == "ladder") {
    DegreeLadderParams p;
    p.levels = static_cast<int>(cfg.levels);
    p.width = static_cast<NodeId>(cfg.width);
    LadderLayout lay;
    g = gen_degree_ladder(p, &lay);
    col = random_coloring(g, cfg.seed);
    for (NodeId v : ladder_sweep_script(g, lay, col, Color::black, ProcessKind::majority,
                                        SwitchRule::basic()))
      bundle.script.push_back(v);
  } else if (cfg.family == "random") {
    g = gen_random_graph(static_cast<NodeId>(cfg.n), cfg.mean_degree, cfg.seed);
    col = random_coloring(g, cfg.seed + 1);
    has_schedule = false;
  } else {
    throw std::invalid_argument("unknown family: " + cfg.family);
  }

  std::cout << "nodes: " << g.node_count() << "\nedges: " << g.edge_count() << "\n";
  print_group_audit(g);
  write_json(out_path(cfg, "graph.json"), g.to_json());
  write_json(out_path(cfg, "initial.json"), {{"initial", col.to_bitstring()}});
  if (has_schedule) {
    write_json(out_path(cfg, "schedule.json"), bundle.to_json());
    std::cout << "schedule: " << bundle.script.size() << " steps, good_event: "
              << (bundle.good_event ? "true" : "false") << "\n";
    if (!bundle.good_event) {
      std::cout << "failure: " << bundle.failure_reason << "\n";
      return exit_bad_event;
    }
  } else {
    std::cout << "schedule: none (free-running family)\n";
  }
  return exit_ok;
}

int cmd_run(const RunConfig& cfg) {
  if (cfg.graph_file.empty()) throw std::invalid_argument("run needs --graph");
  Graph g = Graph::from_json(read_json(cfg.graph_file));
  Coloring col;
  if (!cfg.initial_file.empty()) {
    col = Coloring::from_bitstring(read_json(cfg.initial_file).at("initial").get<std::string>());
    if (static_cast<NodeId>(col.size()) != g.node_count())
      throw std::invalid_argument("initial coloring size does not match the graph");
  } else {
    col = random_coloring(g, cfg.seed);
  }
  ProcessConfig pc = process_of(cfg);

  Trace trace;
  if (!cfg.schedule_file.empty()) {
    ScheduleBundle bundle = ScheduleBundle::from_json(read_json(cfg.schedule_file));
    if (!bundle.good_event) {
      std::cout << "schedule reports a failed good event: " << bundle.failure_reason << "\n";
      return exit_bad_event;
    }
    trace = run_scripted(g, col, pc, bundle.script);
  } else {
    SchedulerKind kind = parse_scheduler_kind(cfg.scheduler);
    if (kind == SchedulerKind::scripted)
      throw std::invalid_argument("scripted runs need --schedule");
    trace = run_free(g, col, pc, kind, cfg.seed);
  }

  write_json(out_path(cfg, "trace.json"), trace.to_json());
  std::cout << "steps: " << trace.steps.size() << "\nstabilized: "
            << (trace.stabilized ? "true" : "false") << "\n";

  if (!cfg.ledger_file.empty()) {
    DegreeClassifier classifier(cfg.classifier_c0, g.node_count());
    LedgerRun ledger = ledger_replay(g, trace, pc, classifier);
    write_text(cfg.ledger_file, ledger.rows_to_csv());
    std::cout << "ledger: " << ledger.rows.size() << " rows, monotonicity violations: "
              << ledger.violations.size() << "\n";
  }
  return exit_ok;
}

int cmd_experiment(const RunConfig& cfg) {
  if (cfg.sizes.empty()) throw std::invalid_argument("experiment needs --sizes");
  ExperimentSpec spec;
  spec.family = cfg.family;
  spec.sizes = cfg.sizes;
  spec.seeds_per_size = cfg.seeds_per_size;
  spec.seed_base = cfg.seed - 1;  // cell seeds start at cfg.seed
  spec.lambda = parse_rational(cfg.lambda);
  spec.kind = cfg.kind == "minority" ? ProcessKind::minority : ProcessKind::majority;
  spec.mean_degree = cfg.mean_degree;
  spec.scheduler = parse_scheduler_kind(cfg.scheduler);

  ExperimentReport report = experiment_grid(spec);
  write_json(out_path(cfg, "report.json"), report.to_json());
  write_text(out_path(cfg, "report.csv"), report.cells_to_csv());
  for (const SizeAggregate& a : aggregate_by_size(report))
    std::cout << "n=" << a.n << ": mean " << a.mean << ", max " << a.max << " over " << a.count
              << " runs\n";
  try {
    ScalingFit fit = scaling_fit(report);
    std::cout << "slope: " << fit.slope << " +- " << fit.band << " (95% bootstrap)\n";
  } catch (const std::invalid_argument& e) {
    std::cout << "slope: n/a (" << e.what() << ")\n";
  }
  return exit_ok;
}

int cmd_bounds(const RunConfig& cfg) {
  if (cfg.points < 1) throw std::invalid_argument("bounds needs --points >= 1");
  std::ostringstream out;
  out << std::setprecision(12);
  out << "lambda,f,phi_star\n";
  for (std::int64_t i = 0; i < cfg.points; ++i) {
    double lambda = cfg.points == 1 ? cfg.lambda_min
                                     : cfg.lambda_min + (cfg.lambda_max - cfg.lambda_min) *
                                           static_cast<double>(i) /
                                           static_cast<double>(cfg.points - 1);
    FLambdaResult r = cfg.composite ? f_composite(lambda, cfg.tol) : f_lambda(lambda, cfg.tol);
    out << lambda << "," << r.value << "," << r.argmax_phi << "\n";
  }
  std::cout << out.str();
  return exit_ok;
}

int cmd_validate(const RunConfig& cfg) {
  if (cfg.graph_file.empty()) throw std::invalid_argument("validate needs --graph");
  Graph g = Graph::from_json(read_json(cfg.graph_file));
  std::cout << "nodes: " << g.node_count() << "\nedges: " << g.edge_count() << "\n"
            << "bipartite: " << (g.is_bipartite() ? "yes" : "no") << "\n";
  print_group_audit(g);

  if (cfg.schedule_file.empty()) return exit_ok;
  ScheduleBundle bundle = ScheduleBundle::from_json(read_json(cfg.schedule_file));
  if (!bundle.good_event) {
    std::cout << "schedule reports a failed good event: " << bundle.failure_reason << "\n";
    return exit_bad_event;
  }
  Coloring col;
  if (!cfg.initial_file.empty()) {
    col = Coloring::from_bitstring(read_json(cfg.initial_file).at("initial").get<std::string>());
    if (static_cast<NodeId>(col.size()) != g.node_count())
      throw std::invalid_argument("initial coloring size does not match the graph");
  } else {
    col = random_coloring(g, cfg.seed);
  }
  Trace trace = run_scripted(g, col, process_of(cfg), bundle.script);
  std::cout << "replay: legal, " << trace.steps.size() << " steps, stabilized: "
            << (trace.stabilized ? "true" : "false") << "\n";
  return exit_ok;
}

int dispatch(const RunConfig& cfg) {
  if (cfg.subcommand == "generate") return cmd_generate(cfg);
  if (cfg.subcommand == "run") return cmd_run(cfg);
  if (cfg.subcommand == "experiment") return cmd_experiment(cfg);
  if (cfg.subcommand == "bounds") return cmd_bounds(cfg);
  if (cfg.subcommand == "validate") return cmd_validate(cfg);
  throw std::invalid_argument("pick a subcommand: generate|run|experiment|bounds|validate");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // --config preloads every default; explicit flags then override field by field
  try {
    for (int i = 1; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) cfg = RunConfig::from_json(read_json(argv[i + 1]));
      else if (arg.rfind("--config=", 0) == 0) cfg = RunConfig::from_json(read_json(arg.substr(9)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }

  CLI::App app{"simulation laboratory for sequential majority/minority switching processes"};
  app.require_subcommand(0, 1);
  std::string config_path, save_config;
  app.add_option("--config", config_path, "load defaults from a config file (json)");
  app.add_option("--save-config", save_config, "write the effective config to a file");
  app.add_option("--seed", cfg.seed, "root seed for colorings and schedulers");
  app.add_option("--out-dir", cfg.out_dir, "directory for output artifacts");

  CLI::App* gen = app.add_subcommand("generate", "build a graph family instance plus artifacts");
  gen->fallthrough();
  gen->add_option("--family", cfg.family,
                  "edge-gadget|basic-minority|basic-majority|prop-tower|ladder|random");
  gen->add_option("--copies", cfg.copies, "edge-gadget copies");
  gen->add_option("--m", cfg.m, "size parameter for the quadratic and tower families");
  gen->add_option("--lambda", cfg.lambda, "rule parameter, a/b or decimal");
  gen->add_option("--alpha", cfg.alpha, "tower stack width multiplier");
  gen->add_option("--mu", cfg.mu, "tower row growth rate");
  gen->add_option("--boost", cfg.boost, "tower feeder-tree target probability");
  gen->add_option("--c0", cfg.c0, "tower base degree constant");
  gen->add_option("--width", cfg.width, "ladder level width");
  gen->add_option("--levels", cfg.levels, "ladder level count");
  gen->add_option("--n", cfg.n, "random graph node count");
  gen->add_option("--mean-degree", cfg.mean_degree, "random graph mean degree");

  CLI::App* run = app.add_subcommand("run", "simulate on a stored graph");
  run->fallthrough();
  run->add_option("--graph", cfg.graph_file, "graph json");
  run->add_option("--initial", cfg.initial_file, "initial coloring json (random from seed if absent)");
  run->add_option("--schedule", cfg.schedule_file, "schedule json for scripted replay");
  run->add_option("--scheduler", cfg.scheduler, "greedy|random for free runs");
  run->add_option("--kind", cfg.kind, "majority|minority");
  run->add_option("--rule", cfg.rule, "basic|proportional");
  run->add_option("--lambda", cfg.lambda, "proportional rule parameter");
  run->add_option("--step-limit", cfg.step_limit, "0 means 4*|E|");
  run->add_option("--ledger", cfg.ledger_file, "write the active/rigid conflict csv here");
  run->add_option("--classifier-c0", cfg.classifier_c0, "high-degree cutoff constant");

  CLI::App* exp = app.add_subcommand("experiment", "run a (family x size x seed) grid");
  exp->fallthrough();
  exp->add_option("--family", cfg.family, "family to sweep");
  exp->add_option("--sizes", cfg.sizes, "size sweep")->delimiter(',');
  exp->add_option("--seeds", cfg.seeds_per_size, "seeds per size");
  exp->add_option("--lambda", cfg.lambda, "rule parameter for proportional families");
  exp->add_option("--kind", cfg.kind, "majority|minority for the random family");
  exp->add_option("--mean-degree", cfg.mean_degree, "random graph mean degree");
  exp->add_option("--scheduler", cfg.scheduler, "greedy|random for free-running families");

  CLI::App* bounds = app.add_subcommand("bounds", "print a lambda,f,phi_star csv table");
  bounds->fallthrough();
  bounds->add_option("--lambda-min", cfg.lambda_min, "table start");
  bounds->add_option("--lambda-max", cfg.lambda_max, "table end");
  bounds->add_option("--points", cfg.points, "table rows");
  bounds->add_option("--tol", cfg.tol, "refinement tolerance");
  bounds->add_flag("--composite", cfg.composite, "apply the 2L/(1-L) parameter map first");

  CLI::App* val = app.add_subcommand("validate", "check stored artifacts and replay legality");
  val->fallthrough();
  val->add_option("--graph", cfg.graph_file, "graph json");
  val->add_option("--schedule", cfg.schedule_file, "schedule json");
  val->add_option("--initial", cfg.initial_file, "initial coloring json");
  val->add_option("--kind", cfg.kind, "majority|minority");
  val->add_option("--rule", cfg.rule, "basic|proportional");
  val->add_option("--lambda", cfg.lambda, "proportional rule parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  for (CLI::App* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  try {
    if (!save_config.empty()) write_json(save_config, cfg.to_json());
    return dispatch(cfg);
  } catch (const ScheduleViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_violation;
  } catch (const StepLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_step_limit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_internal;
  }
}
