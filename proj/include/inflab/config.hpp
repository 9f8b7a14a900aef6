#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <inflab/rational.hpp>

namespace inflab {

// Everything a command-line invocation can configure.  A config file carries
// the same keys as the flags; reloading one reproduces the run exactly.
struct RunConfig {
  std::string subcommand;

  // generation families and their parameters
  std::string family = "edge-gadget";
  std::int64_t copies = 1;
  std::int64_t m = 16;
  std::int64_t width = 64;
  std::int64_t n = 256;
  std::int64_t levels = 4;
  double mean_degree = 8.0;
  double alpha = 8.0;
  double mu = 0.5;
  double boost = 0.775;
  double c0 = 1.55;
  std::string lambda = "1/4";

  // running and validation
  std::string graph_file;
  std::string schedule_file;
  std::string initial_file;
  std::string kind = "majority";
  std::string rule = "basic";
  std::string scheduler = "greedy";
  std::int64_t step_limit = 0;
  std::string ledger_file;
  double classifier_c0 = 1200.0;

  // experiment sweeps
  std::vector<std::int64_t> sizes;
  std::int64_t seeds_per_size = 5;

  // bound tables
  double lambda_min = 0.05;
  double lambda_max = 0.95;
  std::int64_t points = 19;
  double tol = 1e-9;
  bool composite = false;

  // global
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  nlohmann::json to_json() const {
    return {{"subcommand", subcommand},
            {"family", family},
            {"copies", copies},
            {"m", m},
            {"width", width},
            {"n", n},
            {"levels", levels},
            {"mean_degree", mean_degree},
            {"alpha", alpha},
            {"mu", mu},
            {"boost", boost},
            {"c0", c0},
            {"lambda", lambda},
            {"graph_file", graph_file},
            {"schedule_file", schedule_file},
            {"initial_file", initial_file},
            {"kind", kind},
            {"rule", rule},
            {"scheduler", scheduler},
            {"step_limit", step_limit},
            {"ledger_file", ledger_file},
            {"classifier_c0", classifier_c0},
            {"sizes", sizes},
            {"seeds_per_size", seeds_per_size},
            {"lambda_min", lambda_min},
            {"lambda_max", lambda_max},
            {"points", points},
            {"tol", tol},
            {"composite", composite},
            {"seed", seed},
            {"out_dir", out_dir}};
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    auto grab = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    grab("subcommand", c.subcommand);
    grab("family", c.family);
    grab("copies", c.copies);
    grab("m", c.m);
    grab("width", c.width);
    grab("n", c.n);
    grab("levels", c.levels);
    grab("mean_degree", c.mean_degree);
    grab("alpha", c.alpha);
    grab("mu", c.mu);
    grab("boost", c.boost);
    grab("c0", c.c0);
    grab("lambda", c.lambda);
    grab("graph_file", c.graph_file);
    grab("schedule_file", c.schedule_file);
    grab("initial_file", c.initial_file);
    grab("kind", c.kind);
    grab("rule", c.rule);
    grab("scheduler", c.scheduler);
    grab("step_limit", c.step_limit);
    grab("ledger_file", c.ledger_file);
    grab("classifier_c0", c.classifier_c0);
    grab("sizes", c.sizes);
    grab("seeds_per_size", c.seeds_per_size);
    grab("lambda_min", c.lambda_min);
    grab("lambda_max", c.lambda_max);
    grab("points", c.points);
    grab("tol", c.tol);
    grab("composite", c.composite);
    grab("seed", c.seed);
    grab("out_dir", c.out_dir);
    return c;
  }
};

}  // namespace inflab
