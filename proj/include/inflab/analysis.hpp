#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace inflab {

// ---------------------------------------------------------------------------
// the exponent function f: for a rule parameter L in (0,1),
//   f(L) = max over phi in (0,(1-L)/2] of ln((1-phi)/(L+phi)) / ln((1-phi)/phi)
// The stationarity equation has no elementary solution and unimodality is not
// guaranteed a priori, so the maximum is located by a coarse grid scan first
// and a golden-section refinement around the best cell second.

struct FLambdaResult {
  double lambda = 0.0;
  double value = 0.0;
  double argmax_phi = 0.0;
  double tolerance = 0.0;
};

namespace detail {

inline double exponent_ratio(double lambda, double phi) {
  return std::log((1.0 - phi) / (lambda + phi)) / std::log((1.0 - phi) / phi);
}

}  // namespace detail

inline FLambdaResult f_lambda(double lambda, double tol = 1e-9) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::domain_error("f is defined for lambda in (0, 1)");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  double hi = (1.0 - lambda) / 2.0;
  // the ratio tends to 0 as phi -> 0, so clipping the left end loses nothing
  double lo = std::min(tol, hi / 2.0);

  const int grid = 20000;
  int best = 0;
  double best_val = -1.0;
  auto at = [&](int i) { return lo + (hi - lo) * static_cast<double>(i) / grid; };
  for (int i = 0; i <= grid; ++i) {
    double v = detail::exponent_ratio(lambda, at(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  double a = at(std::max(0, best - 1));
  double b = at(std::min(grid, best + 1));
  const double inv_gold = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_gold * (b - a), x2 = a + inv_gold * (b - a);
  double f1 = detail::exponent_ratio(lambda, x1), f2 = detail::exponent_ratio(lambda, x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_gold * (b - a);
      f2 = detail::exponent_ratio(lambda, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_gold * (b - a);
      f1 = detail::exponent_ratio(lambda, x1);
    }
  }
  double phi = (a + b) / 2.0;
  return {lambda, detail::exponent_ratio(lambda, phi), phi, tol};
}

// The embedding construction calls f after the parameter map L -> 2L/(1-L),
// which sends (0,1/3) onto (0,1).
inline FLambdaResult f_composite(double lambda, double tol = 1e-9) {
  if (!(lambda > 0.0 && lambda < 1.0 / 3.0))
    throw std::domain_error("composite exponent needs lambda in (0, 1/3)");
  double inner = 2.0 * lambda / (1.0 - lambda);
  if (!(inner > 0.0 && inner < 1.0)) throw std::domain_error("mapped parameter left (0, 1)");
  return f_lambda(inner, tol);
}

// Tail bound for a fair Bernoulli sum of k trials:
//   Pr(|sum - k/2| >= eps * k/2) <= 2 * exp(-eps^2 * k / 6).
inline double chernoff_tail(std::int64_t k, double eps) {
  if (k < 1) throw std::invalid_argument("tail bound needs k >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("tail bound needs eps in (0, 1)");
  return 2.0 * std::exp(-eps * eps * static_cast<double>(k) / 6.0);
}

// Monte Carlo estimate of the probability that a uniformly colored set of the
// given size is eps-balanced: white count within [(1/2-eps)s, (1/2+eps)s].
// Note the deviation here is eps*s, i.e. 2*eps in units of s/2, so the
// matching tail bound is chernoff_tail(s, 2*eps).
inline double balanced_probability_estimate(std::int64_t set_size, double eps,
                                            std::int64_t trials, std::uint64_t seed) {
  if (set_size < 1) throw std::invalid_argument("balance estimate needs set_size >= 1");
  if (trials < 1) throw std::invalid_argument("balance estimate needs trials >= 1");
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("balance needs eps in [0, 1)");
  std::mt19937_64 rng(seed);
  double half = static_cast<double>(set_size) / 2.0;
  double slack = eps * static_cast<double>(set_size);
  std::int64_t balanced = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    std::int64_t whites = 0;
    for (std::int64_t i = 0; i < set_size; ++i) whites += rng() & 1u;
    double dev = std::abs(static_cast<double>(whites) - half);
    balanced += dev <= slack + 1e-12;
  }
  return static_cast<double>(balanced) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// experiment reports: one family, a size sweep, one row per (size, seed) run

struct ExperimentCell {
  std::int64_t n = 0;  // realized node count of the generated instance
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  bool stabilized = false;
};

struct SizeAggregate {
  std::int64_t n = 0;
  std::int64_t count = 0;
  double mean = 0.0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double band = 0.0;  // half-width of the 95% bootstrap interval around slope
};

struct ExperimentReport {
  std::string family;
  std::vector<std::int64_t> sizes;  // requested sweep parameter, in order
  std::vector<ExperimentCell> cells;

  std::string cells_to_csv() const {
    std::string out = "family,n,seed,steps,stabilized\n";
    for (const ExperimentCell& c : cells)
      out += family + "," + std::to_string(c.n) + "," + std::to_string(c.seed) + "," +
             std::to_string(c.steps) + "," + (c.stabilized ? "true" : "false") + "\n";
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = family;
    j["sizes"] = sizes;
    auto arr = nlohmann::json::array();
    for (const ExperimentCell& c : cells)
      arr.push_back({{"n", c.n}, {"seed", c.seed}, {"steps", c.steps},
                     {"stabilized", c.stabilized}});
    j["cells"] = arr;
    return j;
  }

  static ExperimentReport from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.family = j.at("family").get<std::string>();
    r.sizes = j.at("sizes").get<std::vector<std::int64_t>>();
    for (const auto& c : j.at("cells"))
      r.cells.push_back({c.at("n").get<std::int64_t>(), c.at("seed").get<std::uint64_t>(),
                         c.at("steps").get<std::int64_t>(), c.at("stabilized").get<bool>()});
    return r;
  }
};

namespace detail {

inline double quantile_sorted(const std::vector<std::int64_t>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
}

// least-squares slope/intercept of y over x
inline std::pair<double, double> lsq(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope fit needs distinct sizes");
  double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace detail

inline std::vector<SizeAggregate> aggregate_by_size(const ExperimentReport& report) {
  std::vector<std::int64_t> ns;
  for (const ExperimentCell& c : report.cells) ns.push_back(c.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<SizeAggregate> out;
  for (std::int64_t n : ns) {
    std::vector<std::int64_t> steps;
    for (const ExperimentCell& c : report.cells)
      if (c.n == n) steps.push_back(c.steps);
    std::sort(steps.begin(), steps.end());
    SizeAggregate a;
    a.n = n;
    a.count = static_cast<std::int64_t>(steps.size());
    double sum = 0;
    for (std::int64_t s : steps) sum += static_cast<double>(s);
    a.mean = sum / static_cast<double>(steps.size());
    a.min = steps.front();
    a.max = steps.back();
    a.q25 = detail::quantile_sorted(steps, 0.25);
    a.q50 = detail::quantile_sorted(steps, 0.50);
    a.q75 = detail::quantile_sorted(steps, 0.75);
    out.push_back(a);
  }
  return out;
}

// Log-log fit of the worst observed trace length against size.  The band is
// the half-width of a 95% percentile bootstrap (cells resampled within each
// size, 1000 replicates); zero steps are clamped to one before the log.
inline ScalingFit scaling_fit(const ExperimentReport& report, std::uint64_t boot_seed = 1) {
  std::vector<std::int64_t> ns;
  for (const ExperimentCell& c : report.cells) ns.push_back(c.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 3) throw std::invalid_argument("slope fit needs >= 3 distinct sizes");

  std::vector<std::vector<std::int64_t>> per_size;
  for (std::int64_t n : ns) {
    std::vector<std::int64_t> steps;
    for (const ExperimentCell& c : report.cells)
      if (c.n == n) steps.push_back(c.steps);
    if (steps.size() < 5) throw std::invalid_argument("slope fit needs >= 5 runs per size");
    per_size.push_back(std::move(steps));
  }

  auto fit_from_max = [&](const std::vector<std::int64_t>& maxima) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      x.push_back(std::log(static_cast<double>(ns[i])));
      y.push_back(std::log(static_cast<double>(std::max<std::int64_t>(1, maxima[i]))));
    }
    return detail::lsq(x, y);
  };

  std::vector<std::int64_t> maxima;
  for (const auto& steps : per_size)
    maxima.push_back(*std::max_element(steps.begin(), steps.end()));
  auto [slope, intercept] = fit_from_max(maxima);

  std::mt19937_64 rng(boot_seed);
  std::vector<double> boot;
  boot.reserve(1000);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<std::int64_t> resampled;
    for (const auto& steps : per_size) {
      std::int64_t mx = 0;
      for (std::size_t i = 0; i < steps.size(); ++i)
        mx = std::max(mx, steps[rng() % steps.size()]);
      resampled.push_back(mx);
    }
    boot.push_back(fit_from_max(resampled).first);
  }
  std::sort(boot.begin(), boot.end());
  double lo = boot[static_cast<std::size_t>(0.025 * 999)];
  double hi = boot[static_cast<std::size_t>(0.975 * 999)];
  double band = std::max(std::abs(hi - slope), std::abs(slope - lo));
  return {slope, intercept, band};
}

}  // namespace inflab
