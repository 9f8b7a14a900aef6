#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <inflab/analysis.hpp>

using namespace inflab;

namespace {

// Brute-force maximizer over a dense uniform grid; deliberately ignorant of
// the refinement logic under test.
double grid_oracle(double lambda, int points) {
  double hi = (1.0 - lambda) / 2.0;
  double best = -1.0;
  for (int i = 1; i <= points; ++i) {
    double phi = hi * static_cast<double>(i) / points;
    double v = std::log((1.0 - phi) / (lambda + phi)) / std::log((1.0 - phi) / phi);
    if (v > best) best = v;
  }
  return best;
}

// Exact fair-binomial point mass via log-gamma, summed over a closed range.
double binom_range_prob(std::int64_t k, std::int64_t lo, std::int64_t hi) {
  double total = 0.0;
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, k);
  for (std::int64_t w = lo; w <= hi; ++w) {
    double lg = std::lgamma(static_cast<double>(k + 1)) -
                std::lgamma(static_cast<double>(w + 1)) -
                std::lgamma(static_cast<double>(k - w + 1)) -
                static_cast<double>(k) * std::log(2.0);
    total += std::exp(lg);
  }
  return total;
}

ExperimentReport synthetic_report(const std::vector<std::int64_t>& sizes, int seeds,
                                  double (*len)(double)) {
  ExperimentReport r;
  r.family = "synthetic";
  r.sizes = sizes;
  for (std::int64_t n : sizes)
    for (int s = 1; s <= seeds; ++s)
      r.cells.push_back({n, static_cast<std::uint64_t>(s),
                         static_cast<std::int64_t>(len(static_cast<double>(n))), true});
  return r;
}

}  // namespace

TEST_CASE("exponent maximizer agrees with a brute-force grid") {
  double oracle = grid_oracle(1.0 / 3.0, 1000000);
  FLambdaResult r = f_lambda(1.0 / 3.0, 1e-9);
  CHECK(std::abs(r.value - oracle) < 1e-6);
  CHECK(std::abs(r.value - 0.333) < 1e-3);
  CHECK(r.argmax_phi > 0.0);
  CHECK(r.argmax_phi <= (1.0 - r.lambda) / 2.0);

  // a couple of unrelated parameters, same oracle
  for (double lambda : {0.1, 0.5, 0.8}) {
    double want = grid_oracle(lambda, 200000);
    CHECK(f_lambda(lambda).value == doctest::Approx(want).epsilon(1e-5));
  }

  // near-limit behavior at both ends of the interval
  CHECK(f_lambda(0.001).value > 0.95);
  CHECK(f_lambda(0.999).value < 0.01);

  CHECK_THROWS_AS(f_lambda(0.0), std::domain_error);
  CHECK_THROWS_AS(f_lambda(1.0), std::domain_error);
  CHECK_THROWS_AS(f_lambda(-0.2), std::domain_error);
  CHECK_THROWS_AS(f_lambda(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("exponent function is decreasing and convex across the interval") {
  const int pts = 50;
  std::vector<double> vals;
  for (int i = 0; i < pts; ++i) {
    double lambda = 0.05 + (0.95 - 0.05) * static_cast<double>(i) / (pts - 1);
    FLambdaResult r = f_lambda(lambda, 1e-10);
    CHECK(r.value > 0.0);
    CHECK(r.value < 1.0);
    CHECK(r.argmax_phi > 0.0);
    CHECK(r.argmax_phi <= (1.0 - lambda) / 2.0 + 1e-12);
    vals.push_back(r.value);
  }
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i - 1] >= vals[i]);
  for (std::size_t i = 2; i < vals.size(); ++i)
    CHECK(vals[i] - 2 * vals[i - 1] + vals[i - 2] >= -1e-4);
}

TEST_CASE("composite exponent applies the parameter map") {
  FLambdaResult quarter = f_composite(0.25);
  CHECK(quarter.lambda == doctest::Approx(2.0 / 3.0));
  CHECK(quarter.value == doctest::Approx(f_lambda(2.0 / 3.0).value).epsilon(1e-9));

  FLambdaResult fifth = f_composite(0.2);
  CHECK(fifth.lambda == doctest::Approx(0.5));
  CHECK(fifth.value == doctest::Approx(f_lambda(0.5).value).epsilon(1e-9));

  CHECK(f_composite(0.001).value > 0.9);  // map sends 0+ to 0+, where f tends to 1

  CHECK_THROWS_AS(f_composite(1.0 / 3.0), std::domain_error);
  CHECK_THROWS_AS(f_composite(0.4), std::domain_error);
  CHECK_THROWS_AS(f_composite(0.0), std::domain_error);
}

TEST_CASE("tail bound evaluates exactly and dominates the exact tail") {
  CHECK(chernoff_tail(600, 0.1) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));

  // exact two-sided tail Pr(|W - k/2| >= eps*k/2) for the same numbers
  std::int64_t k = 600;
  double eps = 0.1;
  double dev = eps * k / 2.0;
  double inside = binom_range_prob(k, static_cast<std::int64_t>(std::floor(300 - dev)) + 1,
                                   static_cast<std::int64_t>(std::ceil(300 + dev)) - 1);
  CHECK(1.0 - inside <= chernoff_tail(k, eps));

  // at the high-degree cutoff k = (3/eps^2) ln n, the balance tail (which
  // deviates by eps*k, i.e. 2*eps in half-units) collapses to 2/n^2
  double n = 50.0;
  double c0 = 3.0 / (eps * eps);
  auto keff = static_cast<std::int64_t>(std::ceil(c0 * std::log(n)));
  CHECK(chernoff_tail(keff, 2.0 * eps) == doctest::Approx(2.0 / (n * n)).epsilon(1e-2));

  for (std::int64_t kk : {1, 10, 100, 1000}) {
    CHECK(chernoff_tail(kk, 0.3) > 0.0);
    CHECK(chernoff_tail(kk, 0.3) <= 2.0);
    CHECK(chernoff_tail(kk, 0.3) >= chernoff_tail(kk * 2, 0.3));
    CHECK(chernoff_tail(kk, 0.3) >= chernoff_tail(kk, 0.6));
  }
  CHECK_THROWS_AS(chernoff_tail(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(chernoff_tail(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(chernoff_tail(10, 1.0), std::invalid_argument);
}

TEST_CASE("balance estimate tracks the exact binomial probability") {
  // two nodes, zero slack: balanced only on the exact 1-1 split
  double two = balanced_probability_estimate(2, 0.0, 40000, 11);
  CHECK(std::abs(two - 0.5) < 0.01);

  // size 1000, slack 0.1: exact probability of 450..550 whites
  double exact = binom_range_prob(1000, 450, 550);
  double est = balanced_probability_estimate(1000, 0.1, 20000, 7);
  CHECK(est >= 0.99);
  CHECK(std::abs(est - exact) < 0.003);

  // empirical imbalance never beats the tail bound by more than noise
  for (std::int64_t size : {200, 500}) {
    for (double eps : {0.1, 0.2}) {
      double p = balanced_probability_estimate(size, eps, 20000, 13);
      CHECK(1.0 - p <= chernoff_tail(size, 2.0 * eps) + 0.01);
    }
  }

  CHECK_THROWS_AS(balanced_probability_estimate(0, 0.1, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(balanced_probability_estimate(10, 0.1, 0, 1), std::invalid_argument);
}

TEST_CASE("scaling fit recovers synthetic power laws") {
  auto square = synthetic_report({64, 128, 256, 512}, 5, [](double n) { return n * n; });
  ScalingFit fs = scaling_fit(square);
  CHECK(std::abs(fs.slope - 2.0) < 1e-6);
  CHECK(std::abs(fs.band) < 1e-9);

  std::vector<std::int64_t> sizes;
  for (int e = 6; e <= 12; ++e) sizes.push_back(1ll << e);
  auto nlogn = synthetic_report(sizes, 5, [](double n) { return n * std::log(n); });
  ScalingFit fl = scaling_fit(nlogn);
  CHECK(fl.slope > 1.0);
  CHECK(fl.slope < 1.3);

  auto flat = synthetic_report({64, 128, 256}, 5, [](double) { return 17.0; });
  CHECK(std::abs(scaling_fit(flat).slope) < 1e-9);

  // zero-length traces clamp to one step inside the log
  auto zeros = synthetic_report({64, 128, 256}, 5, [](double) { return 0.0; });
  CHECK(std::abs(scaling_fit(zeros).slope) < 1e-9);

  auto narrow = synthetic_report({64, 128}, 5, [](double n) { return n; });
  CHECK_THROWS_AS(scaling_fit(narrow), std::invalid_argument);
  auto sparse = synthetic_report({64, 128, 256}, 3, [](double n) { return n; });
  CHECK_THROWS_AS(scaling_fit(sparse), std::invalid_argument);
}

TEST_CASE("aggregates report per-size summary statistics") {
  ExperimentReport r;
  r.family = "synthetic";
  r.sizes = {10, 20};
  r.cells = {{10, 1, 4, true}, {10, 2, 8, true}, {10, 3, 6, true},
             {20, 1, 10, true}, {20, 2, 30, false}};
  auto aggs = aggregate_by_size(r);
  REQUIRE(aggs.size() == 2);
  CHECK(aggs[0].n == 10);
  CHECK(aggs[0].count == 3);
  CHECK(aggs[0].mean == doctest::Approx(6.0));
  CHECK(aggs[0].min == 4);
  CHECK(aggs[0].max == 8);
  CHECK(aggs[0].q50 == doctest::Approx(6.0));
  CHECK(aggs[1].n == 20);
  CHECK(aggs[1].mean == doctest::Approx(20.0));
  CHECK(aggs[1].q25 == doctest::Approx(15.0));
}
