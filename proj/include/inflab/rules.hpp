#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rational.hpp"

namespace inflab {

// Majority: a node is in conflict with opposite-colored neighbors.
// Minority: with same-colored neighbors.
enum class ProcessKind : std::uint8_t { majority, minority };

inline std::string to_string(ProcessKind k) {
  return k == ProcessKind::majority ? "majority" : "minority";
}
inline ProcessKind parse_process_kind(const std::string& s) {
  if (s == "majority") return ProcessKind::majority;
  if (s == "minority") return ProcessKind::minority;
  throw std::invalid_argument("process kind must be majority|minority");
}

// Basic rule: switch when conflicts exceed half the degree (strict).
// Proportional rule: switch when conflicts reach (1+lambda)/2 of the degree
// (non-strict), lambda in (0,1).  Thresholds are evaluated by integer
// cross-multiplication, so a rational lambda is exact; decimals parse to
// rationals exactly as written.
struct SwitchRule {
  enum class Kind : std::uint8_t { basic, proportional };
  Kind kind = Kind::basic;
  Rational lambda{0, 1};

  static SwitchRule basic() { return SwitchRule{}; }
  static SwitchRule proportional(Rational lam) {
    if (!(lam > Rational(0, 1)) || !(lam < Rational(1, 1)))
      throw std::invalid_argument("proportional rule needs lambda in (0,1)");
    return SwitchRule{Kind::proportional, lam};
  }
  static SwitchRule proportional(std::int64_t num, std::int64_t den) {
    return proportional(Rational(num, den));
  }

  // conflicts out of degree meet the switching threshold
  bool triggers(std::int64_t conflicts, std::int64_t degree) const {
    if (degree <= 0) return false;  // isolated nodes never switch
    if (kind == Kind::basic) return 2 * conflicts > degree;
    return static_cast<__int128>(2) * lambda.den * conflicts >=
           static_cast<__int128>(lambda.den + lambda.num) * degree;
  }

  std::string describe() const {
    if (kind == Kind::basic) return "basic";
    return "proportional(" + to_string(lambda) + ")";
  }
};

// High-degree cutoff d_v >= c0 * ln(n), natural log.
struct DegreeClassifier {
  double c0 = 0.0;
  std::int64_t n = 1;

  DegreeClassifier() = default;
  DegreeClassifier(double c0_, std::int64_t n_) : c0(c0_), n(n_) {
    if (c0 < 0 || n < 1) throw std::invalid_argument("classifier needs c0 >= 0, n >= 1");
  }

  double threshold() const { return c0 * std::log(static_cast<double>(n)); }
  bool is_high_degree(std::int64_t degree) const {
    return static_cast<double>(degree) >= threshold();
  }
};

}  // namespace inflab
