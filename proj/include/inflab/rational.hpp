#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace inflab {

// Small exact rational, used for switching thresholds and the opening
// recurrence targets.  Comparisons go through 128-bit intermediates so that
// threshold tests never round.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    reduce();
  }

  void reduce() {
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
};

// Accepts "a/b", plain integers, and finite decimals ("0.35" reads as 35/100,
// which is exact).  Anything else is an error.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("rational: empty string");
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t pa = 0, pb = 0;
      std::int64_t a = std::stoll(text.substr(0, slash), &pa);
      std::int64_t b = std::stoll(text.substr(slash + 1), &pb);
      if (pa != slash || pb != text.size() - slash - 1)
        throw std::invalid_argument("trailing junk");
      return Rational(a, b);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
      std::size_t p = 0;
      std::int64_t a = std::stoll(text, &p);
      if (p != text.size()) throw std::invalid_argument("trailing junk");
      return Rational(a, 1);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (frac_len == 0 || frac_len > 17) throw std::invalid_argument("bad decimal");
    std::size_t p = 0;
    std::int64_t a = std::stoll(digits, &p);
    if (p != digits.size()) throw std::invalid_argument("trailing junk");
    std::int64_t b = 1;
    for (std::size_t i = 0; i < frac_len; ++i) b *= 10;
    return Rational(a, b);
  } catch (const std::exception&) {
    throw std::invalid_argument("rational: cannot parse '" + text + "'");
  }
}

inline std::string to_string(const Rational& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace inflab
