#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace inflab {

enum class Color : std::uint8_t { black = 0, white = 1 };

inline Color flip(Color c) { return c == Color::black ? Color::white : Color::black; }

// One color per node id.  Serialized as a bitstring with '1' = white.
struct Coloring {
  std::vector<Color> colors;

  Coloring() = default;
  explicit Coloring(std::size_t n, Color fill = Color::black) : colors(n, fill) {}

  Color operator[](NodeId v) const { return colors[static_cast<std::size_t>(v)]; }
  Color& operator[](NodeId v) { return colors[static_cast<std::size_t>(v)]; }
  std::size_t size() const { return colors.size(); }

  std::int64_t white_count() const {
    std::int64_t w = 0;
    for (Color c : colors) w += (c == Color::white);
    return w;
  }

  std::string to_bitstring() const {
    std::string s(colors.size(), '0');
    for (std::size_t i = 0; i < colors.size(); ++i)
      if (colors[i] == Color::white) s[i] = '1';
    return s;
  }

  static Coloring from_bitstring(const std::string& s) {
    Coloring col(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') col.colors[i] = Color::white;
      else if (s[i] != '0') throw std::invalid_argument("coloring: bitstring must be 0/1");
    }
    return col;
  }

  friend bool operator==(const Coloring& a, const Coloring& b) { return a.colors == b.colors; }
};

// Each node white with probability 1/2, drawn in node-id order from a
// mt19937_64 stream, so a (graph, seed) pair pins the coloring on every
// platform.
inline Coloring random_coloring(const Graph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Coloring col(static_cast<std::size_t>(g.node_count()));
  std::uint64_t bits = 0;
  int left = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (left == 0) { bits = rng(); left = 64; }
    col[v] = (bits & 1) ? Color::white : Color::black;
    bits >>= 1;
    --left;
  }
  return col;
}

// White share of the set within [1/2 - eps, 1/2 + eps], both ends closed.
// eps is taken at its long-double value; callers that need exactness pass
// eps with a short binary expansion.
inline bool is_epsilon_balanced(const Coloring& col, const std::vector<NodeId>& set,
                                double eps) {
  if (eps < 0) throw std::invalid_argument("epsilon must be non-negative");
  std::int64_t size = static_cast<std::int64_t>(set.size());
  if (size == 0) return true;
  std::int64_t white = 0;
  for (NodeId v : set) white += (col[v] == Color::white);
  long double lo = (0.5L - static_cast<long double>(eps)) * size;
  long double hi = (0.5L + static_cast<long double>(eps)) * size;
  return static_cast<long double>(white) >= lo && static_cast<long double>(white) <= hi;
}

}  // namespace inflab
