#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloring.hpp"
#include "dynamics.hpp"

namespace inflab {

struct TraceStep {
  NodeId node;
  std::int64_t delta;  // change in total conflicts, always negative for legal switches
  friend bool operator==(const TraceStep& a, const TraceStep& b) {
    return a.node == b.node && a.delta == b.delta;
  }
};

// A run transcript: the initial coloring plus one (node, delta) record per
// switch.  stabilized is true when no node was switchable at the end.
struct Trace {
  Coloring initial;
  std::vector<TraceStep> steps;
  bool stabilized = false;

  std::size_t length() const { return steps.size(); }

  Coloring final_coloring() const {
    Coloring col = initial;
    for (const TraceStep& s : steps) col[s.node] = flip(col[s.node]);
    return col;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["initial"] = initial.to_bitstring();
    auto steps_json = nlohmann::json::array();
    for (const TraceStep& s : steps) steps_json.push_back({s.node, s.delta});
    j["steps"] = std::move(steps_json);
    j["stabilized"] = stabilized;
    return j;
  }

  static Trace from_json(const nlohmann::json& j) {
    Trace t;
    t.initial = Coloring::from_bitstring(j.at("initial").get<std::string>());
    for (const auto& s : j.at("steps")) {
      if (!s.is_array() || s.size() != 2)
        throw std::invalid_argument("trace json: step must be [node, delta]");
      t.steps.push_back({s[0].get<NodeId>(), s[1].get<std::int64_t>()});
    }
    t.stabilized = j.at("stabilized").get<bool>();
    return t;
  }
};

// Walks the trace against the graph, re-checking legality and deltas of
// every step.  Returns the index of the first bad step, or -1 if clean.
inline std::int64_t verify_trace(const Graph& g, const Trace& t, ProcessKind kind,
                                 const SwitchRule& rule) {
  ConflictState st(g, t.initial, kind, rule);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    NodeId v = t.steps[i].node;
    if (v < 0 || v >= g.node_count() || !st.switchable(v))
      return static_cast<std::int64_t>(i);
    std::int64_t delta = st.flip_node(v);
    if (delta != t.steps[i].delta) return static_cast<std::int64_t>(i);
  }
  return -1;
}

}  // namespace inflab
