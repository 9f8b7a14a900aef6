#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "graph.hpp"

namespace inflab {

// A script entry is either a node id or a group label; labels expand to the
// group's members in ascending id order, each validated as its own step.
using ScriptEntry = std::variant<NodeId, std::string>;
using Script = std::vector<ScriptEntry>;

inline std::vector<NodeId> expand_script(const Graph& g, const Script& script) {
  std::vector<NodeId> nodes;
  nodes.reserve(script.size());
  for (const ScriptEntry& entry : script) {
    if (std::holds_alternative<NodeId>(entry)) {
      nodes.push_back(std::get<NodeId>(entry));
    } else {
      std::vector<NodeId> members = g.group(std::get<std::string>(entry));
      std::sort(members.begin(), members.end());
      nodes.insert(nodes.end(), members.begin(), members.end());
    }
  }
  return nodes;
}

inline nlohmann::json script_to_json(const Script& script) {
  auto j = nlohmann::json::array();
  for (const ScriptEntry& entry : script) {
    if (std::holds_alternative<NodeId>(entry)) j.push_back(std::get<NodeId>(entry));
    else j.push_back(std::get<std::string>(entry));
  }
  return j;
}

inline Script script_from_json(const nlohmann::json& j) {
  Script script;
  for (const auto& entry : j) {
    if (entry.is_number_integer()) script.push_back(entry.get<NodeId>());
    else if (entry.is_string()) script.push_back(entry.get<std::string>());
    else throw std::invalid_argument("script entry must be node id or group label");
  }
  return script;
}

enum class SchedulerKind : std::uint8_t { scripted, greedy_adversary, random_uniform };

inline std::string to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::scripted: return "scripted";
    case SchedulerKind::greedy_adversary: return "greedy";
    case SchedulerKind::random_uniform: return "random";
  }
  return "?";
}
inline SchedulerKind parse_scheduler_kind(const std::string& s) {
  if (s == "scripted") return SchedulerKind::scripted;
  if (s == "greedy") return SchedulerKind::greedy_adversary;
  if (s == "random") return SchedulerKind::random_uniform;
  throw std::invalid_argument("scheduler must be scripted|greedy|random");
}

// Generator output: the script, whether the good event held, and a free-form
// diagnostics object (phase boundaries, window metrics, failure causes).
struct ScheduleBundle {
  Script script;
  bool good_event = true;
  std::string failure_reason;
  nlohmann::json diagnostics = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["steps"] = script_to_json(script);
    j["good_event"] = good_event;
    if (!good_event) j["failure_reason"] = failure_reason;
    j["diagnostics"] = diagnostics;
    return j;
  }

  static ScheduleBundle from_json(const nlohmann::json& j) {
    ScheduleBundle b;
    b.script = script_from_json(j.at("steps"));
    b.good_event = j.at("good_event").get<bool>();
    if (j.contains("failure_reason")) b.failure_reason = j.at("failure_reason").get<std::string>();
    if (j.contains("diagnostics")) b.diagnostics = j.at("diagnostics");
    return b;
  }
};

}  // namespace inflab
