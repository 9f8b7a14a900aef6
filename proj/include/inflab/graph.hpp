#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace inflab {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

// Simple undirected graph stored as CSR adjacency with parallel edge ids.
// Nodes are 0..n-1; edges are kept once as (u, v) with u < v.  Optional
// group annotations attach a label to a node set.  Group metadata is
// advisory: nothing in the dynamics depends on it.
class Graph {
 public:
  Graph() = default;

  Graph(NodeId n, std::vector<std::pair<NodeId, NodeId>> edges,
        std::map<std::string, std::vector<NodeId>> groups = {})
      : n_(n), edges_(std::move(edges)), groups_(std::move(groups)) {
    if (n_ < 0) throw std::invalid_argument("graph: negative node count");
    for (auto& [u, v] : edges_) {
      if (u > v) std::swap(u, v);
      if (u < 0 || v >= n_) throw std::invalid_argument("graph: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("graph: self-loop");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("graph: duplicate edge");
    for (auto& [label, members] : groups_) {
      for (NodeId v : members)
        if (v < 0 || v >= n_)
          throw std::invalid_argument("graph: group '" + label + "' member out of range");
    }
    build_adjacency();
  }

  NodeId node_count() const { return n_; }
  EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }

  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  const std::map<std::string, std::vector<NodeId>>& groups() const { return groups_; }

  const std::vector<NodeId>& group(const std::string& label) const {
    auto it = groups_.find(label);
    if (it == groups_.end()) throw std::out_of_range("graph: no group '" + label + "'");
    return it->second;
  }
  bool has_group(const std::string& label) const { return groups_.count(label) != 0; }

  NodeId degree(NodeId v) const { return offset_[v + 1] - offset_[v]; }

  // Neighbors of v in ascending order.
  struct NeighborRange {
    const NodeId* first;
    const NodeId* last;
    const NodeId* begin() const { return first; }
    const NodeId* end() const { return last; }
    NodeId size() const { return static_cast<NodeId>(last - first); }
  };
  NeighborRange neighbors(NodeId v) const {
    return {adjacency_.data() + offset_[v], adjacency_.data() + offset_[v + 1]};
  }
  // Edge ids aligned with neighbors(v).
  NeighborRange incident_edges(NodeId v) const {
    return {incident_.data() + offset_[v], incident_.data() + offset_[v + 1]};
  }

  bool has_edge(NodeId u, NodeId v) const {
    auto r = neighbors(u);
    return std::binary_search(r.begin(), r.end(), v);
  }

  // Two-colors the graph by BFS; returns the side bitmap or empty if an odd
  // cycle exists.
  std::vector<std::uint8_t> bipartition() const {
    std::vector<std::int8_t> side(n_, -1);
    std::queue<NodeId> queue;
    for (NodeId s = 0; s < n_; ++s) {
      if (side[s] != -1) continue;
      side[s] = 0;
      queue.push(s);
      while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop();
        for (NodeId w : neighbors(u)) {
          if (side[w] == -1) {
            side[w] = static_cast<std::int8_t>(1 - side[u]);
            queue.push(w);
          } else if (side[w] == side[u]) {
            return {};
          }
        }
      }
    }
    return std::vector<std::uint8_t>(side.begin(), side.end());
  }
  bool is_bipartite() const { return n_ == 0 || !bipartition().empty(); }

  // Checks that every member of the group has the same neighbor set outside
  // the group.  Construction families whose groups are interchangeable node
  // sets (same outside neighborhood, hence same switching behavior) audit
  // themselves with this; marker sets such as gadget endpoints do not claim
  // it.
  bool group_is_coherent(const std::string& label) const {
    const auto& members = group(label);
    if (members.size() <= 1) return true;
    std::vector<std::uint8_t> in_group(n_, 0);
    for (NodeId v : members) in_group[v] = 1;
    std::vector<NodeId> base;
    for (NodeId w : neighbors(members[0]))
      if (!in_group[w]) base.push_back(w);
    std::vector<NodeId> other;
    for (std::size_t i = 1; i < members.size(); ++i) {
      other.clear();
      for (NodeId w : neighbors(members[i]))
        if (!in_group[w]) other.push_back(w);
      if (other != base) return false;
    }
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    auto edges = nlohmann::json::array();
    for (const auto& [u, v] : edges_) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    if (!groups_.empty()) {
      nlohmann::json g;
      for (const auto& [label, members] : groups_) g[label] = members;
      j["groups"] = std::move(g);
    }
    return j;
  }

  static Graph from_json(const nlohmann::json& j) {
    NodeId n = j.at("n").get<NodeId>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("graph json: edge must be a pair");
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    std::map<std::string, std::vector<NodeId>> groups;
    if (j.contains("groups"))
      for (const auto& [label, members] : j.at("groups").items())
        groups[label] = members.get<std::vector<NodeId>>();
    return Graph(n, std::move(edges), std::move(groups));
  }

  // Plain edge list, one "u v" line per edge; groups do not survive this
  // format.
  std::string to_edge_list() const {
    std::ostringstream out;
    out << "# nodes " << n_ << "\n";
    for (const auto& [u, v] : edges_) out << u << " " << v << "\n";
    return out.str();
  }

  static Graph from_edge_list(std::istream& in) {
    NodeId n = 0;
    bool n_given = false;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        std::istringstream header(line.substr(1));
        std::string word;
        if (header >> word >> n && word == "nodes") n_given = true;
        continue;
      }
      std::istringstream row(line);
      NodeId u, v;
      if (!(row >> u >> v)) throw std::invalid_argument("edge list: bad line '" + line + "'");
      edges.emplace_back(u, v);
    }
    if (!n_given)
      for (const auto& [u, v] : edges) n = std::max({n, u + 1, v + 1});
    return Graph(n, std::move(edges));
  }

 private:
  void build_adjacency() {
    offset_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++offset_[u + 1];
      ++offset_[v + 1];
    }
    for (NodeId v = 0; v < n_; ++v) offset_[v + 1] += offset_[v];
    adjacency_.resize(edges_.size() * 2);
    incident_.resize(edges_.size() * 2);
    std::vector<NodeId> cursor(offset_.begin(), offset_.end() - 1);
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
      auto [u, v] = edges_[e];
      adjacency_[cursor[u]] = v;
      incident_[cursor[u]++] = e;
      adjacency_[cursor[v]] = u;
      incident_[cursor[v]++] = e;
    }
    // Edge list is sorted, so each adjacency slice comes out sorted too.
  }

  NodeId n_ = 0;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::map<std::string, std::vector<NodeId>> groups_;
  std::vector<NodeId> offset_;
  std::vector<NodeId> adjacency_;
  std::vector<EdgeId> incident_;
};

}  // namespace inflab
