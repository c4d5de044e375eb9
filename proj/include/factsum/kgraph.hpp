#pragma once

// Levi-transformed undirected knowledge graph over relation tuples: subjects,
// relations and objects all become nodes; each tuple contributes edges s--r
// and r--o. Graphs are built per document and discarded, never shared.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "factsum/openie.hpp"

namespace factsum::kgraph {

enum class NodeKind { Entity, Relation };

struct Node {
  int id = 0;
  std::string text;
  NodeKind kind = NodeKind::Entity;
};

struct KnowledgeGraph {
  std::vector<Node> nodes;                      // ids dense 0..|V|-1
  std::vector<std::pair<int, int>> edges;       // undirected, i < j, no dups
  std::vector<std::vector<int>> adjacency;      // per-node neighbor lists

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
  bool empty() const { return nodes.empty(); }
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t max_degree = 0;
  std::size_t component_count = 0;
};

namespace detail {

struct Builder {
  KnowledgeGraph g;
  std::unordered_map<std::string, int> entity_by_text;

  int entity_node(const std::string& text) {
    const auto key = openie::detail::normalize_slot(text);
    auto it = entity_by_text.find(key);
    if (it != entity_by_text.end()) return it->second;
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({id, text, NodeKind::Entity});
    g.adjacency.emplace_back();
    entity_by_text.emplace(key, id);
    return id;
  }

  int relation_node(const std::string& text) {
    // relation nodes are tuple-local: identical relation strings between
    // different entity pairs stay distinct
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({id, text, NodeKind::Relation});
    g.adjacency.emplace_back();
    return id;
  }

  void add_edge(int a, int b) {
    if (a == b) return;  // no self-loops
    if (a > b) std::swap(a, b);
    for (const auto& e : g.edges)
      if (e.first == a && e.second == b) return;
    g.edges.emplace_back(a, b);
    g.adjacency[static_cast<std::size_t>(a)].push_back(b);
    g.adjacency[static_cast<std::size_t>(b)].push_back(a);
  }
};

}  // namespace detail

// Entity nodes merge on normalized text; every tuple gets its own relation
// node. The input is already deduplicated at the tuple level upstream.
inline KnowledgeGraph build_graph(const openie::TupleSet& tuples) {
  detail::Builder b;
  for (const auto& t : tuples.tuples) {
    const int s = b.entity_node(t.subject);
    const int r = b.relation_node(t.relation);
    const int o = b.entity_node(t.object);
    b.add_edge(s, r);
    b.add_edge(r, o);
  }
  return std::move(b.g);
}

inline GraphStats graph_stats(const KnowledgeGraph& g) {
  GraphStats st;
  st.node_count = g.nodes.size();
  st.edge_count = g.edges.size();
  for (const auto& nbrs : g.adjacency) st.max_degree = std::max(st.max_degree, nbrs.size());
  std::vector<bool> seen(g.nodes.size(), false);
  for (std::size_t start = 0; start < g.nodes.size(); ++start) {
    if (seen[start]) continue;
    ++st.component_count;
    std::vector<std::size_t> stack = {start};
    seen[start] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (int u : g.adjacency[v]) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = true;
          stack.push_back(static_cast<std::size_t>(u));
        }
      }
    }
  }
  return st;
}

}  // namespace factsum::kgraph
