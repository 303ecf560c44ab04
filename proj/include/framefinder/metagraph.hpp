#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "framefinder/amr.hpp"
#include "framefinder/errors.hpp"

namespace framefinder {

enum class MetaNodeKind { concept_node, constant };

struct MetaNode {
  std::string key;
  MetaNodeKind kind = MetaNodeKind::concept_node;
  std::uint64_t weight = 0;       // sum over graphs of the node's degree
  std::uint64_t graph_count = 0;  // graphs containing the key

  friend bool operator==(const MetaNode&, const MetaNode&) = default;
};

struct EdgeKey {
  std::string source;
  std::string role;
  std::string target;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

struct MetaEdge {
  std::string source;
  std::string role;
  std::string target;
  std::uint64_t weight = 0;

  EdgeKey key() const { return {source, role, target}; }
  friend bool operator==(const MetaEdge&, const MetaEdge&) = default;
};

/// How an edge contributes to its MetaEdge weight.
enum class EdgeWeighting {
  occurrences,  // every occurrence counts
  graphs,       // at most once per source graph
};

/// Statistic used by filter_by_weight.
enum class FilterStatistic {
  degree_weighted,  // MetaNode::weight
  graph_count,      // MetaNode::graph_count
};

inline std::string_view to_string(EdgeWeighting w) {
  return w == EdgeWeighting::occurrences ? "occurrences" : "graphs";
}

inline std::string_view to_string(FilterStatistic s) {
  return s == FilterStatistic::degree_weighted ? "degree_weighted" : "graph_count";
}

inline EdgeWeighting edge_weighting_from_string(std::string_view s) {
  if (s == "occurrences") return EdgeWeighting::occurrences;
  if (s == "graphs") return EdgeWeighting::graphs;
  throw ConfigError("unknown edge weighting '" + std::string(s) + "'");
}

inline FilterStatistic filter_statistic_from_string(std::string_view s) {
  if (s == "degree_weighted") return FilterStatistic::degree_weighted;
  if (s == "graph_count") return FilterStatistic::graph_count;
  throw ConfigError("unknown filter statistic '" + std::string(s) + "'");
}

/// Superimposed graph. Nodes and edges are keyed maps, so iteration order
/// (and every export) is independent of the order graphs were added in.
struct MetaGraph {
  std::map<std::string, MetaNode> nodes;
  std::map<EdgeKey, MetaEdge> edges;
  std::uint64_t n_source_graphs = 0;
  std::uint64_t n_cyclic_sources = 0;

  bool empty() const noexcept { return nodes.empty(); }

  std::uint64_t total_node_weight() const {
    std::uint64_t w = 0;
    for (const auto& [k, n] : nodes) w += n.weight;
    return w;
  }

  friend bool operator==(const MetaGraph&, const MetaGraph&) = default;
};

inline constexpr std::string_view kConstantPrefix = "const:";

/// Merge key: concept label with sense suffix kept, or "const:" + literal.
inline std::string merge_key(const amr::AmrNode& node) {
  if (node.kind == amr::NodeKind::constant) return std::string(kConstantPrefix) + node.label;
  return node.label;
}

/// Adds one graph's contribution to `meta`.
inline void accumulate(MetaGraph& meta, const amr::AmrGraph& g,
                       EdgeWeighting weighting = EdgeWeighting::occurrences) {
  const auto degrees = g.degrees();
  std::vector<std::string> keys;
  keys.reserve(g.nodes.size());
  std::map<std::string, bool> seen_in_graph;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    keys.push_back(merge_key(g.nodes[i]));
    auto [it, inserted] = meta.nodes.try_emplace(keys.back());
    MetaNode& node = it->second;
    if (inserted) {
      node.key = keys.back();
      node.kind = g.nodes[i].kind == amr::NodeKind::constant ? MetaNodeKind::constant
                                                             : MetaNodeKind::concept_node;
    }
    node.weight += degrees[i];
    if (seen_in_graph.emplace(keys.back(), true).second) ++node.graph_count;
  }
  std::map<EdgeKey, bool> edge_seen;
  for (const auto& e : g.edges) {
    EdgeKey k{keys[e.source], e.role, keys[e.target]};
    const bool first_in_graph = edge_seen.emplace(k, true).second;
    auto [it, inserted] = meta.edges.try_emplace(k);
    if (inserted) it->second = {k.source, k.role, k.target, 0};
    if (weighting == EdgeWeighting::occurrences || first_in_graph) ++it->second.weight;
  }
  ++meta.n_source_graphs;
  if (g.cyclic) ++meta.n_cyclic_sources;
}

/// Elementwise sum of two metagraphs (superimposition is additive).
inline MetaGraph merge(MetaGraph a, const MetaGraph& b) {
  for (const auto& [k, n] : b.nodes) {
    auto [it, inserted] = a.nodes.try_emplace(k, n);
    if (!inserted) {
      it->second.weight += n.weight;
      it->second.graph_count += n.graph_count;
    }
  }
  for (const auto& [k, e] : b.edges) {
    auto [it, inserted] = a.edges.try_emplace(k, e);
    if (!inserted) it->second.weight += e.weight;
  }
  a.n_source_graphs += b.n_source_graphs;
  a.n_cyclic_sources += b.n_cyclic_sources;
  return a;
}

inline MetaGraph superimpose(std::span<const amr::AmrGraph> graphs,
                             EdgeWeighting weighting = EdgeWeighting::occurrences) {
  if (graphs.empty()) throw EmptyInput("no graphs to superimpose");
  MetaGraph meta;
  for (const auto& g : graphs) accumulate(meta, g, weighting);
  return meta;
}

inline std::uint64_t filter_value(const MetaNode& n, FilterStatistic stat) {
  return stat == FilterStatistic::degree_weighted ? n.weight : n.graph_count;
}

/// Keeps nodes whose statistic is >= node_threshold and the edges between
/// them. Weights are unchanged.
inline MetaGraph filter_by_weight(const MetaGraph& meta, std::uint64_t node_threshold,
                                  FilterStatistic stat = FilterStatistic::degree_weighted) {
  MetaGraph out;
  out.n_source_graphs = meta.n_source_graphs;
  out.n_cyclic_sources = meta.n_cyclic_sources;
  for (const auto& [k, n] : meta.nodes) {
    if (filter_value(n, stat) >= node_threshold) out.nodes.emplace(k, n);
  }
  for (const auto& [k, e] : meta.edges) {
    if (out.nodes.contains(e.source) && out.nodes.contains(e.target)) out.edges.emplace(k, e);
  }
  return out;
}

/// Largest component when edge directions are ignored. Ties go to the
/// component with more total node weight, then to the one holding the
/// lexicographically smallest node key.
inline MetaGraph largest_weakly_connected_component(const MetaGraph& meta) {
  if (meta.empty()) throw EmptyGraph("metagraph has no nodes");

  std::vector<const MetaNode*> nodes;
  std::map<std::string_view, std::size_t> index;
  for (const auto& [k, n] : meta.nodes) {
    index.emplace(k, nodes.size());
    nodes.push_back(&n);
  }
  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [k, e] : meta.edges) {
    const std::size_t a = find(index.at(e.source));
    const std::size_t b = find(index.at(e.target));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  struct Component {
    std::size_t size = 0;
    std::uint64_t weight = 0;
    std::size_t first = 0;  // index of smallest key (nodes are key-sorted)
  };
  std::map<std::size_t, Component> comps;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t r = find(i);
    auto [it, inserted] = comps.try_emplace(r);
    if (inserted) it->second.first = i;
    ++it->second.size;
    it->second.weight += nodes[i]->weight;
  }
  std::size_t best_root = comps.begin()->first;
  for (const auto& [root, c] : comps) {
    const auto& b = comps.at(best_root);
    if (std::tie(c.size, c.weight) > std::tie(b.size, b.weight) ||
        (c.size == b.size && c.weight == b.weight && c.first < b.first)) {
      best_root = root;
    }
  }

  MetaGraph out;
  out.n_source_graphs = meta.n_source_graphs;
  out.n_cyclic_sources = meta.n_cyclic_sources;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (find(i) == best_root) out.nodes.emplace(nodes[i]->key, *nodes[i]);
  }
  for (const auto& [k, e] : meta.edges) {
    if (out.nodes.contains(e.source)) out.edges.emplace(k, e);
  }
  return out;
}

/// Filter then keep the largest weakly connected component; an empty
/// filter result stays empty.
inline MetaGraph structure_view(const MetaGraph& meta, std::uint64_t node_threshold,
                                FilterStatistic stat = FilterStatistic::degree_weighted) {
  MetaGraph filtered = filter_by_weight(meta, node_threshold, stat);
  if (filtered.empty()) return filtered;
  return largest_weakly_connected_component(filtered);
}

inline constexpr int kGraphJsonVersion = 1;

inline std::string_view to_string(MetaNodeKind k) {
  return k == MetaNodeKind::concept_node ? "concept" : "constant";
}

/// Nodes by descending weight then key; edges by descending weight then
/// (source, role, target).
inline std::vector<const MetaNode*> sorted_nodes(const MetaGraph& meta) {
  std::vector<const MetaNode*> out;
  for (const auto& [k, n] : meta.nodes) out.push_back(&n);
  std::stable_sort(out.begin(), out.end(), [](const MetaNode* a, const MetaNode* b) {
    if (a->weight != b->weight) return a->weight > b->weight;
    return a->key < b->key;
  });
  return out;
}

inline std::vector<const MetaEdge*> sorted_edges(const MetaGraph& meta) {
  std::vector<const MetaEdge*> out;
  for (const auto& [k, e] : meta.edges) out.push_back(&e);
  std::stable_sort(out.begin(), out.end(), [](const MetaEdge* a, const MetaEdge* b) {
    if (a->weight != b->weight) return a->weight > b->weight;
    return a->key() < b->key();
  });
  return out;
}

inline nlohmann::json to_graph_json(const MetaGraph& meta) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const MetaNode* n : sorted_nodes(meta)) {
    nodes.push_back({{"key", n->key},
                     {"kind", to_string(n->kind)},
                     {"weight", n->weight},
                     {"graph_count", n->graph_count}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const MetaEdge* e : sorted_edges(meta)) {
    edges.push_back(
        {{"source", e->source}, {"role", e->role}, {"target", e->target}, {"weight", e->weight}});
  }
  return {{"version", kGraphJsonVersion},
          {"n_source_graphs", meta.n_source_graphs},
          {"n_cyclic_sources", meta.n_cyclic_sources},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

inline MetaGraph from_graph_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) {
      throw ProtocolError("graph-json needs \"nodes\" and \"edges\"");
    }
    if (j.contains("version") && j.at("version").get<int>() != kGraphJsonVersion) {
      throw ProtocolError("unsupported graph-json version");
    }
    MetaGraph meta;
    meta.n_source_graphs = j.value("n_source_graphs", std::uint64_t{0});
    meta.n_cyclic_sources = j.value("n_cyclic_sources", std::uint64_t{0});
    for (const auto& n : j.at("nodes")) {
      MetaNode node;
      node.key = n.at("key").get<std::string>();
      const auto kind = n.at("kind").get<std::string>();
      if (kind == "concept") node.kind = MetaNodeKind::concept_node;
      else if (kind == "constant") node.kind = MetaNodeKind::constant;
      else throw ProtocolError("unknown node kind '" + kind + "'");
      node.weight = n.at("weight").get<std::uint64_t>();
      node.graph_count = n.at("graph_count").get<std::uint64_t>();
      if (!meta.nodes.emplace(node.key, node).second) {
        throw ProtocolError("duplicate node '" + node.key + "'");
      }
    }
    for (const auto& e : j.at("edges")) {
      MetaEdge edge{e.at("source").get<std::string>(), e.at("role").get<std::string>(),
                    e.at("target").get<std::string>(), e.at("weight").get<std::uint64_t>()};
      if (!meta.nodes.contains(edge.source) || !meta.nodes.contains(edge.target)) {
        throw ProtocolError("edge endpoint missing from nodes");
      }
      if (!meta.edges.emplace(edge.key(), edge).second) throw ProtocolError("duplicate edge");
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed graph-json: ") + e.what());
  }
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Pen width grows with log(weight); weight 1 draws at width 1.
inline double pen_width(std::uint64_t weight) {
  return 1.0 + std::log(static_cast<double>(std::max<std::uint64_t>(weight, 1)));
}

inline std::string to_dot(const MetaGraph& meta) {
  std::ostringstream out;
  out << "digraph metagraph {\n";
  for (const MetaNode* n : sorted_nodes(meta)) {
    out << "  " << detail::dot_quote(n->key) << " [label="
        << detail::dot_quote(n->key + " (" + std::to_string(n->weight) + ")")
        << ", shape=" << (n->kind == MetaNodeKind::constant ? "box" : "ellipse") << "];\n";
  }
  for (const MetaEdge* e : sorted_edges(meta)) {
    out << "  " << detail::dot_quote(e->source) << " -> " << detail::dot_quote(e->target)
        << " [label=" << detail::dot_quote(e->role) << ", penwidth=" << std::fixed
        << std::setprecision(3) << pen_width(e->weight) << "];\n";
  }
  out << "}\n";
  return out.str();
}

enum class GraphFormat { dot, graph_json };

inline GraphFormat graph_format_from_string(std::string_view s) {
  if (s == "dot") return GraphFormat::dot;
  if (s == "graph-json") return GraphFormat::graph_json;
  throw UnsupportedFormat("unsupported graph format '" + std::string(s) + "'");
}

inline std::string export_graph(const MetaGraph& meta, GraphFormat format) {
  if (format == GraphFormat::dot) return to_dot(meta);
  return to_graph_json(meta).dump(2) + "\n";
}

inline std::string export_graph(const MetaGraph& meta, std::string_view format) {
  return export_graph(meta, graph_format_from_string(format));
}

}  // namespace framefinder
