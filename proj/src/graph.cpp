#include "commtopics/graph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include "commtopics/error.hpp"
#include "commtopics/io.hpp"

namespace commtopics {

namespace {

constexpr const char* kStage = "graph";

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

// Builds a graph from id-keyed weights; nodes sorted lexicographically.
InteractionGraph from_pairs(GraphKind kind,
                            const std::map<std::pair<AccountId, AccountId>, std::int64_t>& pairs) {
  std::set<AccountId> ids;
  for (const auto& [key, weight] : pairs) {
    ids.insert(key.first);
    ids.insert(key.second);
  }
  std::vector<AccountId> nodes(ids.begin(), ids.end());
  std::unordered_map<AccountId, Index> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], static_cast<Index>(i));
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [key, weight] : pairs) {
    edges.push_back({index.at(key.first), index.at(key.second), weight});
  }
  return InteractionGraph(kind, std::move(nodes), std::move(edges));
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

std::string_view to_string(GraphKind kind) {
  return kind == GraphKind::interaction ? "interaction" : "follower";
}

GraphKind parse_graph_kind(std::string_view text) {
  if (text == "interaction") return GraphKind::interaction;
  if (text == "follower") return GraphKind::follower;
  throw ArgumentError(kStage, "unknown network kind '" + std::string(text) + "'");
}

InteractionGraph::InteractionGraph(GraphKind kind, std::vector<AccountId> nodes, std::vector<Edge> edges)
    : kind_(kind), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], static_cast<Index>(i)).second) {
      throw DataError(kStage, "duplicate node id '" + nodes_[i] + "'");
    }
  }
  for (Edge& edge : edges_) {
    if (edge.source > edge.target) std::swap(edge.source, edge.target);
    if (edge.source == edge.target) throw DataError(kStage, "self-loop on '" + node(edge.source) + "'");
    if (edge.source < 0 || edge.target >= node_count()) throw DataError(kStage, "edge endpoint out of range");
    if (edge.weight < 1) throw DataError(kStage, "edge weight must be positive");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  auto duplicate = std::adjacent_find(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.source == b.source && a.target == b.target;
  });
  if (duplicate != edges_.end()) throw DataError(kStage, "duplicate edge");
}

std::optional<Index> InteractionGraph::find(const AccountId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Adjacency InteractionGraph::adjacency() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges_.size() * 2);
  for (const Edge& edge : edges_) {
    const auto w = static_cast<double>(edge.weight);
    triplets.emplace_back(edge.source, edge.target, w);
    triplets.emplace_back(edge.target, edge.source, w);
  }
  Adjacency adjacency(node_count(), node_count());
  adjacency.setFromTriplets(triplets.begin(), triplets.end());
  return adjacency;
}

std::int64_t InteractionGraph::total_weight() const {
  return std::accumulate(edges_.begin(), edges_.end(), std::int64_t{0},
                         [](std::int64_t sum, const Edge& e) { return sum + e.weight; });
}

InteractionGraph build_interaction_graph(const std::vector<InteractionEvent>& events) {
  std::map<std::pair<AccountId, AccountId>, std::int64_t> directed;
  for (const auto& event : events) {
    if (event.source == event.target) continue;
    ++directed[{event.source, event.target}];
  }
  std::map<std::pair<AccountId, AccountId>, std::int64_t> reciprocal;
  for (const auto& [key, forward] : directed) {
    if (key.first > key.second) continue;
    auto back = directed.find({key.second, key.first});
    if (back != directed.end()) reciprocal[key] = forward + back->second;
  }
  return from_pairs(GraphKind::interaction, reciprocal);
}

InteractionGraph build_follower_graph(const std::vector<FollowerEdge>& edges) {
  std::set<std::pair<AccountId, AccountId>> directed;
  for (const auto& edge : edges) {
    if (edge.follower != edge.followee) directed.emplace(edge.follower, edge.followee);
  }
  std::map<std::pair<AccountId, AccountId>, std::int64_t> reciprocal;
  for (const auto& [a, b] : directed) {
    if (a < b && directed.count({b, a})) reciprocal[{a, b}] = 1;
  }
  return from_pairs(GraphKind::follower, reciprocal);
}

std::vector<Index> connected_components(const InteractionGraph& graph) {
  DisjointSets sets(static_cast<std::size_t>(graph.node_count()));
  for (const Edge& edge : graph.edges()) {
    sets.unite(static_cast<std::size_t>(edge.source), static_cast<std::size_t>(edge.target));
  }
  std::vector<Index> labels(static_cast<std::size_t>(graph.node_count()));
  std::unordered_map<std::size_t, Index> relabel;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = relabel.emplace(sets.find(i), static_cast<Index>(relabel.size()));
    labels[i] = it->second;
  }
  return labels;
}

InteractionGraph filter_components(const InteractionGraph& graph, Index min_size) {
  const auto labels = connected_components(graph);
  std::vector<Index> sizes;
  for (Index label : labels) {
    if (label >= static_cast<Index>(sizes.size())) sizes.resize(static_cast<std::size_t>(label) + 1, 0);
    ++sizes[static_cast<std::size_t>(label)];
  }
  std::vector<Index> remap(labels.size(), -1);
  std::vector<AccountId> nodes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (sizes[static_cast<std::size_t>(labels[i])] >= min_size) {
      remap[i] = static_cast<Index>(nodes.size());
      nodes.push_back(graph.nodes()[i]);
    }
  }
  std::vector<Edge> edges;
  for (const Edge& edge : graph.edges()) {
    const Index s = remap[static_cast<std::size_t>(edge.source)];
    if (s < 0) continue;
    edges.push_back({s, remap[static_cast<std::size_t>(edge.target)], edge.weight});
  }
  return InteractionGraph(graph.kind(), std::move(nodes), std::move(edges));
}

std::vector<double> betweenness_centrality(const InteractionGraph& graph) {
  const auto n = static_cast<std::size_t>(graph.node_count());
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (const Edge& edge : graph.edges()) {
    neighbours[static_cast<std::size_t>(edge.source)].push_back(static_cast<std::size_t>(edge.target));
    neighbours[static_cast<std::size_t>(edge.target)].push_back(static_cast<std::size_t>(edge.source));
  }
  std::vector<double> centrality(n, 0.0);
  std::vector<std::vector<std::size_t>> predecessors(n);
  std::vector<double> paths(n), dependency(n);
  std::vector<long> distance(n);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    stack.clear();
    for (auto& p : predecessors) p.clear();
    std::fill(paths.begin(), paths.end(), 0.0);
    std::fill(distance.begin(), distance.end(), -1);
    paths[s] = 1.0;
    distance[s] = 0;
    std::queue<std::size_t> queue;
    queue.push(s);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop();
      stack.push_back(v);
      for (std::size_t w : neighbours[v]) {
        if (distance[w] < 0) {
          distance[w] = distance[v] + 1;
          queue.push(w);
        }
        if (distance[w] == distance[v] + 1) {
          paths[w] += paths[v];
          predecessors[w].push_back(v);
        }
      }
    }
    std::fill(dependency.begin(), dependency.end(), 0.0);
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : predecessors[w]) {
        dependency[v] += paths[v] / paths[w] * (1.0 + dependency[w]);
      }
      if (w != s) centrality[w] += dependency[w];
    }
  }
  // Each unordered pair was visited from both ends.
  const double scale = n > 2 ? 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)) : 0.0;
  for (double& c : centrality) c *= scale;
  return centrality;
}

void write_gexf(std::ostream& out, const InteractionGraph& graph) {
  std::vector<Index> order(static_cast<std::size_t>(graph.node_count()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return graph.node(a) < graph.node(b); });

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n"
      << "  <meta>\n    <creator>commtopics</creator>\n"
      << "    <description>reciprocal " << to_string(graph.kind()) << " network</description>\n"
      << "  </meta>\n"
      << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
      << "    <nodes count=\"" << graph.node_count() << "\">\n";
  for (Index i : order) {
    const auto id = xml_escape(graph.node(i));
    out << "      <node id=\"" << id << "\" label=\"" << id << "\"/>\n";
  }
  out << "    </nodes>\n    <edges count=\"" << graph.edge_count() << "\">\n";

  std::vector<std::size_t> edge_order(graph.edges().size());
  std::iota(edge_order.begin(), edge_order.end(), 0);
  auto ends = [&](const Edge& e) {
    const auto& a = graph.node(e.source);
    const auto& b = graph.node(e.target);
    return a < b ? std::pair<const AccountId&, const AccountId&>(a, b)
                 : std::pair<const AccountId&, const AccountId&>(b, a);
  };
  std::sort(edge_order.begin(), edge_order.end(), [&](std::size_t a, std::size_t b) {
    return ends(graph.edges()[a]) < ends(graph.edges()[b]);
  });
  std::size_t id = 0;
  for (std::size_t k : edge_order) {
    const Edge& edge = graph.edges()[k];
    const auto [a, b] = ends(edge);
    out << "      <edge id=\"" << id++ << "\" source=\"" << xml_escape(a) << "\" target=\""
        << xml_escape(b) << "\" weight=\"" << edge.weight << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
}

void write_edge_csv(std::ostream& out, const InteractionGraph& graph) {
  std::vector<std::tuple<std::string_view, std::string_view, std::int64_t>> rows;
  rows.reserve(graph.edges().size());
  for (const Edge& edge : graph.edges()) {
    std::string_view a = graph.node(edge.source);
    std::string_view b = graph.node(edge.target);
    if (b < a) std::swap(a, b);
    rows.emplace_back(a, b, edge.weight);
  }
  std::sort(rows.begin(), rows.end());
  out << "source,target,weight\n";
  for (const auto& [a, b, w] : rows) {
    out << io::csv_field(a) << ',' << io::csv_field(b) << ',' << w << '\n';
  }
}

InteractionGraph read_edge_csv(std::istream& in, GraphKind kind) {
  std::string raw;
  if (!std::getline(in, raw) || io::split_csv_line(io::trim_line(raw, true)) !=
                                    std::vector<std::string>{"source", "target", "weight"}) {
    throw DataError(kStage, "edge list must start with header source,target,weight");
  }
  std::map<std::pair<AccountId, AccountId>, std::int64_t> pairs;
  std::size_t line_number = 1;
  while (std::getline(in, raw)) {
    ++line_number;
    const auto line = io::trim_line(raw, false);
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    std::int64_t weight = 0;
    try {
      if (fields.size() != 3) throw std::invalid_argument("column count");
      weight = std::stoll(fields[2]);
    } catch (const std::exception&) {
      throw DataError(kStage, "malformed edge row at line " + std::to_string(line_number));
    }
    if (fields[0] > fields[1]) std::swap(fields[0], fields[1]);
    pairs[{fields[0], fields[1]}] = weight;
  }
  return from_pairs(kind, pairs);
}

InteractionGraph read_edge_csv(const std::filesystem::path& path, GraphKind kind) {
  auto in = io::open_input(path, kStage);
  return read_edge_csv(in, kind);
}

}  // namespace commtopics
