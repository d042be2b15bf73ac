#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "commtopics/ingest.hpp"

namespace commtopics {

using Index = Eigen::Index;

// Symmetric weighted adjacency in CSR form. Self-loops carry their full
// weight on the diagonal, so row sums are weighted degrees.
using Adjacency = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class GraphKind { interaction, follower };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view text);

struct Edge {
  Index source = 0;  // source < target
  Index target = 0;
  std::int64_t weight = 1;

  bool operator==(const Edge&) const = default;
};

// Undirected graph over account ids. Nodes are kept in a fixed order
// (lexicographic after construction); edges are sorted by (source, target)
// in node-index space and never contain self-loops.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  InteractionGraph(GraphKind kind, std::vector<AccountId> nodes, std::vector<Edge> edges);

  GraphKind kind() const { return kind_; }
  Index node_count() const { return static_cast<Index>(nodes_.size()); }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  bool empty() const { return nodes_.empty(); }

  const std::vector<AccountId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const AccountId& node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::optional<Index> find(const AccountId& id) const;

  Adjacency adjacency() const;
  std::int64_t total_weight() const;

  bool operator==(const InteractionGraph& other) const {
    return kind_ == other.kind_ && nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  GraphKind kind_ = GraphKind::interaction;
  std::vector<AccountId> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<AccountId, Index> index_;
};

// Edge {a,b} iff a->b and b->a both occur (mentions and retweets pooled);
// weight counts events in both directions.
InteractionGraph build_interaction_graph(const std::vector<InteractionEvent>& events);

// Edge {a,b} iff both follow directions exist; weight 1.
InteractionGraph build_follower_graph(const std::vector<FollowerEdge>& edges);

// Keeps connected components with at least `min_size` nodes.
InteractionGraph filter_components(const InteractionGraph& graph, Index min_size = 5);

// Component label per node, labels numbered by first appearance.
std::vector<Index> connected_components(const InteractionGraph& graph);

// Unweighted shortest-path betweenness (Brandes), undirected normalization.
std::vector<double> betweenness_centrality(const InteractionGraph& graph);

void write_gexf(std::ostream& out, const InteractionGraph& graph);
void write_edge_csv(std::ostream& out, const InteractionGraph& graph);
InteractionGraph read_edge_csv(std::istream& in, GraphKind kind);
InteractionGraph read_edge_csv(const std::filesystem::path& path, GraphKind kind);

}  // namespace commtopics
