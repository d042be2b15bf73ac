#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commtopics/detect.hpp"
#include "commtopics/graph.hpp"

namespace commtopics::testing {

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("commtopics_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline InteractionGraph graph_from_edges(Index n, const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<AccountId> nodes;
  for (Index i = 0; i < n; ++i) nodes.push_back("v" + std::string(i < 10 ? "0" : "") + std::to_string(i));
  std::vector<Edge> edges;
  for (auto [a, b] : pairs) edges.push_back({a, b, 1});
  return InteractionGraph(GraphKind::interaction, std::move(nodes), std::move(edges));
}

// Two k-cliques, nodes [0,k) and [k,2k), joined by the edge (k-1, k).
inline InteractionGraph two_cliques(Index k) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index offset : {Index{0}, k}) {
    for (Index i = 0; i < k; ++i) {
      for (Index j = i + 1; j < k; ++j) pairs.emplace_back(offset + i, offset + j);
    }
  }
  pairs.emplace_back(k - 1, k);
  return graph_from_edges(2 * k, pairs);
}

// Consensus matrix from explicit symmetric pair counts.
inline ConsensusMatrix matrix_from_counts(Index n, int runs,
                                          const std::vector<std::tuple<Index, Index, int>>& entries) {
  std::vector<Eigen::Triplet<std::int32_t>> triplets;
  for (auto [x, y, c] : entries) {
    triplets.emplace_back(x, y, c);
    triplets.emplace_back(y, x, c);
  }
  ConsensusMatrix::CountMatrix counts(n, n);
  counts.setFromTriplets(triplets.begin(), triplets.end());
  return ConsensusMatrix(n, runs, std::move(counts));
}

inline ConsensusMatrix random_matrix(Index n, int runs, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::tuple<Index, Index, int>> entries;
  for (Index x = 0; x < n; ++x) {
    for (Index y = x + 1; y < n; ++y) {
      const int c = static_cast<int>(gen() % static_cast<std::uint64_t>(runs + 1));
      if (c > 0) entries.emplace_back(x, y, c);
    }
  }
  return matrix_from_counts(n, runs, entries);
}

}  // namespace commtopics::testing
