#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "commtopics/graph.hpp"

namespace commtopics {

enum class DetectionMethod { louvain, label_propagation };

std::string_view to_string(DetectionMethod method);
DetectionMethod parse_detection_method(std::string_view text);

// Non-overlapping assignment of node indices to communities 0..k-1.
// Labels are canonical: numbered in order of first appearance by node index.
struct Partition {
  std::vector<Index> assignment;
  double resolution = 1.0;
  std::uint64_t seed = 0;

  Index community_count() const;
  std::vector<std::vector<Index>> communities() const;
  bool same_grouping(const Partition& other) const { return assignment == other.assignment; }
};

// Relabels so that communities are numbered by first appearance.
std::vector<Index> canonical_labels(std::span<const Index> labels);

// Weighted modularity with resolution multiplier, self-loops on the diagonal.
double modularity(const Adjacency& adjacency, std::span<const Index> assignment, double resolution = 1.0);

// Multi-level Louvain with a seeded random node visitation order.
Partition louvain(const Adjacency& adjacency, double resolution, std::uint64_t seed);

// Asynchronous label propagation; ties broken at random, current label kept
// when it is among the maxima.
Partition label_propagation(const Adjacency& adjacency, std::uint64_t seed, int max_sweeps = 100);

Partition detect_once(const Adjacency& adjacency, double resolution, std::uint64_t seed,
                      DetectionMethod method);
Partition detect_once(const InteractionGraph& graph, double resolution, std::uint64_t seed,
                      DetectionMethod method);

// Pairwise co-assignment frequencies over an ensemble of partitions. Only
// pairs that were co-assigned at least once are stored; counts are exact
// integers so M(x,y) * run_count() is integral.
class ConsensusMatrix {
 public:
  using CountMatrix = Eigen::SparseMatrix<std::int32_t>;

  ConsensusMatrix() = default;
  ConsensusMatrix(Index node_count, int run_count, CountMatrix counts);

  static ConsensusMatrix from_partitions(Index node_count, std::span<const Partition> partitions);

  Index size() const { return node_count_; }
  int run_count() const { return run_count_; }
  std::int32_t count(Index x, Index y) const;
  double operator()(Index x, Index y) const;

  // Symmetric counts without the diagonal.
  const CountMatrix& counts() const { return counts_; }

  // Unordered pairs (x < y) with M(x,y) >= tau, sorted.
  std::vector<std::pair<Index, Index>> retained_pairs(double tau) const;

  // Consensus graph: pairs with M(x,y) >= tau, weighted by M(x,y).
  Adjacency thresholded(double tau) const;

 private:
  Index node_count_ = 0;
  int run_count_ = 0;
  CountMatrix counts_;
};

struct ConsensusOptions {
  double resolution = 1.0;
  int runs = 100;
  double tau = 0.5;
  std::uint64_t seed = 0;
  DetectionMethod method = DetectionMethod::louvain;
  int max_iterations = 10;
  int threads = 1;
};

struct ConsensusResult {
  std::vector<std::vector<Index>> communities;  // node indices, each sorted
  std::vector<Index> unassigned;
  double tau = 0.5;
  double resolution = 1.0;
  int runs = 0;
  int iterations = 0;
  bool converged = false;
  // Ensemble over the input graph; the reference for stability scoring.
  ConsensusMatrix matrix;

  Index assigned_count() const;
  // Communities plus one singleton per unassigned node, as a Partition.
  Partition as_partition(Index node_count) const;
};

// Runs the detector `runs` times, thresholds the consensus matrix at tau and
// re-clusters the consensus graph until all runs agree. Results are
// independent of `threads`.
ConsensusResult consensus(const Adjacency& adjacency, const ConsensusOptions& options);
ConsensusResult consensus(const InteractionGraph& graph, const ConsensusOptions& options);

// One partition per seed in [seed, seed + runs), stored by run index.
std::vector<Partition> detector_ensemble(const Adjacency& adjacency, double resolution,
                                         std::uint64_t seed, int runs, DetectionMethod method,
                                         int threads = 1);

}  // namespace commtopics
