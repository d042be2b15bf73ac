#include "commtopics/detect.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "commtopics/error.hpp"
#include "commtopics/random.hpp"

namespace commtopics {

namespace {

constexpr const char* kStage = "detect";
constexpr double kGainEpsilon = 1e-12;

std::vector<double> weighted_degrees(const Adjacency& adjacency) {
  std::vector<double> degrees(static_cast<std::size_t>(adjacency.rows()), 0.0);
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) degrees[static_cast<std::size_t>(i)] += it.value();
  }
  return degrees;
}

std::vector<Index> random_order(Index n, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<Index>(order));
  return order;
}

// One level of Louvain: greedy moves until no node improves the objective.
// Returns contiguous labels (canonical order).
std::vector<Index> local_moving(const Adjacency& adjacency, double resolution, Rng& rng) {
  const Index n = adjacency.rows();
  const auto degrees = weighted_degrees(adjacency);
  const double two_m = std::accumulate(degrees.begin(), degrees.end(), 0.0);

  std::vector<Index> community(static_cast<std::size_t>(n));
  std::iota(community.begin(), community.end(), 0);
  if (two_m <= 0.0) return community;

  std::vector<double> totals = degrees;
  std::vector<double> link_weight(static_cast<std::size_t>(n), 0.0);
  std::vector<char> touched_flag(static_cast<std::size_t>(n), 0);
  std::vector<Index> touched;
  const auto order = random_order(n, rng);

  for (int pass = 0; pass < 1000; ++pass) {
    bool moved = false;
    for (Index node : order) {
      const auto u = static_cast<std::size_t>(node);
      const Index current = community[u];
      for (Adjacency::InnerIterator it(adjacency, node); it; ++it) {
        if (it.col() == node) continue;
        const auto c = static_cast<std::size_t>(community[static_cast<std::size_t>(it.col())]);
        if (!touched_flag[c]) {
          touched_flag[c] = 1;
          touched.push_back(static_cast<Index>(c));
        }
        link_weight[c] += it.value();
      }
      const double k = degrees[u];
      totals[static_cast<std::size_t>(current)] -= k;

      Index best = current;
      double best_gain = link_weight[static_cast<std::size_t>(current)] -
                         resolution * totals[static_cast<std::size_t>(current)] * k / two_m;
      for (Index c : touched) {
        const auto cu = static_cast<std::size_t>(c);
        const double gain = link_weight[cu] - resolution * totals[cu] * k / two_m;
        if (gain > best_gain + kGainEpsilon) {
          best_gain = gain;
          best = c;
        }
      }
      totals[static_cast<std::size_t>(best)] += k;
      if (best != current) {
        community[u] = best;
        moved = true;
      }
      for (Index c : touched) {
        link_weight[static_cast<std::size_t>(c)] = 0.0;
        touched_flag[static_cast<std::size_t>(c)] = 0;
      }
      touched.clear();
    }
    if (!moved) break;
  }
  return canonical_labels(community);
}

Adjacency aggregate(const Adjacency& adjacency, const std::vector<Index>& labels, Index groups) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(adjacency.nonZeros()));
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    const Index a = labels[static_cast<std::size_t>(i)];
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) {
      triplets.emplace_back(a, labels[static_cast<std::size_t>(it.col())], it.value());
    }
  }
  Adjacency reduced(groups, groups);
  reduced.setFromTriplets(triplets.begin(), triplets.end());
  return reduced;
}

void require_input(const Adjacency& adjacency, double resolution) {
  if (adjacency.rows() == 0) throw ArgumentError(kStage, "graph has no nodes");
  if (!(resolution > 0.0)) throw ArgumentError(kStage, "resolution must be positive");
}

Index group_count(const std::vector<Index>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<Index> isolated_nodes(const Adjacency& adjacency) {
  std::vector<Index> isolated;
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    bool has_neighbour = false;
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) {
      if (it.col() != i && it.value() > 0.0) {
        has_neighbour = true;
        break;
      }
    }
    if (!has_neighbour) isolated.push_back(i);
  }
  return isolated;
}

// Most frequent grouping in an ensemble; earliest run wins ties.
const Partition& modal_partition(const std::vector<Partition>& partitions) {
  std::map<std::vector<Index>, std::pair<int, std::size_t>> tally;
  for (std::size_t r = 0; r < partitions.size(); ++r) {
    auto [it, inserted] = tally.try_emplace(partitions[r].assignment, 0, r);
    ++it->second.first;
  }
  std::size_t best_run = 0;
  int best_count = 0;
  for (const auto& [assignment, entry] : tally) {
    if (entry.first > best_count || (entry.first == best_count && entry.second < best_run)) {
      best_count = entry.first;
      best_run = entry.second;
    }
  }
  return partitions[best_run];
}

}  // namespace

std::string_view to_string(DetectionMethod method) {
  return method == DetectionMethod::louvain ? "louvain" : "label_propagation";
}

DetectionMethod parse_detection_method(std::string_view text) {
  if (text == "louvain") return DetectionMethod::louvain;
  if (text == "label_propagation" || text == "lpa") return DetectionMethod::label_propagation;
  throw ArgumentError(kStage, "unknown detection method '" + std::string(text) + "'");
}

Index Partition::community_count() const { return group_count(assignment); }

std::vector<std::vector<Index>> Partition::communities() const {
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(community_count()));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    groups[static_cast<std::size_t>(assignment[i])].push_back(static_cast<Index>(i));
  }
  return groups;
}

std::vector<Index> canonical_labels(std::span<const Index> labels) {
  std::unordered_map<Index, Index> relabel;
  std::vector<Index> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = relabel.emplace(labels[i], static_cast<Index>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

double modularity(const Adjacency& adjacency, std::span<const Index> assignment, double resolution) {
  const auto degrees = weighted_degrees(adjacency);
  const double two_m = std::accumulate(degrees.begin(), degrees.end(), 0.0);
  if (two_m <= 0.0) return 0.0;
  std::unordered_map<Index, double> internal, totals;
  for (Index i = 0; i < adjacency.outerSize(); ++i) {
    const Index c = assignment[static_cast<std::size_t>(i)];
    totals[c] += degrees[static_cast<std::size_t>(i)];
    for (Adjacency::InnerIterator it(adjacency, i); it; ++it) {
      if (assignment[static_cast<std::size_t>(it.col())] == c) internal[c] += it.value();
    }
  }
  double q = 0.0;
  for (const auto& [c, total] : totals) {
    q += internal[c] / two_m - resolution * (total / two_m) * (total / two_m);
  }
  return q;
}

Partition louvain(const Adjacency& adjacency, double resolution, std::uint64_t seed) {
  require_input(adjacency, resolution);
  Rng rng(seed);
  std::vector<Index> membership(static_cast<std::size_t>(adjacency.rows()));
  std::iota(membership.begin(), membership.end(), 0);

  Adjacency level = adjacency;
  while (true) {
    const auto labels = local_moving(level, resolution, rng);
    const Index groups = group_count(labels);
    if (groups == level.rows()) break;
    for (Index& m : membership) m = labels[static_cast<std::size_t>(m)];
    level = aggregate(level, labels, groups);
  }
  return {canonical_labels(membership), resolution, seed};
}

Partition label_propagation(const Adjacency& adjacency, std::uint64_t seed, int max_sweeps) {
  if (adjacency.rows() == 0) throw ArgumentError(kStage, "graph has no nodes");
  const Index n = adjacency.rows();
  Rng rng(seed);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 0);

  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> seen;
  std::vector<Index> candidates;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const auto order = random_order(n, rng);
    bool changed = false;
    for (Index node : order) {
      for (Adjacency::InnerIterator it(adjacency, node); it; ++it) {
        if (it.col() == node) continue;
        const auto label = static_cast<std::size_t>(labels[static_cast<std::size_t>(it.col())]);
        if (weight[label] == 0.0) seen.push_back(static_cast<Index>(label));
        weight[label] += it.value();
      }
      if (seen.empty()) continue;
      double best = 0.0;
      for (Index label : seen) best = std::max(best, weight[static_cast<std::size_t>(label)]);
      for (Index label : seen) {
        if (weight[static_cast<std::size_t>(label)] >= best - kGainEpsilon) candidates.push_back(label);
      }
      const Index current = labels[static_cast<std::size_t>(node)];
      if (std::find(candidates.begin(), candidates.end(), current) == candidates.end()) {
        std::sort(candidates.begin(), candidates.end());
        labels[static_cast<std::size_t>(node)] = candidates[rng.below(candidates.size())];
        changed = true;
      }
      for (Index label : seen) weight[static_cast<std::size_t>(label)] = 0.0;
      seen.clear();
      candidates.clear();
    }
    if (!changed) break;
  }
  return {canonical_labels(labels), 1.0, seed};
}

Partition detect_once(const Adjacency& adjacency, double resolution, std::uint64_t seed,
                      DetectionMethod method) {
  require_input(adjacency, resolution);
  if (method == DetectionMethod::louvain) return louvain(adjacency, resolution, seed);
  Partition partition = label_propagation(adjacency, seed);
  partition.resolution = resolution;
  return partition;
}

Partition detect_once(const InteractionGraph& graph, double resolution, std::uint64_t seed,
                      DetectionMethod method) {
  return detect_once(graph.adjacency(), resolution, seed, method);
}

ConsensusMatrix::ConsensusMatrix(Index node_count, int run_count, CountMatrix counts)
    : node_count_(node_count), run_count_(run_count), counts_(std::move(counts)) {
  if (run_count_ < 1) throw ArgumentError(kStage, "consensus matrix needs at least one run");
  if (counts_.rows() != node_count_ || counts_.cols() != node_count_) {
    throw ArgumentError(kStage, "consensus count matrix has the wrong shape");
  }
  counts_.makeCompressed();
}

ConsensusMatrix ConsensusMatrix::from_partitions(Index node_count, std::span<const Partition> partitions) {
  if (partitions.empty()) throw ArgumentError(kStage, "consensus matrix needs at least one run");
  std::unordered_map<std::uint64_t, std::int32_t> tally;
  const auto n = static_cast<std::uint64_t>(node_count);
  for (const Partition& partition : partitions) {
    if (static_cast<Index>(partition.assignment.size()) != node_count) {
      throw ArgumentError(kStage, "partition does not cover the node set");
    }
    for (const auto& group : partition.communities()) {
      for (std::size_t a = 0; a < group.size(); ++a) {
        for (std::size_t b = a + 1; b < group.size(); ++b) {
          ++tally[static_cast<std::uint64_t>(group[a]) * n + static_cast<std::uint64_t>(group[b])];
        }
      }
    }
  }
  std::vector<Eigen::Triplet<std::int32_t>> triplets;
  triplets.reserve(tally.size() * 2);
  for (const auto& [key, count] : tally) {
    const auto x = static_cast<Index>(key / n);
    const auto y = static_cast<Index>(key % n);
    triplets.emplace_back(x, y, count);
    triplets.emplace_back(y, x, count);
  }
  CountMatrix counts(node_count, node_count);
  counts.setFromTriplets(triplets.begin(), triplets.end());
  return ConsensusMatrix(node_count, static_cast<int>(partitions.size()), std::move(counts));
}

std::int32_t ConsensusMatrix::count(Index x, Index y) const {
  if (x == y) return run_count_;
  return counts_.coeff(x, y);
}

double ConsensusMatrix::operator()(Index x, Index y) const {
  return static_cast<double>(count(x, y)) / static_cast<double>(run_count_);
}

std::vector<std::pair<Index, Index>> ConsensusMatrix::retained_pairs(double tau) const {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index col = 0; col < counts_.outerSize(); ++col) {
    for (CountMatrix::InnerIterator it(counts_, col); it; ++it) {
      if (it.row() < col && static_cast<double>(it.value()) / run_count_ >= tau) {
        pairs.emplace_back(it.row(), col);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Adjacency ConsensusMatrix::thresholded(double tau) const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index col = 0; col < counts_.outerSize(); ++col) {
    for (CountMatrix::InnerIterator it(counts_, col); it; ++it) {
      const double value = static_cast<double>(it.value()) / run_count_;
      if (value >= tau) triplets.emplace_back(it.row(), col, value);
    }
  }
  Adjacency graph(node_count_, node_count_);
  graph.setFromTriplets(triplets.begin(), triplets.end());
  return graph;
}

Index ConsensusResult::assigned_count() const {
  Index total = 0;
  for (const auto& c : communities) total += static_cast<Index>(c.size());
  return total;
}

Partition ConsensusResult::as_partition(Index node_count) const {
  std::vector<Index> labels(static_cast<std::size_t>(node_count), -1);
  Index next = 0;
  for (const auto& community : communities) {
    for (Index node : community) labels[static_cast<std::size_t>(node)] = next;
    ++next;
  }
  for (Index& label : labels) {
    if (label < 0) label = next++;
  }
  return {canonical_labels(labels), resolution, 0};
}

std::vector<Partition> detector_ensemble(const Adjacency& adjacency, double resolution,
                                         std::uint64_t seed, int runs, DetectionMethod method,
                                         int threads) {
  std::vector<Partition> partitions(static_cast<std::size_t>(runs));
  auto work = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      partitions[static_cast<std::size_t>(r)] =
          detect_once(adjacency, resolution, seed + static_cast<std::uint64_t>(r), method);
    }
  };
  const int workers = std::clamp(threads, 1, std::max(runs, 1));
  if (workers == 1) {
    work(0, runs);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (runs + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(runs, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return partitions;
}

ConsensusResult consensus(const Adjacency& adjacency, const ConsensusOptions& options) {
  require_input(adjacency, options.resolution);
  if (options.runs < 2) throw ArgumentError(kStage, "consensus needs at least two runs");
  if (!(options.tau > 0.0 && options.tau < 1.0)) throw ArgumentError(kStage, "tau must lie in (0, 1)");
  if (options.max_iterations < 1) throw ArgumentError(kStage, "max_iterations must be positive");

  ConsensusResult result;
  result.tau = options.tau;
  result.resolution = options.resolution;
  result.runs = options.runs;

  const Index n = adjacency.rows();
  Adjacency current = adjacency;
  std::vector<Partition> ensemble;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    result.iterations = iteration;
    ensemble = detector_ensemble(current, options.resolution, options.seed, options.runs,
                                 options.method, options.threads);
    auto matrix = ConsensusMatrix::from_partitions(n, ensemble);
    const bool unanimous = std::all_of(ensemble.begin(), ensemble.end(), [&](const Partition& p) {
      return p.same_grouping(ensemble.front());
    });
    if (iteration == 1) result.matrix = matrix;
    if (unanimous) {
      result.converged = true;
      break;
    }
    if (iteration == options.max_iterations) break;
    current = matrix.thresholded(options.tau);
  }

  const Partition& final_partition = result.converged ? ensemble.front() : modal_partition(ensemble);
  const auto isolated = isolated_nodes(current);
  std::vector<char> dropped(static_cast<std::size_t>(n), 0);
  for (Index node : isolated) dropped[static_cast<std::size_t>(node)] = 1;

  for (auto& group : final_partition.communities()) {
    std::erase_if(group, [&](Index node) { return dropped[static_cast<std::size_t>(node)] != 0; });
    if (!group.empty()) result.communities.push_back(std::move(group));
  }
  result.unassigned = isolated;
  std::stable_sort(result.communities.begin(), result.communities.end(),
                   [](const auto& a, const auto& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.front() < b.front();
                   });
  return result;
}

ConsensusResult consensus(const InteractionGraph& graph, const ConsensusOptions& options) {
  return consensus(graph.adjacency(), options);
}

}  // namespace commtopics
