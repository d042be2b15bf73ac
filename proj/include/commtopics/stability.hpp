#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "commtopics/detect.hpp"

namespace commtopics {

// Mean of M(x,y) over the c(c-1)/2 unordered member pairs.
double community_stability(std::span<const Index> members, const ConsensusMatrix& matrix);

struct ExpectedStability {
  double mean = 0.0;
  double standard_error = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of the stability of `size` nodes drawn uniformly
// without replacement from [0, matrix.size()). Sample i uses a generator
// seeded from (seed, i), so the estimate does not depend on evaluation order.
ExpectedStability expected_stability(Index size, const ConsensusMatrix& matrix, std::int64_t samples,
                                      std::uint64_t seed);

constexpr double kDegenerateExpectation = 1e-9;

// (stability - expected) / (1 - expected); throws when expected >= 1 - 1e-9.
double corrected_stability(double stability, double expected);

struct StabilityReport {
  Index community_id = 0;
  Index size = 0;
  double stability = 0.0;
  double expected_stability = 0.0;
  double expected_standard_error = 0.0;
  double corrected_stability = 0.0;
  std::int64_t mc_samples = 0;

  bool negative() const { return corrected_stability < 0.0; }
};

// Scores communities against one consensus matrix, memoizing the expected
// stability per community size.
class StabilityScorer {
 public:
  StabilityScorer(const ConsensusMatrix& matrix, std::int64_t samples, std::uint64_t seed);

  const ExpectedStability& expected(Index size);
  StabilityReport score(Index community_id, std::span<const Index> members);

  // Reports for every community of size >= 2, in input order.
  std::vector<StabilityReport> score_all(const std::vector<std::vector<Index>>& communities);

 private:
  const ConsensusMatrix& matrix_;
  std::int64_t samples_;
  std::uint64_t seed_;
  std::map<Index, ExpectedStability> cache_;
};

struct SweepOptions {
  std::vector<double> resolutions{0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  int runs = 100;
  double tau = 0.5;
  Index min_members = 10;
  std::int64_t samples = 10000;
  std::uint64_t seed = 0;
  DetectionMethod method = DetectionMethod::louvain;
  int threads = 1;
};

struct SweepPoint {
  double resolution = 0.0;
  // NaN when no community reaches min_members.
  double mean_corrected_stability = 0.0;
  Index community_count = 0;
  Index total_communities = 0;
  Index assigned_nodes = 0;
  bool converged = false;
};

std::vector<SweepPoint> sweep(const Adjacency& adjacency, const SweepOptions& options);

// Index of the point with the highest mean corrected stability; the first
// such point wins ties. Points without qualifying communities are skipped.
std::optional<std::size_t> best_resolution(std::span<const SweepPoint> points);

// Mean corrected stability over reports with size >= min_members (NaN if none).
double mean_corrected_stability(std::span<const StabilityReport> reports, Index min_members);

}  // namespace commtopics
