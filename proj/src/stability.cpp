#include "commtopics/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "commtopics/error.hpp"
#include "commtopics/random.hpp"

namespace commtopics {

namespace {

constexpr const char* kStage = "stability";

// Exact integer pair total divided once, so constant matrices give exact means.
double pair_mean(std::span<const Index> members, const ConsensusMatrix& matrix) {
  std::int64_t total = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) total += matrix.count(members[a], members[b]);
  }
  const auto c = static_cast<std::int64_t>(members.size());
  const std::int64_t pairs = c * (c - 1) / 2;
  return static_cast<double>(total) / (static_cast<double>(pairs) * matrix.run_count());
}

// Floyd's sampling of `size` distinct values from [0, n), returned sorted.
std::vector<Index> sample_without_replacement(Index n, Index size, Rng& rng) {
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(size));
  for (Index j = n - size; j < n; ++j) {
    const auto t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

double community_stability(std::span<const Index> members, const ConsensusMatrix& matrix) {
  if (members.size() < 2) throw ArgumentError(kStage, "community stability needs at least two members");
  for (Index node : members) {
    if (node < 0 || node >= matrix.size()) throw ArgumentError(kStage, "member outside consensus matrix");
  }
  return pair_mean(members, matrix);
}

ExpectedStability expected_stability(Index size, const ConsensusMatrix& matrix, std::int64_t samples,
                                     std::uint64_t seed) {
  if (size < 2) throw ArgumentError(kStage, "expected stability needs a size of at least two");
  if (size > matrix.size()) throw ArgumentError(kStage, "community size exceeds node count");
  if (samples < 1) throw ArgumentError(kStage, "at least one Monte Carlo sample is required");

  // Welford accumulation: identical draws leave the mean exactly unchanged.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto drawn = sample_without_replacement(matrix.size(), size, rng);
    const double value = pair_mean(drawn, matrix);
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  ExpectedStability result;
  result.mean = mean;
  result.samples = samples;
  result.standard_error =
      samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
  return result;
}

double corrected_stability(double stability, double expected) {
  if (!(expected < 1.0 - kDegenerateExpectation)) {
    throw NumericalError(kStage, "expected stability too close to 1; corrected score undefined");
  }
  return (stability - expected) / (1.0 - expected);
}

StabilityScorer::StabilityScorer(const ConsensusMatrix& matrix, std::int64_t samples, std::uint64_t seed)
    : matrix_(matrix), samples_(samples), seed_(seed) {}

const ExpectedStability& StabilityScorer::expected(Index size) {
  auto it = cache_.find(size);
  if (it == cache_.end()) {
    it = cache_.emplace(size, expected_stability(size, matrix_, samples_,
                                                 derive_seed(seed_, static_cast<std::uint64_t>(size))))
             .first;
  }
  return it->second;
}

StabilityReport StabilityScorer::score(Index community_id, std::span<const Index> members) {
  StabilityReport report;
  report.community_id = community_id;
  report.size = static_cast<Index>(members.size());
  report.stability = community_stability(members, matrix_);
  const ExpectedStability& chance = expected(report.size);
  report.expected_stability = chance.mean;
  report.expected_standard_error = chance.standard_error;
  report.mc_samples = chance.samples;
  report.corrected_stability = corrected_stability(report.stability, chance.mean);
  return report;
}

std::vector<StabilityReport> StabilityScorer::score_all(const std::vector<std::vector<Index>>& communities) {
  std::vector<StabilityReport> reports;
  for (std::size_t id = 0; id < communities.size(); ++id) {
    if (communities[id].size() < 2) continue;
    reports.push_back(score(static_cast<Index>(id), communities[id]));
  }
  return reports;
}

double mean_corrected_stability(std::span<const StabilityReport> reports, Index min_members) {
  double sum = 0.0;
  Index count = 0;
  for (const auto& report : reports) {
    if (report.size < min_members) continue;
    sum += report.corrected_stability;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

std::vector<SweepPoint> sweep(const Adjacency& adjacency, const SweepOptions& options) {
  if (options.resolutions.empty()) throw ArgumentError(kStage, "sweep needs at least one resolution");
  std::vector<SweepPoint> points;
  for (double resolution : options.resolutions) {
    ConsensusOptions consensus_options;
    consensus_options.resolution = resolution;
    consensus_options.runs = options.runs;
    consensus_options.tau = options.tau;
    consensus_options.seed = options.seed;
    consensus_options.method = options.method;
    consensus_options.threads = options.threads;
    const ConsensusResult result = consensus(adjacency, consensus_options);

    StabilityScorer scorer(result.matrix, options.samples, options.seed);
    const auto reports = scorer.score_all(result.communities);

    SweepPoint point;
    point.resolution = resolution;
    point.mean_corrected_stability = mean_corrected_stability(reports, options.min_members);
    point.community_count = static_cast<Index>(std::count_if(
        result.communities.begin(), result.communities.end(),
        [&](const auto& c) { return static_cast<Index>(c.size()) >= options.min_members; }));
    point.total_communities = static_cast<Index>(result.communities.size());
    point.assigned_nodes = result.assigned_count();
    point.converged = result.converged;
    points.push_back(point);
  }
  return points;
}

std::optional<std::size_t> best_resolution(std::span<const SweepPoint> points) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double score = points[i].mean_corrected_stability;
    if (std::isnan(score)) continue;
    if (!best || score > points[*best].mean_corrected_stability) best = i;
  }
  return best;
}

}  // namespace commtopics
