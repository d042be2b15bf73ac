#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "commtopics/detect.hpp"
#include "commtopics/graph.hpp"

namespace commtopics {

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path followers;
  std::filesystem::path out_dir = "commtopics-out";

  GraphKind network = GraphKind::interaction;
  Index min_component = 5;
  DetectionMethod method = DetectionMethod::louvain;
  std::vector<double> resolutions{0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  std::optional<double> resolution;  // overrides the sweep's selection
  int runs = 100;
  double tau = 0.5;
  Index min_members = 10;
  std::int64_t mc_samples = 10000;
  int min_df = 4;
  int min_doc_terms = 10;
  Index topics = 15;
  int nmf_max_iterations = 400;
  double nmf_tolerance = 1e-5;
  double map_threshold = 0.1;
  std::size_t top_terms = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  bool anonymize = false;
  std::ostream* log = nullptr;
};

// Topic-count presets for English- and German-language corpora.
inline constexpr Index kEnglishTopics = 15;
inline constexpr Index kGermanTopics = 10;

void run_ingest(const PipelineConfig& config);
void run_graph(const PipelineConfig& config);
void run_sweep(const PipelineConfig& config);
void run_detect(const PipelineConfig& config);
void run_describe(const PipelineConfig& config);
void run_topics(const PipelineConfig& config);
void run_map(const PipelineConfig& config);
void run_report(const PipelineConfig& config);

// ingest, graph, sweep, detect, describe, topics, map, report.
void run_pipeline(const PipelineConfig& config);

// "86%"-style rounding of assigned / total.
std::string coverage_percent(Index assigned, Index total);

}  // namespace commtopics
