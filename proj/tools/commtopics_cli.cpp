#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commtopics/bench.hpp"
#include "commtopics/error.hpp"
#include "commtopics/pipeline.hpp"

namespace {

using commtopics::PipelineConfig;

struct Flags {
  std::string network = "interaction";
  std::string method = "louvain";
  std::string topic_preset;
  double resolution = 0.0;
};

void add_pipeline_options(CLI::App& sub, PipelineConfig& config, Flags& flags) {
  sub.add_option("--corpus", config.corpus, "Tweet corpus (JSON Lines)");
  sub.add_option("--followers", config.followers, "Follower edges CSV (follower,followee)");
  sub.add_option("--out-dir", config.out_dir, "Artifact directory")->envname("COMMTOPICS_OUT_DIR");
  sub.add_option("--network", flags.network, "Network to analyse")
      ->check(CLI::IsMember({"interaction", "follower"}));
  sub.add_option("--min-component", config.min_component, "Smallest connected component kept")
      ->check(CLI::PositiveNumber);
  sub.add_option("--method", flags.method, "Base community detector")
      ->check(CLI::IsMember({"louvain", "label_propagation"}));
  sub.add_option("--resolutions", config.resolutions, "Resolution grid for the sweep")->delimiter(',');
  sub.add_option("--resolution", flags.resolution, "Fixed resolution (skips sweep-based selection)")
      ->check(CLI::PositiveNumber);
  sub.add_option("--runs", config.runs, "Detector runs per consensus iteration")->check(CLI::Range(2, 100000));
  sub.add_option("--tau", config.tau, "Consensus threshold")->check(CLI::Range(0.0, 1.0));
  sub.add_option("--min-members", config.min_members, "Minimum community size for reporting");
  sub.add_option("--mc-samples", config.mc_samples, "Monte Carlo draws for expected stability")
      ->check(CLI::PositiveNumber);
  sub.add_option("--min-df", config.min_df, "Minimum document frequency of a hashtag");
  sub.add_option("--min-doc-terms", config.min_doc_terms, "Minimum hashtags per profile document");
  sub.add_option("--topics", config.topics, "NMF topic count")->check(CLI::PositiveNumber);
  sub.add_option("--topic-preset", flags.topic_preset, "Topic count preset (english=15, german=10)")
      ->check(CLI::IsMember({"english", "german"}));
  sub.add_option("--nmf-max-iter", config.nmf_max_iterations, "NMF iteration cap");
  sub.add_option("--nmf-tol", config.nmf_tolerance, "NMF relative residual tolerance");
  sub.add_option("--threshold", config.map_threshold, "Cosine threshold for community-topic mapping");
  sub.add_option("--top-terms", config.top_terms, "Terms listed per description and topic");
  sub.add_option("--seed", config.seed, "Random seed");
  sub.add_option("--threads", config.threads, "Worker threads for detector runs")->check(CLI::PositiveNumber);
  sub.add_flag("--anonymize", config.anonymize, "Replace account ids with stable hashes");
  sub.add_flag_callback("--quiet", [&config] { config.log = nullptr; }, "Suppress progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus communities, hashtag profiles and NMF topics for interaction networks"};
  app.require_subcommand(1);

  PipelineConfig config;
  config.log = &std::clog;
  Flags flags;

  using Stage = void (*)(const PipelineConfig&);
  const std::map<std::string, std::pair<Stage, std::string>> stages{
      {"ingest", {commtopics::run_ingest, "Parse corpus and follower files"}},
      {"graph", {commtopics::run_graph, "Build reciprocal networks and export GEXF/CSV"}},
      {"sweep", {commtopics::run_sweep, "Score consensus communities over a resolution grid"}},
      {"detect", {commtopics::run_detect, "Consensus communities and stability reports"}},
      {"describe", {commtopics::run_describe, "Hashtag TF-IDF profiles and community descriptions"}},
      {"topics", {commtopics::run_topics, "NMF topic model with NNDSVD initialization"}},
      {"map", {commtopics::run_map, "Map communities to topics by cosine similarity"}},
      {"report", {commtopics::run_report, "Summary report"}},
      {"run", {commtopics::run_pipeline, "Full pipeline"}},
  };
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, stage] : stages) {
    auto* sub = app.add_subcommand(name, stage.second);
    add_pipeline_options(*sub, config, flags);
    commands[name] = sub;
  }

  commtopics::SyntheticCorpusSpec bench_spec;
  std::filesystem::path bench_dir = "commtopics-bench";
  auto* bench = app.add_subcommand("bench", "Write a synthetic planted-partition corpus");
  bench->add_option("--out-dir", bench_dir, "Where to write tweets.jsonl, followers.csv, ground_truth.csv");
  bench->add_option("--blocks", bench_spec.planted.blocks, "Block sizes")->delimiter(',');
  bench->add_option("--p-in", bench_spec.planted.p_in, "Within-block interaction probability");
  bench->add_option("--p-out", bench_spec.planted.p_out, "Across-block interaction probability");
  bench->add_option("--hashtags-per-block", bench_spec.hashtags_per_block);
  bench->add_option("--shared-hashtags", bench_spec.shared_hashtags);
  bench->add_option("--tweets-per-account", bench_spec.tweets_per_account);
  bench->add_option("--seed", bench_spec.planted.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(commtopics::ErrorKind::usage);
  }

  try {
    config.network = commtopics::parse_graph_kind(flags.network);
    config.method = commtopics::parse_detection_method(flags.method);
    if (flags.resolution > 0.0) config.resolution = flags.resolution;
    if (flags.topic_preset == "english") config.topics = commtopics::kEnglishTopics;
    if (flags.topic_preset == "german") config.topics = commtopics::kGermanTopics;

    if (bench->parsed()) {
      commtopics::write_corpus(bench_dir, commtopics::generate_corpus(bench_spec));
      std::clog << "bench: wrote synthetic corpus to " << bench_dir.string() << '\n';
      return 0;
    }
    for (const auto& [name, sub] : commands) {
      if (sub->parsed()) stages.at(name).first(config);
    }
  } catch (const commtopics::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(commtopics::ErrorKind::data);
  }
  return 0;
}
