#include "commtopics/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commtopics/error.hpp"
#include "commtopics/ingest.hpp"
#include "commtopics/io.hpp"
#include "commtopics/stability.hpp"
#include "commtopics/textvec.hpp"
#include "commtopics/topics.hpp"

namespace commtopics {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::size_t kMaxReportedErrors = 100;

void log_line(const PipelineConfig& config, const std::string& message) {
  if (config.log) *config.log << message << '\n';
}

void write_json(const fs::path& path, const json& value, const std::string& stage) {
  auto out = io::open_output(path, stage);
  out << value.dump(2) << '\n';
}

json read_json(const fs::path& path, const std::string& stage) {
  const std::string text = io::read_file(path, stage);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(stage, "cannot parse " + path.string() + ": " + e.what());
  }
}

// Missing upstream artifacts are dependency errors that name the producer.
fs::path require(const PipelineConfig& config, const std::string& name, const std::string& stage,
                 const std::string& producer) {
  fs::path path = config.out_dir / name;
  if (!fs::exists(path)) {
    throw DataError(stage, "missing upstream artifact " + path.string() + " (run `" + producer + "` first)");
  }
  return path;
}

std::string network_file(const PipelineConfig& config, const char* suffix) {
  return std::string(to_string(config.network)) + suffix;
}

json errors_json(const std::vector<RecordError>& errors) {
  json list = json::array();
  for (std::size_t i = 0; i < errors.size() && i < kMaxReportedErrors; ++i) {
    list.push_back({{"line", errors[i].line}, {"message", errors[i].message}});
  }
  return list;
}

InteractionGraph load_network(const PipelineConfig& config, const std::string& stage) {
  return read_edge_csv(require(config, network_file(config, "_edges.csv"), stage, "graph"), config.network);
}

std::vector<std::vector<AccountId>> load_communities(const json& consensus_json) {
  std::vector<std::vector<AccountId>> communities;
  for (const auto& community : consensus_json.at("communities")) {
    communities.push_back(community.get<std::vector<AccountId>>());
  }
  return communities;
}

json stability_json(const StabilityReport& report) {
  return {{"community_id", report.community_id},
          {"size", report.size},
          {"stability", report.stability},
          {"expected_stability", report.expected_stability},
          {"expected_standard_error", report.expected_standard_error},
          {"corrected_stability", report.corrected_stability},
          {"mc_samples", report.mc_samples},
          {"negative", report.negative()}};
}

void write_dense_market(const fs::path& path, const Eigen::MatrixXd& matrix, const std::string& stage) {
  {
    auto file = io::open_output(path, stage);
    write_matrix_market(file, matrix.sparseView(0.0, 0.0));
  }
}

}  // namespace

std::string coverage_percent(Index assigned, Index total) {
  if (total <= 0) return "0%";
  const double percent = 100.0 * static_cast<double>(assigned) / static_cast<double>(total);
  return std::to_string(static_cast<long long>(std::llround(percent))) + "%";
}

void run_ingest(const PipelineConfig& config) {
  const std::string stage = "ingest";
  if (config.corpus.empty()) throw ArgumentError(stage, "no corpus path given");
  Corpus corpus = parse_corpus(config.corpus);
  std::optional<FollowerData> followers;
  if (!config.followers.empty()) followers = parse_followers(config.followers);
  if (config.anonymize) {
    anonymize(corpus);
    if (followers) anonymize(*followers);
  }

  {
    auto file = io::open_output(config.out_dir / "accounts.csv", stage);
    write_accounts_csv(file, corpus.accounts);
  }
  {
    auto file = io::open_output(config.out_dir / "events.csv", stage);
    write_events_csv(file, corpus.events);
  }
  {
    auto file = io::open_output(config.out_dir / "profiles.jsonl", stage);
    write_profiles_jsonl(file, corpus.documents);
  }
  if (followers) {
    {
    auto file = io::open_output(config.out_dir / "followers.csv", stage);
    write_followers_csv(file, followers->edges);
  }
  }

  json report;
  report["valid_records"] = corpus.valid_records;
  report["malformed_records"] = corpus.errors.size();
  report["errors"] = errors_json(corpus.errors);
  report["accounts"] = corpus.accounts.size();
  report["events"] = corpus.events.size();
  report["documents"] = corpus.documents.size();
  report["anonymized"] = config.anonymize;
  if (followers) {
    report["follower_edges"] = followers->edges.size();
    report["follower_errors"] = errors_json(followers->errors);
  }
  write_json(config.out_dir / "ingest_report.json", report, stage);
  log_line(config, "ingest: " + std::to_string(corpus.valid_records) + " records, " +
                       std::to_string(corpus.errors.size()) + " malformed, " +
                       std::to_string(corpus.events.size()) + " interaction events");
}

void run_graph(const PipelineConfig& config) {
  const std::string stage = "graph";
  json report;
  auto emit = [&](const InteractionGraph& raw) {
    const InteractionGraph graph = filter_components(raw, config.min_component);
    const std::string kind(to_string(graph.kind()));
    {
    auto file = io::open_output(config.out_dir / (kind + ".gexf"), stage);
    write_gexf(file, graph);
  }
    {
    auto file = io::open_output(config.out_dir / (kind + "_edges.csv"), stage);
    write_edge_csv(file, graph);
  }
    report[kind] = {{"nodes", graph.node_count()},
                    {"edges", graph.edge_count()},
                    {"unfiltered_nodes", raw.node_count()},
                    {"unfiltered_edges", raw.edge_count()},
                    {"min_component", config.min_component}};
    log_line(config, "graph: " + kind + " network with " + std::to_string(graph.node_count()) + " nodes and " +
                         std::to_string(graph.edge_count()) + " edges");
  };
  emit(build_interaction_graph(read_events_csv(require(config, "events.csv", stage, "ingest"))));

  const fs::path followers_path = config.out_dir / "followers.csv";
  if (fs::exists(followers_path)) {
    auto in = io::open_input(followers_path, stage);
    emit(build_follower_graph(parse_followers(in).edges));
  } else if (config.network == GraphKind::follower) {
    throw DataError(stage, "follower network requested but followers.csv is missing (run `ingest --followers`)");
  }
  write_json(config.out_dir / "graph_report.json", report, stage);
}

void run_sweep(const PipelineConfig& config) {
  const std::string stage = "sweep";
  const InteractionGraph graph = load_network(config, stage);
  if (graph.empty()) throw DataError(stage, "network is empty after component filtering");

  SweepOptions options;
  options.resolutions = config.resolutions;
  options.runs = config.runs;
  options.tau = config.tau;
  options.min_members = config.min_members;
  options.samples = config.mc_samples;
  options.seed = config.seed;
  options.method = config.method;
  options.threads = config.threads;
  const auto points = sweep(graph.adjacency(), options);

  auto csv = io::open_output(config.out_dir / "sweep.csv", stage);
  csv << "resolution,mean_corrected_stability,community_count\n";
  json list = json::array();
  for (const auto& point : points) {
    csv << io::format_double(point.resolution) << ',' << io::format_double(point.mean_corrected_stability) << ','
        << point.community_count << '\n';
    json entry = {{"resolution", point.resolution},
                  {"community_count", point.community_count},
                  {"total_communities", point.total_communities},
                  {"assigned_nodes", point.assigned_nodes},
                  {"converged", point.converged}};
    entry["mean_corrected_stability"] =
        std::isnan(point.mean_corrected_stability) ? json(nullptr) : json(point.mean_corrected_stability);
    list.push_back(entry);
  }
  json summary = {{"points", list}, {"min_members", config.min_members}, {"tau", config.tau}, {"runs", config.runs}};
  const auto best = best_resolution(points);
  summary["best_resolution"] = best ? json(points[*best].resolution) : json(nullptr);
  write_json(config.out_dir / "sweep.json", summary, stage);
  log_line(config, "sweep: " + std::to_string(points.size()) + " resolutions" +
                       (best ? ", best " + io::format_double(points[*best].resolution) : ", no qualifying communities"));
}

void run_detect(const PipelineConfig& config) {
  const std::string stage = "detect";
  const InteractionGraph graph = load_network(config, stage);
  if (graph.empty()) throw DataError(stage, "network is empty after component filtering");

  double resolution = 1.0;
  if (config.resolution) {
    resolution = *config.resolution;
  } else if (fs::exists(config.out_dir / "sweep.json")) {
    const json sweep_json = read_json(config.out_dir / "sweep.json", stage);
    if (!sweep_json.at("best_resolution").is_null()) resolution = sweep_json.at("best_resolution").get<double>();
  }

  ConsensusOptions options;
  options.resolution = resolution;
  options.runs = config.runs;
  options.tau = config.tau;
  options.seed = config.seed;
  options.method = config.method;
  options.threads = config.threads;
  const ConsensusResult result = consensus(graph, options);

  json communities = json::array();
  for (const auto& community : result.communities) {
    std::vector<AccountId> ids;
    for (Index node : community) ids.push_back(graph.node(node));
    std::sort(ids.begin(), ids.end());
    communities.push_back(ids);
  }
  std::vector<AccountId> unassigned;
  for (Index node : result.unassigned) unassigned.push_back(graph.node(node));
  std::sort(unassigned.begin(), unassigned.end());

  json out = {{"tau", result.tau},
              {"resolution", result.resolution},
              {"runs", result.runs},
              {"converged", result.converged},
              {"iterations", result.iterations},
              {"method", std::string(to_string(config.method))},
              {"node_count", graph.node_count()},
              {"assigned_nodes", result.assigned_count()},
              {"coverage", coverage_percent(result.assigned_count(), graph.node_count())},
              {"communities", communities},
              {"unassigned", unassigned}};
  write_json(config.out_dir / "consensus.json", out, stage);

  {
    auto csv = io::open_output(config.out_dir / "consensus_matrix.csv", stage);
    csv << "source,target,count\n";
    std::vector<std::tuple<std::string_view, std::string_view, std::int32_t>> rows;
    const auto& counts = result.matrix.counts();
    for (Index col = 0; col < counts.outerSize(); ++col) {
      for (ConsensusMatrix::CountMatrix::InnerIterator it(counts, col); it; ++it) {
        if (it.row() >= col) continue;
        std::string_view a = graph.node(it.row());
        std::string_view b = graph.node(col);
        if (b < a) std::swap(a, b);
        rows.emplace_back(a, b, it.value());
      }
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [a, b, c] : rows) csv << io::csv_field(a) << ',' << io::csv_field(b) << ',' << c << '\n';
  }

  StabilityScorer scorer(result.matrix, config.mc_samples, config.seed);
  json reports = json::array();
  for (const auto& report : scorer.score_all(result.communities)) reports.push_back(stability_json(report));
  write_json(config.out_dir / "stability.json",
             {{"run_count", result.matrix.run_count()}, {"min_members", config.min_members}, {"communities", reports}},
             stage);
  if (!result.converged) log_line(config, "detect: warning: consensus did not converge; using the modal partition");
  log_line(config, "detect: " + std::to_string(result.communities.size()) + " consensus communities at resolution " +
                       io::format_double(resolution));
}

void run_describe(const PipelineConfig& config) {
  const std::string stage = "describe";
  const auto documents = read_profiles_jsonl(require(config, "profiles.jsonl", stage, "ingest"));
  const json consensus_json = read_json(require(config, "consensus.json", stage, "detect"), stage);

  // Profiles of accounts in the analysed network only.
  std::set<AccountId> network_nodes;
  {
    const InteractionGraph graph = load_network(config, stage);
    network_nodes.insert(graph.nodes().begin(), graph.nodes().end());
  }
  std::vector<ProfileDocument> in_network;
  for (const auto& doc : documents) {
    if (network_nodes.count(doc.account_id)) in_network.push_back(doc);
  }
  if (in_network.empty()) throw DataError(stage, "no network account has a profile document");

  const VocabularyResult vocabulary = build_vocabulary(in_network, config.min_df, config.min_doc_terms);
  const ProfileMatrix profiles = tfidf(vocabulary.documents, vocabulary.vocabulary);
  write_profile_matrix(config.out_dir, profiles);

  json descriptions = json::array();
  json skipped = json::array();
  const auto communities = load_communities(consensus_json);
  for (std::size_t id = 0; id < communities.size(); ++id) {
    if (static_cast<Index>(communities[id].size()) < config.min_members) continue;
    try {
      const auto description = describe_community(static_cast<Index>(id), communities[id], profiles, config.top_terms);
      json centroid = json::object();
      for (Index t = 0; t < description.centroid.size(); ++t) {
        if (description.centroid[t] != 0.0) centroid[profiles.terms[static_cast<std::size_t>(t)]] = description.centroid[t];
      }
      json top = json::array();
      for (const auto& [term, weight] : description.top_terms) top.push_back({{"term", term}, {"weight", weight}});
      descriptions.push_back({{"community_id", description.community_id},
                              {"size", communities[id].size()},
                              {"profiled_members", description.profiled_members},
                              {"unprofiled_members", description.unprofiled_members},
                              {"top_terms", top},
                              {"centroid", centroid}});
    } catch (const DataError& e) {
      skipped.push_back({{"community_id", id}, {"reason", e.what()}});
    }
  }
  json out = {{"vocabulary_size", profiles.terms.size()},
              {"documents", profiles.doc_ids.size()},
              {"network_accounts", network_nodes.size()},
              {"profile_coverage", coverage_percent(static_cast<Index>(profiles.doc_ids.size()),
                                                    static_cast<Index>(network_nodes.size()))},
              {"descriptions", descriptions},
              {"skipped", skipped}};
  write_json(config.out_dir / "descriptions.json", out, stage);
  log_line(config, "describe: vocabulary of " + std::to_string(profiles.terms.size()) + " hashtags over " +
                       std::to_string(profiles.doc_ids.size()) + " documents");
}

void run_topics(const PipelineConfig& config) {
  const std::string stage = "topics";
  require(config, "profiles.mtx", stage, "describe");
  const ProfileMatrix profiles = read_profile_matrix(config.out_dir);
  const Index limit = std::min(profiles.values.rows(), profiles.values.cols());
  const Index topics = std::min(config.topics, limit);
  if (topics < config.topics) {
    log_line(config, "topics: warning: topic count reduced to " + std::to_string(topics) + " (matrix is " +
                         std::to_string(profiles.values.rows()) + "x" + std::to_string(profiles.values.cols()) + ")");
  }

  NmfOptions options;
  options.max_iterations = config.nmf_max_iterations;
  options.tolerance = config.nmf_tolerance;
  const auto model = nmf(profiles.values, topics, options);
  if (model.rank_reduced()) {
    log_line(config, "topics: warning: matrix rank limits the model to " + std::to_string(model.topics()) + " topics");
  }

  json topic_list = json::array();
  const auto terms = top_topic_terms(model.W, profiles.terms, config.top_terms);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    json entries = json::array();
    for (const auto& [term, weight] : terms[t]) entries.push_back({{"term", term}, {"weight", weight}});
    topic_list.push_back({{"topic", t}, {"terms", entries}});
  }
  json out = {{"requested_topics", config.topics},
              {"topics", model.topics()},
              {"iterations", model.iterations},
              {"converged", model.converged},
              {"initial_residual", model.objective_trace.front()},
              {"final_residual", model.objective_trace.back()},
              {"objective_trace", model.objective_trace},
              {"topic_terms", topic_list}};
  write_json(config.out_dir / "topics.json", out, stage);
  write_dense_market(config.out_dir / "topic_basis.mtx", model.W, stage);
  write_dense_market(config.out_dir / "topic_assignments.mtx", model.H, stage);
  log_line(config, "topics: " + std::to_string(model.topics()) + " topics after " + std::to_string(model.iterations) +
                       " iterations");
}

void run_map(const PipelineConfig& config) {
  const std::string stage = "map";
  const json descriptions_json = read_json(require(config, "descriptions.json", stage, "describe"), stage);
  auto basis_in = io::open_input(require(config, "topic_basis.mtx", stage, "topics"), stage);
  const Eigen::MatrixXd basis = Eigen::MatrixXd(read_matrix_market(basis_in));
  const ProfileMatrix profiles = read_profile_matrix(config.out_dir);
  if (basis.rows() != static_cast<Index>(profiles.terms.size())) {
    throw DataError(stage, "topic basis and vocabulary disagree; rerun `topics`");
  }
  std::map<std::string, Index> term_index;
  for (std::size_t i = 0; i < profiles.terms.size(); ++i) term_index.emplace(profiles.terms[i], static_cast<Index>(i));

  std::vector<CommunityDescription> descriptions;
  for (const auto& entry : descriptions_json.at("descriptions")) {
    CommunityDescription description;
    description.community_id = entry.at("community_id").get<Index>();
    description.centroid = Eigen::VectorXd::Zero(basis.rows());
    for (const auto& [term, weight] : entry.at("centroid").items()) {
      auto it = term_index.find(term);
      if (it == term_index.end()) throw DataError(stage, "description term '" + term + "' not in vocabulary");
      description.centroid[it->second] = weight.get<double>();
    }
    descriptions.push_back(std::move(description));
  }

  const auto maps = map_communities(descriptions, basis, config.map_threshold);
  auto csv = io::open_output(config.out_dir / "mapping.csv", stage);
  csv << "community_id,topic_index,similarity\n";
  for (const auto& map : maps) {
    if (map.error) {
      log_line(config, "map: community " + std::to_string(map.community_id) + ": " + *map.error);
      continue;
    }
    for (const auto& [topic, similarity] : map.entries) {
      csv << map.community_id << ',' << topic << ',' << io::format_double(similarity) << '\n';
    }
  }
}

void run_report(const PipelineConfig& config) {
  const std::string stage = "report";
  const json graph_report = read_json(require(config, "graph_report.json", stage, "graph"), stage);
  const json consensus_json = read_json(require(config, "consensus.json", stage, "detect"), stage);
  const json stability = read_json(require(config, "stability.json", stage, "detect"), stage);
  const InteractionGraph graph = load_network(config, stage);

  const std::string kind(to_string(config.network));
  const Index nodes = graph_report.at(kind).at("nodes").get<Index>();
  const Index edges = graph_report.at(kind).at("edges").get<Index>();
  const auto communities = load_communities(consensus_json);
  Index assigned = 0;
  Index large = 0;
  Index large_nodes = 0;
  for (const auto& community : communities) {
    assigned += static_cast<Index>(community.size());
    if (static_cast<Index>(community.size()) >= config.min_members) {
      ++large;
      large_nodes += static_cast<Index>(community.size());
    }
  }

  json summary;
  summary["network"] = kind;
  summary["nodes"] = nodes;
  summary["edges"] = edges;
  summary["resolution"] = consensus_json.at("resolution");
  summary["tau"] = consensus_json.at("tau");
  summary["converged"] = consensus_json.at("converged");
  summary["communities"] = communities.size();
  summary["large_communities"] = large;
  summary["min_members"] = config.min_members;
  summary["assigned_nodes"] = assigned;
  summary["coverage"] = coverage_percent(assigned, nodes);
  summary["coverage_fraction"] = nodes > 0 ? static_cast<double>(assigned) / static_cast<double>(nodes) : 0.0;
  summary["large_community_coverage"] = coverage_percent(large_nodes, nodes);
  if (fs::exists(config.out_dir / "sweep.json")) {
    summary["best_resolution"] = read_json(config.out_dir / "sweep.json", stage).at("best_resolution");
  }

  json ranked = json::array();
  for (const auto& report : stability.at("communities")) {
    if (report.at("size").get<Index>() >= config.min_members) ranked.push_back(report);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const json& a, const json& b) {
    return a.at("corrected_stability").get<double>() > b.at("corrected_stability").get<double>();
  });
  summary["ranked_communities"] = ranked;

  const auto centrality = betweenness_centrality(graph);
  std::vector<Index> order(centrality.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return centrality[static_cast<std::size_t>(a)] > centrality[static_cast<std::size_t>(b)];
  });
  json central = json::array();
  for (std::size_t i = 0; i < order.size() && i < 10; ++i) {
    central.push_back({{"account_id", graph.node(order[i])}, {"betweenness", centrality[static_cast<std::size_t>(order[i])]}});
  }
  summary["top_betweenness"] = central;
  write_json(config.out_dir / "summary.json", summary, stage);

  std::ostringstream text;
  text << "Reciprocal " << kind << " network with " << nodes << " nodes and " << edges << " edges.\n"
       << communities.size() << " consensus communities (tau=" << io::format_double(consensus_json.at("tau").get<double>())
       << ", resolution=" << io::format_double(consensus_json.at("resolution").get<double>()) << "); "
       << assigned << " assigned nodes (" << coverage_percent(assigned, nodes) << " of total network account nodes).\n"
       << large << " communities having at least " << config.min_members << " members ("
       << coverage_percent(large_nodes, nodes) << " of total network account nodes).\n";
  for (const auto& report : ranked) {
    text << "  community " << report.at("community_id").get<Index>() << ": size " << report.at("size").get<Index>()
         << ", corrected stability " << io::format_double(std::round(report.at("corrected_stability").get<double>() * 100.0) / 100.0)
         << '\n';
  }
  io::open_output(config.out_dir / "summary.txt", stage) << text.str();
  log_line(config, "report: " + coverage_percent(assigned, nodes) + " of network nodes assigned to communities");
}

void run_pipeline(const PipelineConfig& config) {
  run_ingest(config);
  run_graph(config);
  if (!config.resolution) run_sweep(config);
  run_detect(config);
  run_describe(config);
  run_topics(config);
  run_map(config);
  run_report(config);
}

}  // namespace commtopics
