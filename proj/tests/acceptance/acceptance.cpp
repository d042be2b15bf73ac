// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commtopics/bench.hpp"
#include "commtopics/io.hpp"
#include "commtopics/pipeline.hpp"
#include "commtopics/stability.hpp"
#include "commtopics/textvec.hpp"
#include "commtopics/topics.hpp"

namespace fs = std::filesystem;
using namespace commtopics;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int number, double time_limit, const std::function<void(Outcome&)>& body) {
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(outcome);
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail << " [exception: " << e.what() << "]";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit > 0 && seconds >= time_limit) {
    outcome.pass = false;
    outcome.detail << " [over time limit " << time_limit << " s]";
  }
  if (!outcome.pass) ++failures;
  std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << number << ":" << outcome.detail.str() << " ("
            << seconds << " s)" << std::endl;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("commtopics_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Unassigned nodes count as singleton communities.
double recovery_nmi(const ConsensusResult& result, const Partition& truth) {
  return nmi(result.as_partition(static_cast<Index>(truth.assignment.size())), truth);
}

double pair_mean(const std::vector<Index>& members, const ConsensusMatrix& m) {
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      sum += m(members[a], members[b]);
      ++pairs;
    }
  }
  return sum / pairs;
}

void eq1_exactness(Outcome& out) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = unit(gen);
    const double e = 0.999 * unit(gen);
    worst = std::max(worst, std::abs(corrected_stability(s, e) - (s - e) / (1.0 - e)));
  }
  out.detail << " max |err| " << worst;
  out.require(worst <= 1e-12, "random pairs within 1e-12");
  bool boundaries = true;
  for (double e : {0.0, 0.1, 0.37, 0.5, 0.9, 0.999}) {
    boundaries = boundaries && corrected_stability(1.0, e) == 1.0 && corrected_stability(e, e) == 0.0;
  }
  out.require(boundaries, "s=1 -> 1 and s=e -> 0 exactly");
}

void consensus_recovery(Outcome& out) {
  const auto planted = generate_graph({{25, 25, 25, 25}, 0.3, 0.01, 1});
  ConsensusOptions options;
  options.resolution = 1.0;
  options.runs = 100;
  options.tau = 0.5;
  const auto result = consensus(planted.graph, options);
  const double score = recovery_nmi(result, planted.ground_truth);
  StabilityScorer scorer(result.matrix, 10000, 7);
  double weakest = 1.0;
  for (const auto& report : scorer.score_all(result.communities)) weakest = std::min(weakest, report.corrected_stability);
  out.detail << " planted NMI " << score << ", min corrected stability " << weakest;
  out.require(score >= 0.95, "NMI >= 0.95");
  out.require(weakest >= 0.9, "every community corrected stability >= 0.9");

  const auto null_graph = generate_graph({{100}, 0.05, 0.0, 1});
  const auto null_result = consensus(null_graph.graph, options);
  StabilityScorer null_scorer(null_result.matrix, 10000, 7);
  const auto reports = null_scorer.score_all(null_result.communities);
  const double null_mean = mean_corrected_stability(reports, 10);
  Index large = 0;
  for (const auto& r : reports) large += r.size >= 10 ? 1 : 0;
  out.detail << "; null graph mean " << null_mean << " over " << large << " communities of size >= 10";
  out.require(!std::isnan(null_mean) && null_mean <= 0.3, "null mean corrected stability <= 0.3");
}

void expected_stability_oracle(Outcome& out) {
  const auto graph = generate_graph({{20}, 0.3, 0.0, 5});
  const auto runs = detector_ensemble(graph.graph.adjacency(), 1.0, 0, 100, DetectionMethod::louvain);
  const auto matrix = ConsensusMatrix::from_partitions(20, runs);
  double total = 0.0;
  int subsets = 0;
  for (Index a = 0; a < 20; ++a)
    for (Index b = a + 1; b < 20; ++b)
      for (Index c = b + 1; c < 20; ++c)
        for (Index d = c + 1; d < 20; ++d) {
          total += pair_mean({a, b, c, d}, matrix);
          ++subsets;
        }
  const double exact = total / subsets;
  const auto estimate = expected_stability(4, matrix, 100000, 11);
  const double z = std::abs(estimate.mean - exact) / estimate.standard_error;
  out.detail << " exhaustive " << exact << " over " << subsets << " subsets, estimate " << estimate.mean << " (SE "
             << estimate.standard_error << ", " << z << " SE away)";
  out.require(z <= 3.0, "within 3 standard errors");
}

void tau_monotonicity(Outcome& out) {
  const auto noisy = generate_graph({{25, 25, 25, 25}, 0.2, 0.05, 2});
  const auto runs = detector_ensemble(noisy.graph.adjacency(), 1.0, 0, 100, DetectionMethod::louvain);
  const auto matrix = ConsensusMatrix::from_partitions(100, runs);
  std::map<double, std::set<std::pair<Index, Index>>> retained;
  for (double tau : {0.3, 0.5, 0.7}) {
    const auto pairs = matrix.retained_pairs(tau);
    retained[tau] = {pairs.begin(), pairs.end()};
  }
  const auto subset = [](const auto& a, const auto& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); };
  out.detail << " retained pairs 0.7/0.5/0.3: " << retained[0.7].size() << "/" << retained[0.5].size() << "/"
             << retained[0.3].size();
  out.require(subset(retained[0.7], retained[0.5]), "0.7 within 0.5");
  out.require(subset(retained[0.5], retained[0.3]), "0.5 within 0.3");
  out.require(retained[0.7].size() < retained[0.3].size(), "noisy graph gives strictly sparser consensus at 0.7");
}

void tfidf_oracle(Outcome& out) {
  const std::vector<std::map<std::string, int>> counts{
      {{"a", 3}, {"b", 1}, {"c", 2}, {"u", 1}},
      {{"a", 1}, {"d", 4}, {"u", 2}},
      {{"b", 2}, {"c", 1}, {"u", 1}},
      {{"a", 1}, {"b", 1}, {"d", 1}, {"u", 5}},
  };
  std::vector<ProfileDocument> docs;
  for (std::size_t i = 0; i < counts.size(); ++i) docs.push_back({"doc" + std::to_string(i), counts[i]});
  Vocabulary vocabulary;
  vocabulary.terms = {"a", "b", "c", "d", "u"};
  vocabulary.document_frequency = {3, 3, 2, 2, 4};
  const auto profiles = tfidf(docs, vocabulary);
  const Eigen::MatrixXd dense = profiles.values;
  double worst = 0.0;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    Eigen::VectorXd column = Eigen::VectorXd::Zero(5);
    for (const auto& [term, tf] : counts[d]) {
      const Eigen::Index t = term == "u" ? 4 : term[0] - 'a';
      column[t] = (1.0 + std::log(double(tf))) * std::log(4.0 / vocabulary.document_frequency[std::size_t(t)]);
    }
    column /= column.norm();
    worst = std::max(worst, (dense.col(Eigen::Index(d)) - column).cwiseAbs().maxCoeff());
  }
  out.detail << " 5x4 max |err| " << worst;
  out.require(dense.rows() == 5 && dense.cols() == 4 && worst <= 1e-12, "matches closed form within 1e-12");
  out.require(dense.row(4).cwiseAbs().maxCoeff() == 0.0, "ubiquitous term weight 0");

  std::vector<ProfileDocument> boundary;
  for (int i = 0; i < 6; ++i) boundary.push_back({"p" + std::to_string(i), {{"pad", 10}}});
  for (int i = 0; i < 4; ++i) boundary[std::size_t(i)].term_counts["df4"] = 1;
  for (int i = 0; i < 3; ++i) boundary[std::size_t(i)].term_counts["df3"] = 1;
  boundary.push_back({"nine", {{"pad", 9}}});
  const auto result = build_vocabulary(boundary, 4, 10);
  bool nine_kept = false, ten_kept = false;
  for (const auto& d : result.documents) {
    nine_kept = nine_kept || d.account_id == "nine";
    ten_kept = ten_kept || d.account_id == "p5";
  }
  out.require(result.vocabulary.find("df4").has_value() && !result.vocabulary.find("df3").has_value(),
              "df 4 kept, df 3 dropped");
  out.require(ten_kept && !nine_kept, "10 terms kept, 9 dropped");
}

void nmf_checks(Outcome& out) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd v(40, 30);
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = unit(gen) < 0.3 ? unit(gen) : 0.0;
  NmfOptions options;
  options.tolerance = 0.0;
  const auto a = nmf(v, 6, options);
  const auto b = nmf(v, 6, options);
  out.require(a.W == b.W && a.H == b.H && a.objective_trace == b.objective_trace, "bit-identical reruns");
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < a.objective_trace.size(); ++i) {
    worst_rise = std::max(worst_rise, a.objective_trace[i] - a.objective_trace[i - 1]);
  }
  out.detail << " " << a.iterations << " iterations, max rise " << worst_rise;
  out.require(worst_rise <= 1e-9, "objective trace non-increasing within 1e-9");

  const int topics = 4;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5 * topics, topics), h = Eigen::MatrixXd::Zero(topics, 3 * topics);
  for (int t = 0; t < topics; ++t) {
    for (int i = 0; i < 5; ++i) w(5 * t + i, t) = 0.5 + unit(gen);
    for (int j = 0; j < 3; ++j) h(t, 3 * t + j) = 0.5 + unit(gen);
  }
  const Eigen::MatrixXd planted = w * h;
  const auto model = nmf(planted, topics);
  const double residual = (planted - model.W * model.H).norm();
  out.detail << ", planted residual " << residual;
  out.require(model.topics() == topics && residual < 1e-6, "planted factorization residual < 1e-6");
}

void mapping_semantics(Outcome& out) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd basis(6, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < 6; ++i) basis(i, j) = unit(gen);
  std::vector<CommunityDescription> descriptions(3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    descriptions[std::size_t(c)].community_id = c;
    descriptions[std::size_t(c)].centroid = Eigen::VectorXd(6);
    for (Eigen::Index i = 0; i < 6; ++i) descriptions[std::size_t(c)].centroid[i] = unit(gen);
  }
  bool oracle_match = true;
  bool inclusion = true;
  std::size_t total_entries = 0;
  std::vector<CommunityTopicMap> previous;
  for (double threshold : {0.0, 0.5, 0.7, 0.8, 0.9, 0.95, 1.0}) {
    const auto maps = map_communities(descriptions, basis, threshold);
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<std::pair<Eigen::Index, double>> oracle;
      const auto& d = descriptions[c].centroid;
      for (Eigen::Index t = 0; t < 4; ++t) {
        double dot = 0, nd = 0, nw = 0;
        for (Eigen::Index i = 0; i < 6; ++i) {
          dot += d[i] * basis(i, t);
          nd += d[i] * d[i];
          nw += basis(i, t) * basis(i, t);
        }
        const double cosine = dot / std::sqrt(nd * nw);
        if (cosine >= threshold) oracle.emplace_back(t, cosine);
      }
      std::stable_sort(oracle.begin(), oracle.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
      const auto& entries = maps[c].entries;
      if (entries.size() != oracle.size()) oracle_match = false;
      for (std::size_t k = 0; oracle_match && k < oracle.size(); ++k) {
        oracle_match = entries[k].first == oracle[k].first && std::abs(entries[k].second - oracle[k].second) <= 1e-12;
      }
      if (!previous.empty()) {
        for (const auto& entry : entries) {
          const auto& before = previous[c].entries;
          inclusion = inclusion && std::find(before.begin(), before.end(), entry) != before.end();
        }
      }
      total_entries += entries.size();
    }
    previous = maps;
  }
  out.detail << " " << total_entries << " mapped entries across 7 thresholds";
  out.require(oracle_match, "brute-force cosine oracle");
  out.require(inclusion, "threshold inclusion");

  bool scale_ok = true;
  for (double scale : {1e-3, 0.25, 1.0, 40.0}) {
    CommunityDescription d;
    d.centroid = scale * basis.col(2);
    const auto maps = map_communities({d}, basis, 0.1);
    scale_ok = scale_ok && !maps[0].entries.empty() && maps[0].entries[0].first == 2 &&
               std::abs(maps[0].entries[0].second - 1.0) <= 1e-12;
  }
  out.require(scale_ok, "scaled W column maps with similarity 1.0");
}

PipelineConfig bench_config(const fs::path& corpus, const fs::path& out) {
  PipelineConfig config;
  config.corpus = corpus / "tweets.jsonl";
  config.followers = corpus / "followers.csv";
  config.out_dir = out;
  config.topics = 4;
  return config;
}

std::string slurp(const fs::path& path) { return io::read_file(path, "acceptance"); }

void end_to_end(Outcome& out) {
  const auto corpus_dir = scratch("corpus");
  const auto corpus = generate_corpus({});
  write_corpus(corpus_dir, corpus);
  const auto first = scratch("run_a");
  const auto second = scratch("run_b");
  run_pipeline(bench_config(corpus_dir, first));
  run_pipeline(bench_config(corpus_dir, second));

  const std::vector<std::string> artifacts{
      "ingest_report.json", "interaction.gexf",   "interaction_edges.csv", "graph_report.json", "sweep.csv",
      "sweep.json",         "consensus.json",     "stability.json",        "descriptions.json", "topics.json",
      "topic_basis.mtx",    "mapping.csv",        "summary.json",          "summary.txt"};
  std::size_t identical = 0;
  for (const auto& name : artifacts) {
    if (!fs::exists(first / name)) {
      out.require(false, "artifact " + name + " present");
      continue;
    }
    identical += slurp(first / name) == slurp(second / name) ? 1 : 0;
  }
  std::size_t files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    ++files;
    const auto other = second / entry.path().filename();
    same += fs::exists(other) && slurp(entry.path()) == slurp(other) ? 1 : 0;
  }
  out.detail << " " << same << "/" << files << " output files byte-identical";
  out.require(same == files && identical == artifacts.size(), "reruns byte-identical");

  std::map<std::string, Index> truth(corpus.ground_truth.begin(), corpus.ground_truth.end());
  const auto descriptions = json::parse(slurp(first / "descriptions.json")).at("descriptions");
  const auto consensus_json = json::parse(slurp(first / "consensus.json"));
  std::size_t described = 0, complete = 0;
  for (const auto& description : descriptions) {
    const auto id = description.at("community_id").get<std::size_t>();
    std::map<Index, int> votes;
    for (const auto& member : consensus_json.at("communities").at(id)) ++votes[truth.at(member.get<std::string>())];
    const Index block = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                          return a.second < b.second;
                        })->first;
    std::set<std::string> top;
    for (const auto& term : description.at("top_terms")) top.insert(term.at("term").get<std::string>());
    bool all = top.size() <= 10;
    for (int k = 0; k < 8; ++k) all = all && top.count(block_hashtag(block, k));
    ++described;
    complete += all ? 1 : 0;
  }
  out.detail << ", " << complete << "/" << described << " communities list all planted block hashtags in top 10";
  out.require(described == consensus_json.at("communities").size() && described > 0, "every community described");
  out.require(complete == described, "planted hashtags in top 10");
}

void selection_and_coverage(Outcome& out) {
  const auto dir = fs::temp_directory_path() / "commtopics_acceptance_run_a";
  if (!fs::exists(dir / "sweep.csv")) throw std::runtime_error("criterion 8 output missing");
  std::istringstream rows(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(rows, line);
  double best_value = -std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(rows, line)) {
    std::istringstream fields(line);
    std::string resolution, value;
    std::getline(fields, resolution, ',');
    std::getline(fields, value, ',');
    if (value == "nan") continue;
    if (std::stod(value) > best_value) {
      best_value = std::stod(value);
      best = std::stod(resolution);
    }
  }
  const auto summary = json::parse(slurp(dir / "summary.json"));
  const double selected = json::parse(slurp(dir / "sweep.json")).at("best_resolution").get<double>();
  const double used = summary.at("resolution").get<double>();
  out.detail << " argmax resolution " << best << ", selected " << selected << ", used " << used;
  out.require(selected == best && used == best, "selected resolution is the argmax");

  const auto assigned = summary.at("assigned_nodes").get<long long>();
  const auto nodes = summary.at("nodes").get<long long>();
  const auto coverage = summary.at("coverage").get<std::string>();
  const long long expected = std::llround(100.0 * double(assigned) / double(nodes));
  out.detail << ", coverage " << coverage << " (" << assigned << "/" << nodes << ")";
  out.require(std::regex_match(coverage, std::regex("[0-9]+%")), "coverage formatted as N%");
  out.require(coverage == std::to_string(expected) + "%", "coverage equals assigned/total");
  out.require(slurp(dir / "summary.txt").find(coverage + " of total network account nodes") != std::string::npos,
              "coverage sentence in text summary");
}

}  // namespace

int main() {
  std::cout.precision(6);
  criterion(1, 1.0, eq1_exactness);
  criterion(2, 60.0, consensus_recovery);
  criterion(3, 30.0, expected_stability_oracle);
  criterion(4, 0.0, tau_monotonicity);
  criterion(5, 0.0, tfidf_oracle);
  criterion(6, 0.0, nmf_checks);
  criterion(7, 0.0, mapping_semantics);
  criterion(8, 0.0, end_to_end);
  criterion(9, 0.0, selection_and_coverage);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
