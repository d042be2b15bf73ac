#include "commtopics/bench.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commtopics/error.hpp"
#include "commtopics/io.hpp"
#include "commtopics/random.hpp"

namespace commtopics {

namespace {

constexpr const char* kStage = "bench";

std::string padded(char prefix, Index value, Index total) {
  std::size_t width = 1;
  for (Index t = std::max<Index>(total - 1, 1); t >= 10; t /= 10) ++width;
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

void validate(const PlantedSpec& spec) {
  if (spec.blocks.empty()) throw ArgumentError(kStage, "at least one block is required");
  for (Index size : spec.blocks) {
    if (size < 1) throw ArgumentError(kStage, "block sizes must be positive");
  }
  if (!(spec.p_in > 0.0 && spec.p_in <= 1.0)) throw ArgumentError(kStage, "p_in must lie in (0, 1]");
  if (!(spec.p_out >= 0.0 && spec.p_out < 1.0)) throw ArgumentError(kStage, "p_out must lie in [0, 1)");
}

std::vector<Index> block_labels(const PlantedSpec& spec) {
  std::vector<Index> labels;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    labels.insert(labels.end(), static_cast<std::size_t>(spec.blocks[b]), static_cast<Index>(b));
  }
  return labels;
}

}  // namespace

PlantedGraph generate_graph(const PlantedSpec& spec) {
  validate(spec);
  const auto labels = block_labels(spec);
  const auto n = static_cast<Index>(labels.size());
  std::vector<AccountId> nodes;
  for (Index i = 0; i < n; ++i) nodes.push_back(padded('n', i, n));

  Rng rng(spec.seed);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) edges.push_back({i, j, 1});
    }
  }
  PlantedGraph planted;
  planted.graph = InteractionGraph(GraphKind::interaction, std::move(nodes), std::move(edges));
  planted.ground_truth = {canonical_labels(labels), 1.0, spec.seed};
  return planted;
}

std::string block_hashtag(Index block, int k) {
  return "block" + std::to_string(block) + "tag" + std::to_string(k);
}

std::string shared_hashtag(int k) { return "shared" + std::to_string(k); }

SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec) {
  validate(spec.planted);
  if (spec.hashtags_per_block < 1 || spec.shared_hashtags < 1 || spec.tweets_per_account < 1) {
    throw ArgumentError(kStage, "hashtag and tweet counts must be positive");
  }
  const auto labels = block_labels(spec.planted);
  const auto n = static_cast<Index>(labels.size());
  std::vector<AccountId> accounts;
  for (Index i = 0; i < n; ++i) accounts.push_back(padded('u', i, n));

  Rng rng(spec.planted.seed);
  const auto tweets = static_cast<std::size_t>(spec.tweets_per_account);

  struct Tweet {
    std::vector<std::string> hashtags;
    std::vector<Index> mentions;
    std::optional<Index> retweet_of;
  };
  std::vector<std::vector<Tweet>> timeline(static_cast<std::size_t>(n), std::vector<Tweet>(tweets));
  for (Index i = 0; i < n; ++i) {
    const Index block = labels[static_cast<std::size_t>(i)];
    for (Tweet& tweet : timeline[static_cast<std::size_t>(i)]) {
      for (int h = 0; h < 2; ++h) {
        tweet.hashtags.push_back(block_hashtag(block, static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.hashtags_per_block)))));
      }
      if (rng.bernoulli(0.5)) {
        tweet.hashtags.push_back(shared_hashtag(static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.shared_hashtags)))));
      }
    }
  }

  // One directed interaction lands in a random tweet of its source.
  auto interact = [&](Index source, Index target) {
    auto& tweet = timeline[static_cast<std::size_t>(source)][rng.below(tweets)];
    if (!tweet.retweet_of && rng.bernoulli(spec.retweet_share)) {
      tweet.retweet_of = target;
    } else {
      tweet.mentions.push_back(target);
    }
  };

  std::set<std::pair<Index, Index>> follows;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
      if (!rng.bernoulli(same ? spec.planted.p_in : spec.planted.p_out)) continue;
      const bool i_starts = rng.bernoulli(0.5);
      const Index a = i_starts ? i : j;
      const Index b = i_starts ? j : i;
      const auto rounds = 1 + rng.below(3);
      for (std::uint64_t r = 0; r < rounds; ++r) interact(a, b);
      follows.emplace(a, b);
      if (rng.bernoulli(spec.reciprocation)) {
        const auto replies = 1 + rng.below(3);
        for (std::uint64_t r = 0; r < replies; ++r) interact(b, a);
        follows.emplace(b, a);
      }
    }
  }

  SyntheticCorpus corpus;
  std::ostringstream jsonl;
  for (Index i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < tweets; ++t) {
      const Tweet& tweet = timeline[static_cast<std::size_t>(i)][t];
      nlohmann::json record;
      record["id"] = accounts[static_cast<std::size_t>(i)] + "-t" + std::to_string(t);
      record["user_id"] = accounts[static_cast<std::size_t>(i)];
      record["country"] = "B" + std::to_string(labels[static_cast<std::size_t>(i)]);
      std::string text;
      for (const auto& tag : tweet.hashtags) text += (text.empty() ? "#" : " #") + tag;
      record["text"] = text;
      record["entities"]["hashtags"] = tweet.hashtags;
      record["entities"]["mentions"] = nlohmann::json::array();
      for (Index target : tweet.mentions) record["entities"]["mentions"].push_back(accounts[static_cast<std::size_t>(target)]);
      if (tweet.retweet_of) record["retweet_of_user"] = accounts[static_cast<std::size_t>(*tweet.retweet_of)];
      jsonl << record.dump() << '\n';
    }
  }
  corpus.tweets_jsonl = jsonl.str();

  std::ostringstream followers;
  followers << "follower,followee\n";
  for (const auto& [a, b] : follows) {
    followers << accounts[static_cast<std::size_t>(a)] << ',' << accounts[static_cast<std::size_t>(b)] << '\n';
  }
  corpus.followers_csv = followers.str();
  for (Index i = 0; i < n; ++i) corpus.ground_truth.emplace_back(accounts[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(i)]);
  return corpus;
}

void write_corpus(const std::filesystem::path& directory, const SyntheticCorpus& corpus) {
  io::open_output(directory / "tweets.jsonl", kStage) << corpus.tweets_jsonl;
  io::open_output(directory / "followers.csv", kStage) << corpus.followers_csv;
  auto truth = io::open_output(directory / "ground_truth.csv", kStage);
  truth << "account_id,block\n";
  for (const auto& [id, block] : corpus.ground_truth) truth << id << ',' << block << '\n';
}

std::vector<std::pair<AccountId, Index>> read_ground_truth(const std::filesystem::path& path) {
  auto in = io::open_input(path, kStage);
  std::vector<std::pair<AccountId, Index>> truth;
  std::string raw;
  std::getline(in, raw);
  while (std::getline(in, raw)) {
    const auto fields = io::split_csv_line(io::trim_line(raw, false));
    if (fields.size() != 2) continue;
    truth.emplace_back(fields[0], static_cast<Index>(std::stoll(fields[1])));
  }
  return truth;
}

double nmi(std::span<const Index> a, std::span<const Index> b) {
  if (a.size() != b.size()) throw ArgumentError(kStage, "partitions cover different node sets");
  if (a.empty()) throw ArgumentError(kStage, "partitions are empty");
  const auto n = static_cast<double>(a.size());
  std::map<Index, double> count_a, count_b;
  std::map<std::pair<Index, Index>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    count_a[a[i]] += 1.0;
    count_b[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  auto entropy = [n](const std::map<Index, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double h_a = entropy(count_a);
  const double h_b = entropy(count_b);
  if (h_a + h_b == 0.0) return 1.0;
  double mutual = 0.0;
  for (const auto& [key, c] : joint) {
    mutual += (c / n) * std::log(c * n / (count_a[key.first] * count_b[key.second]));
  }
  return std::clamp(2.0 * mutual / (h_a + h_b), 0.0, 1.0);
}

}  // namespace commtopics
