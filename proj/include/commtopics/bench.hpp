#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "commtopics/detect.hpp"
#include "commtopics/graph.hpp"

namespace commtopics {

struct PlantedSpec {
  std::vector<Index> blocks{25, 25, 25, 25};
  double p_in = 0.3;
  double p_out = 0.01;
  std::uint64_t seed = 1;
};

struct PlantedGraph {
  InteractionGraph graph;  // every node present, including isolated ones
  Partition ground_truth;
};

// G(n, p) inside each block at p_in and across blocks at p_out; unit
// weights. Node ids are zero-padded ("n007") so index and id order agree.
PlantedGraph generate_graph(const PlantedSpec& spec);

struct SyntheticCorpusSpec {
  PlantedSpec planted;
  int hashtags_per_block = 8;
  int shared_hashtags = 4;
  int tweets_per_account = 10;
  double reciprocation = 0.8;
  double retweet_share = 0.3;
};

struct SyntheticCorpus {
  std::string tweets_jsonl;
  std::string followers_csv;
  std::vector<std::pair<AccountId, Index>> ground_truth;  // account -> block
};

std::string block_hashtag(Index block, int k);
std::string shared_hashtag(int k);

// Accounts tweet hashtags of their own block plus shared ones; each pair
// interacts with probability p_in / p_out and the interaction is returned
// with probability `reciprocation`. Output is ingest-compatible.
SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec);

void write_corpus(const std::filesystem::path& directory, const SyntheticCorpus& corpus);
std::vector<std::pair<AccountId, Index>> read_ground_truth(const std::filesystem::path& path);

// Normalized mutual information, 2 I(A;B) / (H(A) + H(B)); 1 when both
// partitions are a single block.
double nmi(std::span<const Index> a, std::span<const Index> b);
inline double nmi(const Partition& a, const Partition& b) { return nmi(a.assignment, b.assignment); }

}  // namespace commtopics
