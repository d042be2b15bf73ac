#include "commtopics/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "commtopics/error.hpp"
#include "test_util.hpp"

namespace commtopics {
namespace {

using testing::graph_from_edges;

InteractionEvent ev(std::string s, std::string t, InteractionKind k = InteractionKind::mention) {
  return {std::move(s), std::move(t), k, "t"};
}

// Weight of {a,b} in g, 0 if absent.
std::int64_t weight_of(const InteractionGraph& g, const AccountId& a, const AccountId& b) {
  const auto i = g.find(a);
  const auto j = g.find(b);
  if (!i || !j) return 0;
  for (const Edge& e : g.edges()) {
    if ((e.source == *i && e.target == *j) || (e.source == *j && e.target == *i)) return e.weight;
  }
  return 0;
}

TEST(BuildInteractionGraph, ReciprocalPairPoolsKinds) {
  const auto g = build_interaction_graph(
      {ev("A", "B"), ev("B", "A", InteractionKind::retweet), ev("A", "B")});
  ASSERT_EQ(g.edge_count(), 1);
  EXPECT_EQ(weight_of(g, "A", "B"), 3);
}

TEST(BuildInteractionGraph, OneWayInteractionsExcluded) {
  const auto g = build_interaction_graph({ev("A", "B"), ev("A", "B")});
  EXPECT_EQ(g.edge_count(), 0);
  EXPECT_EQ(g.node_count(), 0);
}

TEST(BuildInteractionGraph, EmptyInputGivesEmptyGraph) {
  EXPECT_TRUE(build_interaction_graph({}).empty());
}

std::vector<InteractionEvent> random_events(std::uint64_t seed, int count, int accounts) {
  std::mt19937_64 gen(seed);
  std::vector<InteractionEvent> events;
  for (int i = 0; i < count; ++i) {
    const auto a = std::string(1, static_cast<char>('A' + gen() % accounts));
    const auto b = std::string(1, static_cast<char>('A' + gen() % accounts));
    if (a == b) continue;
    events.push_back({a, b, gen() % 2 ? InteractionKind::mention : InteractionKind::retweet, std::to_string(i)});
  }
  return events;
}

TEST(BuildInteractionGraph, MatchesBruteForceReciprocityOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto events = random_events(seed, 20, 6);
    const auto g = build_interaction_graph(events);
    std::set<std::pair<AccountId, AccountId>> oracle_edges;
    for (char x = 'A'; x < 'G'; ++x) {
      for (char y = x + 1; y < 'G'; ++y) {
        const std::string a(1, x), b(1, y);
        const auto forward = std::count_if(events.begin(), events.end(),
                                           [&](const auto& e) { return e.source == a && e.target == b; });
        const auto backward = std::count_if(events.begin(), events.end(),
                                            [&](const auto& e) { return e.source == b && e.target == a; });
        if (forward > 0 && backward > 0) {
          oracle_edges.emplace(a, b);
          EXPECT_EQ(weight_of(g, a, b), forward + backward);
        } else {
          EXPECT_EQ(weight_of(g, a, b), 0);
        }
      }
    }
    EXPECT_EQ(g.edge_count(), static_cast<Index>(oracle_edges.size()));
  }
}

TEST(BuildInteractionGraph, InvariantUnderEventPermutation) {
  auto events = random_events(7, 60, 8);
  const auto reference = build_interaction_graph(events);
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(events.begin(), events.end(), gen);
    EXPECT_EQ(build_interaction_graph(events), reference);
  }
}

TEST(BuildFollowerGraph, ReciprocityRule) {
  const auto both = build_follower_graph({{"A", "B"}, {"B", "A"}});
  ASSERT_EQ(both.edge_count(), 1);
  EXPECT_EQ(both.edges()[0].weight, 1);
  EXPECT_EQ(build_follower_graph({{"A", "B"}}).edge_count(), 0);
}

TEST(BuildFollowerGraph, FiftyRowFixtureMatchesOracle) {
  std::mt19937_64 gen(11);
  std::vector<FollowerEdge> rows;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({std::string(1, static_cast<char>('a' + gen() % 8)),
                    std::string(1, static_cast<char>('a' + gen() % 8))});
  }
  const auto g = build_follower_graph(rows);
  std::size_t expected = 0;
  for (char x = 'a'; x < 'i'; ++x) {
    for (char y = x + 1; y < 'i'; ++y) {
      const std::string a(1, x), b(1, y);
      const bool ab = std::find(rows.begin(), rows.end(), FollowerEdge{a, b}) != rows.end();
      const bool ba = std::find(rows.begin(), rows.end(), FollowerEdge{b, a}) != rows.end();
      EXPECT_EQ(weight_of(g, a, b), ab && ba ? 1 : 0);
      expected += ab && ba;
    }
  }
  EXPECT_EQ(g.edge_count(), static_cast<Index>(expected));
}

TEST(FilterComponents, DropsSmallComponents) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < 6; ++i) pairs.emplace_back(i, i + 1);  // 7-node path
  pairs.emplace_back(7, 8);
  pairs.emplace_back(8, 9);  // 3-node path
  const auto g = graph_from_edges(10, pairs);
  const auto filtered = filter_components(g, 5);
  EXPECT_EQ(filtered.node_count(), 7);
  EXPECT_EQ(filtered.edge_count(), 6);
  EXPECT_EQ(filtered.nodes().front(), "v00");
}

TEST(FilterComponents, SmallConnectedGraphVanishes) {
  const auto g = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_TRUE(filter_components(g, 5).empty());
}

std::vector<Index> bfs_component_sizes(const InteractionGraph& g) {
  const auto n = static_cast<std::size_t>(g.node_count());
  std::vector<std::vector<Index>> adj(n);
  for (const auto& e : g.edges()) {
    adj[static_cast<std::size_t>(e.source)].push_back(e.target);
    adj[static_cast<std::size_t>(e.target)].push_back(e.source);
  }
  std::vector<char> seen(n, 0);
  std::vector<Index> sizes;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Index size = 0;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      ++size;
      for (Index w : adj[v]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          q.push(static_cast<std::size_t>(w));
        }
      }
    }
    sizes.push_back(size);
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

TEST(FilterComponents, MatchesComponentOracleAndIsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::pair<Index, Index>> pairs;
    std::set<std::pair<Index, Index>> seen;
    for (int k = 0; k < 25; ++k) {
      Index a = static_cast<Index>(gen() % 30), b = static_cast<Index>(gen() % 30);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (seen.insert({a, b}).second) pairs.emplace_back(a, b);
    }
    const auto g = graph_from_edges(30, pairs);
    auto oracle = bfs_component_sizes(g);
    std::erase_if(oracle, [](Index s) { return s < 5; });
    const auto filtered = filter_components(g, 5);
    EXPECT_EQ(bfs_component_sizes(filtered), oracle);
    EXPECT_EQ(filter_components(filtered, 5), filtered);
    EXPECT_TRUE(std::is_sorted(filtered.nodes().begin(), filtered.nodes().end()));
  }
}

TEST(GraphExport, EdgeCsvRoundTripsAndIsSorted) {
  const auto g = build_interaction_graph(
      {ev("b", "a"), ev("a", "b"), ev("c", "a"), ev("a", "c"), ev("a", "c")});
  std::ostringstream out;
  write_edge_csv(out, g);
  EXPECT_EQ(out.str(), "source,target,weight\na,b,2\na,c,3\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_edge_csv(in, GraphKind::interaction), g);
}

TEST(GraphExport, GexfIsDeterministicAndEscaped) {
  const auto g = build_interaction_graph({ev("x&y", "z"), ev("z", "x&y")});
  std::ostringstream a, b;
  write_gexf(a, g);
  write_gexf(b, g);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("version=\"1.2\""), std::string::npos);
  EXPECT_NE(a.str().find("id=\"x&amp;y\""), std::string::npos);
  EXPECT_NE(a.str().find("weight=\"2\""), std::string::npos);
  EXPECT_NE(a.str().find("defaultedgetype=\"undirected\""), std::string::npos);
}

TEST(Betweenness, PathAndStar) {
  const auto path = graph_from_edges(3, {{0, 1}, {1, 2}});
  const auto c = betweenness_centrality(path);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_DOUBLE_EQ(c[1], 1.0);
  const auto star = graph_from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EXPECT_DOUBLE_EQ(betweenness_centrality(star)[0], 1.0);
}

TEST(InteractionGraph, RejectsSelfLoops) {
  EXPECT_THROW(graph_from_edges(2, {{1, 1}}), Error);
}

}  // namespace
}  // namespace commtopics
