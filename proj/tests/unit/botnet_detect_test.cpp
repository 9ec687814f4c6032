#include <gtest/gtest.h>

#include "mcdetect/botnet_detect.hpp"
#include "mcdetect/pipeline.hpp"
#include "mcdetect/synthgen.hpp"
#include "oracles.hpp"
#include "test_graphs.hpp"

namespace mcdetect {
namespace {

using testing::clique_edges;
using testing::random_edges;
using testing::unit_edges;

MutualContactsGraph make_graph(const std::vector<double>& ddrs, std::vector<WeightedEdge> edges) {
  MutualContactsGraph g;
  for (std::size_t i = 0; i < ddrs.size(); ++i) {
    McgVertex v;
    v.id = static_cast<VertexId>(i);
    v.key = FlowKey{Ipv4Address(10, 0, static_cast<std::uint8_t>(i / 250), static_cast<std::uint8_t>(1 + i % 250)),
                    Protocol::udp, 1, 1};
    v.ddr = ddrs[i];
    g.vertices.push_back(v);
  }
  g.topology = WeightedGraph(ddrs.size(), std::move(edges));
  return g;
}

std::vector<VertexId> iota(VertexId n) {
  std::vector<VertexId> v(n);
  for (VertexId i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST(AvgDdr, Examples) {
  const auto g = make_graph({0.8, 1.0, 0.97}, {});
  EXPECT_DOUBLE_EQ(avgddr(std::vector<VertexId>{0, 1}, g), 0.9);
  EXPECT_DOUBLE_EQ(avgddr(std::vector<VertexId>{2}, g), 0.97);
  EXPECT_THROW(avgddr(std::vector<VertexId>{}, g), std::invalid_argument);
}

TEST(AvgMcr, Examples) {
  const WeightedGraph triangle(3, clique_edges(0, 3, 0.6));
  EXPECT_NEAR(avgmcr(iota(3), triangle), 0.6, 1e-15);
  const WeightedGraph one_edge(3, {{0, 1, 0.9}});
  EXPECT_NEAR(avgmcr(iota(3), one_edge), 0.3, 1e-15);
  EXPECT_EQ(avgmcr(std::vector<VertexId>{1}, one_edge), 0.0);
}

TEST(AvgMcr, MatchesOracleOnRandomSubsets) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(15);
    const auto edges = random_edges(n, 0.5, rng, true);
    const WeightedGraph g(n, edges);
    std::vector<VertexId> members;
    for (VertexId v = 0; v < n; ++v) {
      if (rng.chance(0.6)) members.push_back(v);
    }
    if (members.empty()) members.push_back(0);
    const double value = avgmcr(members, g);
    EXPECT_NEAR(value, oracle::avgmcr(members, edges), 1e-12);
    EXPECT_GE(value, 0.0);
    EXPECT_LE(value, 1.0);
  }
}

TEST(FilterCommunities, InclusiveBoundaryAndRejection) {
  const std::vector<CommunityScore> scores = {{0, 0.6, 0.15, 3, false}, {1, 0.9, 0.05, 3, false}};
  EXPECT_EQ(filter_botnet_communities(scores, 0.6, 0.15), (std::set<CommunityId>{0}));
}

TEST(FilterCommunities, AntiMonotoneInBothThresholds) {
  Rng rng(42);
  std::vector<CommunityScore> scores;
  for (CommunityId i = 0; i < 100; ++i) scores.push_back({i, rng.unit(), rng.unit(), 3, false});
  for (int trial = 0; trial < 100; ++trial) {
    const double d1 = rng.unit(), d2 = d1 + rng.unit() * (1 - d1);
    const double m1 = rng.unit(), m2 = m1 + rng.unit() * (1 - m1);
    const auto loose = filter_botnet_communities(scores, d1, m1);
    const auto strict = filter_botnet_communities(scores, d2, m2);
    EXPECT_TRUE(std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()));
  }
}

TEST(MaxClique, FourCliquePlusPendant) {
  auto edges = clique_edges(0, 4);
  edges.push_back({3, 4, 1.0});
  const WeightedGraph g(5, edges);
  const auto cliques = max_clique_iterative(g, iota(5));
  ASSERT_EQ(cliques.size(), 1u);
  EXPECT_EQ(cliques[0], (std::vector<VertexId>{0, 1, 2, 3}));
}

TEST(MaxClique, TwoDisjointTriangles) {
  auto edges = clique_edges(3, 3);
  const auto first = clique_edges(0, 3);
  edges.insert(edges.end(), first.begin(), first.end());
  const WeightedGraph g(6, edges);
  const auto cliques = max_clique_iterative(g, iota(6));
  ASSERT_EQ(cliques.size(), 2u);
  EXPECT_EQ(cliques[0], (std::vector<VertexId>{0, 1, 2}));
  EXPECT_EQ(cliques[1], (std::vector<VertexId>{3, 4, 5}));
}

TEST(MaxClique, SingleEdgeIsBelowFloor) {
  const WeightedGraph g(2, unit_edges({{0, 1}}));
  EXPECT_TRUE(max_clique_iterative(g, iota(2)).empty());
  EXPECT_EQ(maximum_clique(g, iota(2)), (std::vector<VertexId>{0, 1}));
}

TEST(MaxClique, RestrictedToInducedSubgraph) {
  const WeightedGraph g(5, clique_edges(0, 5));
  EXPECT_EQ(maximum_clique(g, std::vector<VertexId>{4, 1, 3}), (std::vector<VertexId>{1, 3, 4}));
}

TEST(MaxClique, MatchesOracleOnRandomGraphs) {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(15);
    const double p = 0.3 + 0.4 * rng.unit();
    const auto edges = random_edges(n, p, rng);
    const WeightedGraph g(n, edges);
    const auto clique = maximum_clique(g, iota(static_cast<VertexId>(n)));
    EXPECT_TRUE(oracle::is_clique(clique, edges));
    EXPECT_EQ(clique, oracle::maximum_clique(iota(static_cast<VertexId>(n)), edges));
  }
}

TEST(MaxClique, IterativeExtractionIsDisjointAndShrinking) {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(12);
    const auto edges = random_edges(n, 0.5, rng);
    const WeightedGraph g(n, edges);
    const auto cliques = max_clique_iterative(g, iota(static_cast<VertexId>(n)));
    std::set<VertexId> used;
    std::vector<VertexId> remaining = iota(static_cast<VertexId>(n));
    for (std::size_t i = 0; i < cliques.size(); ++i) {
      EXPECT_GE(cliques[i].size(), 3u);
      if (i > 0) {
        EXPECT_LE(cliques[i].size(), cliques[i - 1].size());
      }
      EXPECT_TRUE(oracle::is_clique(cliques[i], edges));
      EXPECT_EQ(cliques[i], oracle::maximum_clique(remaining, edges));
      for (auto v : cliques[i]) EXPECT_TRUE(used.insert(v).second);
      std::erase_if(remaining, [&](VertexId v) { return used.contains(v); });
    }
    EXPECT_LT(oracle::maximum_clique(remaining, edges).size(), 3u);
  }
}

TEST(Detect, EmptyGraph) {
  const MutualContactsGraph g;
  const auto report = detect(g, CommunityPartition{}, 0.6, 0.15);
  EXPECT_TRUE(report.scores.empty());
  EXPECT_TRUE(report.bot_hosts.empty());
}

TEST(Detect, FiveCliqueReportedLowMcrCommunityIgnored) {
  // Vertices 0..4: 5-clique with mcr 0.5, ddr 0.9. Vertices 5..9: legit-like
  // community with sparse 0.2 edges (avgmcr 0.04), ddr 0.95.
  auto edges = clique_edges(0, 5, 0.5);
  edges.push_back({5, 6, 0.2});
  edges.push_back({7, 8, 0.2});
  const auto g = make_graph({0.9, 0.9, 0.9, 0.9, 0.9, 0.95, 0.95, 0.95, 0.95, 0.95}, edges);
  const auto partition = make_partition(std::vector<std::uint32_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  const auto report = detect(g, partition, 0.6, 0.15);
  ASSERT_EQ(report.scores.size(), 2u);
  EXPECT_NEAR(report.scores[0].avgddr, 0.9, 1e-12);
  EXPECT_NEAR(report.scores[0].avgmcr, 0.5, 1e-12);
  EXPECT_NEAR(report.scores[1].avgmcr, 0.04, 1e-12);
  EXPECT_EQ(report.botnet_communities, (std::set<CommunityId>{0}));
  ASSERT_EQ(report.cliques.size(), 1u);
  EXPECT_EQ(report.cliques[0].vertices, iota(5));
  EXPECT_EQ(report.bot_hosts.size(), 5u);
  for (VertexId v = 0; v < 5; ++v) EXPECT_TRUE(report.bot_hosts.contains(g.vertices[v].key.src));
}

TEST(Detect, JobsDoNotChangeReport) {
  Rng rng(45);
  const std::size_t n = 60;
  auto edges = random_edges(n, 0.15, rng, true);
  std::vector<double> ddrs(n);
  for (auto& d : ddrs) d = 0.5 + 0.5 * rng.unit();
  const auto g = make_graph(ddrs, edges);
  const auto partition = louvain(g);
  const auto one = detect(g, partition, 0.6, 0.1, 1);
  const auto many = detect(g, partition, 0.6, 0.1, 8);
  EXPECT_EQ(one.bot_clusters, many.bot_clusters);
  EXPECT_EQ(one.bot_hosts, many.bot_hosts);
  ASSERT_EQ(one.cliques.size(), many.cliques.size());
  for (std::size_t i = 0; i < one.cliques.size(); ++i) EXPECT_EQ(one.cliques[i].vertices, many.cliques[i].vertices);
}

TEST(Detect, PlantedBotnetEndToEnd) {
  SynthConfig config;
  config.n_bots_per_botnet = {5};
  config.n_legit_p2p = 8;
  config.n_internal = 120;
  config.external_pool = 6000;
  const auto dataset = generate_dataset(config);
  const auto result = run_pipeline(dataset.flows, DetectionThresholds{});
  std::set<Ipv4Address> bots;
  for (const auto& [host, label] : dataset.labels) {
    if (label.role == HostRole::bot) bots.insert(host);
  }
  EXPECT_EQ(bots.size(), 5u);
  EXPECT_EQ(result.report.bot_hosts, bots);
  for (const auto& clique : result.report.cliques) {
    EXPECT_TRUE(oracle::is_clique(clique.vertices, result.graph.edges()));
  }
}

}  // namespace
}  // namespace mcdetect
