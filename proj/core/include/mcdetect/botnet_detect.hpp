#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "mcdetect/community.hpp"
#include "mcdetect/graph.hpp"
#include "mcdetect/mcg.hpp"

namespace mcdetect {

inline constexpr double kDefaultThetaAvgDdr = 0.6;
inline constexpr double kDefaultThetaAvgMcr = 0.15;

struct CommunityScore {
  CommunityId community_id = 0;
  double avgddr = 0.0;
  double avgmcr = 0.0;
  std::size_t size = 0;
  bool selected = false;
};

/// Mean ddr over the members. Throws on an empty member list.
double avgddr(std::span<const VertexId> members, const MutualContactsGraph& graph);

/// Sum of intra-community edge weights over the number of unordered member
/// pairs; 0 for a singleton.
double avgmcr(std::span<const VertexId> members, const WeightedGraph& graph);
double avgmcr(std::span<const VertexId> members, const MutualContactsGraph& graph);

std::vector<CommunityScore> score_communities(const MutualContactsGraph& graph, const CommunityPartition& partition);

/// Communities with avgddr >= theta_avgddr and avgmcr >= theta_avgmcr.
std::set<CommunityId> filter_botnet_communities(std::span<const CommunityScore> scores, double theta_avgddr,
                                                double theta_avgmcr);

/// A maximum clique of the subgraph induced on `vertices`; among several of
/// equal size, the one whose sorted id sequence is lexicographically smallest.
std::vector<VertexId> maximum_clique(const WeightedGraph& graph, std::span<const VertexId> vertices);

/// Repeatedly extracts a maximum clique from the remaining induced subgraph
/// while it has at least `min_size` vertices, removing its vertices each time.
std::vector<std::vector<VertexId>> max_clique_iterative(const WeightedGraph& graph, std::span<const VertexId> vertices,
                                                        std::size_t min_size = 3);

struct DetectionThresholds {
  std::size_t theta_dd = 30;
  double theta_mcr = kDefaultThetaMcr;
  double theta_avgddr = kDefaultThetaAvgDdr;
  double theta_avgmcr = kDefaultThetaAvgMcr;
  double resolution = kDefaultResolution;
};

struct ReportedClique {
  CommunityId community_id = 0;
  std::vector<VertexId> vertices;
};

struct DetectionReport {
  DetectionThresholds thresholds;
  std::vector<CommunityScore> scores;
  std::set<CommunityId> botnet_communities;
  std::vector<ReportedClique> cliques;  // ordered by community, then extraction order
  std::set<VertexId> bot_clusters;
  std::set<Ipv4Address> bot_hosts;
};

/// Scores every community, keeps the ones passing both thresholds and
/// verifies them by clique extraction. `jobs` bounds concurrent verification.
DetectionReport detect(const MutualContactsGraph& graph, const CommunityPartition& partition, double theta_avgddr,
                       double theta_avgmcr, std::size_t jobs = 1);

/// Host-level community used for evaluation: the community of a clique-member
/// cluster of the host if any, else the lowest community among its clusters.
/// Hosts without clusters in the graph are absent.
std::map<Ipv4Address, CommunityId> host_communities(const MutualContactsGraph& graph,
                                                    const CommunityPartition& partition,
                                                    const DetectionReport& report);

}  // namespace mcdetect
