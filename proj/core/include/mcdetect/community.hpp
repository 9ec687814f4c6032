#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcdetect/graph.hpp"
#include "mcdetect/mcg.hpp"

namespace mcdetect {

using CommunityId = std::uint32_t;

inline constexpr double kDefaultResolution = 1.0;

/// Disjoint cover of the graph's vertices. Community ids are dense and
/// ordered by each community's smallest vertex id; member lists are sorted.
struct CommunityPartition {
  std::vector<CommunityId> assignment;
  std::vector<std::vector<VertexId>> communities;
  double modularity = 0.0;

  std::size_t size() const { return communities.size(); }
};

/// Canonicalizes arbitrary per-vertex labels into a CommunityPartition.
/// The modularity field is left at zero.
CommunityPartition make_partition(std::span<const std::uint32_t> labels);

/// Weighted Newman modularity with resolution. Zero on a graph without edge weight.
double modularity(const WeightedGraph& graph, std::span<const CommunityId> assignment,
                  double resolution = kDefaultResolution);
double modularity(const MutualContactsGraph& graph, const CommunityPartition& partition,
                  double resolution = kDefaultResolution);

/// Modularity of the partition after each Louvain pass, measured on the input
/// graph. Entry 0 is the all-singletons partition.
struct LouvainTrace {
  std::vector<double> pass_modularity;
};

/// Two-phase Louvain. Vertices are swept in ascending id order; among equal
/// best gains the community holding the smallest vertex id wins, and a vertex
/// only leaves its community for a strictly positive improvement.
CommunityPartition louvain(const WeightedGraph& graph, double resolution = kDefaultResolution,
                           LouvainTrace* trace = nullptr);
CommunityPartition louvain(const MutualContactsGraph& graph, double resolution = kDefaultResolution,
                           LouvainTrace* trace = nullptr);

/// `cluster_id,community_id` per vertex.
void write_partition_dump(std::ostream& out, const CommunityPartition& partition);

}  // namespace mcdetect
