#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mcdetect/graph.hpp"
#include "mcdetect/p2p_filter.hpp"

namespace mcdetect {

inline constexpr double kDefaultThetaMcr = 0.1;

struct McgVertex {
  VertexId id = 0;
  FlowKey key;
  double ddr = 0.0;
  std::vector<Ipv4Address> contacts;  // sorted
};

/// Vertices are P2P flow clusters in FlowKey order (id = position); edges
/// join same-pattern clusters of different hosts whose MCR exceeds the
/// threshold, weighted by MCR.
struct MutualContactsGraph {
  std::vector<McgVertex> vertices;
  WeightedGraph topology;

  std::size_t vertex_count() const { return vertices.size(); }
  const std::vector<WeightedEdge>& edges() const { return topology.edges(); }
};

/// Distinct /16 prefixes over distinct contacts. Throws on empty contacts.
double ddr(const FlowCluster& cluster);
double ddr(std::span<const Ipv4Address> sorted_contacts);

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t union_size = 0;
};

OverlapCounts contact_overlap(std::span<const Ipv4Address> a, std::span<const Ipv4Address> b);

/// Jaccard index of two sorted contact sets; 0 when both are empty.
double mcr(std::span<const Ipv4Address> a, std::span<const Ipv4Address> b);
double mcr(const FlowCluster& a, const FlowCluster& b);

/// Builds the graph. `jobs` bounds the worker threads used over pattern
/// buckets; the result does not depend on it.
MutualContactsGraph build_mcg(const ClusterMap& clusters, double theta_mcr = kDefaultThetaMcr, std::size_t jobs = 1);

/// Vertex lines `id,src_ip,proto,bpp_out,bpp_in,ddr`, then edge lines `a,b,mcr`.
void write_graph_dump(std::ostream& out, const MutualContactsGraph& graph);

}  // namespace mcdetect
