#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "mcdetect/flow_model.hpp"

namespace mcdetect {

/// All flows sharing one FlowKey. `contacts` is sorted and duplicate-free.
struct FlowCluster {
  FlowKey key;
  std::vector<Ipv4Address> contacts;
  std::size_t dd = 0;
  std::size_t flow_count = 0;

  PatternKey pattern() const { return key.pattern(); }
  bool operator==(const FlowCluster&) const = default;
};

using ClusterMap = std::map<FlowKey, FlowCluster>;

/// Number of distinct /16 prefixes among a sorted contact list.
std::size_t destination_diversity(std::span<const Ipv4Address> sorted_contacts);
std::size_t destination_diversity(const FlowCluster& cluster);

/// Partial aggregation of flows into clusters. Accumulators built over any
/// split of the input merge into the same result as a single pass.
class ClusterAccumulator {
 public:
  void add(const FlowRecord& flow);
  void add(std::span<const FlowRecord> flows);
  void merge(ClusterAccumulator&& other);
  ClusterMap finish() &&;

 private:
  struct Partial {
    std::vector<Ipv4Address> contacts;
    std::size_t flow_count = 0;
  };
  std::map<FlowKey, Partial> partials_;
};

/// Groups flows by FlowKey, collecting destination contacts and DD.
ClusterMap cluster_flows(std::span<const FlowRecord> flows);

/// Same result as cluster_flows, computed over `partitions` contiguous slices
/// on up to `jobs` threads and merged by key.
ClusterMap cluster_flows_partitioned(std::span<const FlowRecord> flows, std::size_t partitions, std::size_t jobs = 1);

/// Retains clusters with dd >= theta_dd.
ClusterMap detect_p2p(const ClusterMap& clusters, std::size_t theta_dd);

/// `src_ip,proto,bpp_out,bpp_in,dd,contact_count` per cluster.
void write_cluster_dump(std::ostream& out, const ClusterMap& clusters);

}  // namespace mcdetect
