#include "mcdetect/p2p_filter.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "mcdetect/parallel.hpp"

namespace mcdetect {

std::size_t destination_diversity(std::span<const Ipv4Address> sorted_contacts) {
  // Sorted addresses keep equal /16 prefixes adjacent.
  std::size_t dd = 0;
  bool first = true;
  Prefix16 last{};
  for (const auto addr : sorted_contacts) {
    const auto p = prefix16(addr);
    if (first || p != last) {
      ++dd;
      last = p;
      first = false;
    }
  }
  return dd;
}

std::size_t destination_diversity(const FlowCluster& cluster) {
  return destination_diversity(cluster.contacts);
}

void ClusterAccumulator::add(const FlowRecord& flow) {
  auto& partial = partials_[flow.key()];
  partial.contacts.push_back(flow.dst);
  ++partial.flow_count;
}

void ClusterAccumulator::add(std::span<const FlowRecord> flows) {
  for (const auto& f : flows) add(f);
}

void ClusterAccumulator::merge(ClusterAccumulator&& other) {
  for (auto& [key, theirs] : other.partials_) {
    auto& mine = partials_[key];
    mine.contacts.insert(mine.contacts.end(), theirs.contacts.begin(), theirs.contacts.end());
    mine.flow_count += theirs.flow_count;
  }
  other.partials_.clear();
}

ClusterMap ClusterAccumulator::finish() && {
  ClusterMap clusters;
  for (auto& [key, partial] : partials_) {
    FlowCluster c;
    c.key = key;
    c.contacts = std::move(partial.contacts);
    std::sort(c.contacts.begin(), c.contacts.end());
    c.contacts.erase(std::unique(c.contacts.begin(), c.contacts.end()), c.contacts.end());
    c.dd = destination_diversity(c.contacts);
    c.flow_count = partial.flow_count;
    clusters.emplace_hint(clusters.end(), key, std::move(c));
  }
  partials_.clear();
  return clusters;
}

ClusterMap cluster_flows(std::span<const FlowRecord> flows) {
  ClusterAccumulator acc;
  acc.add(flows);
  return std::move(acc).finish();
}

ClusterMap cluster_flows_partitioned(std::span<const FlowRecord> flows, std::size_t partitions, std::size_t jobs) {
  if (partitions == 0) throw std::invalid_argument("cluster_flows_partitioned: zero partitions");
  std::vector<ClusterAccumulator> parts(partitions);
  const std::size_t n = flows.size();
  parallel_for(partitions, jobs, [&](std::size_t p) {
    const std::size_t begin = n * p / partitions;
    const std::size_t end = n * (p + 1) / partitions;
    parts[p].add(flows.subspan(begin, end - begin));
  });
  for (std::size_t p = 1; p < partitions; ++p) parts[0].merge(std::move(parts[p]));
  return std::move(parts[0]).finish();
}

ClusterMap detect_p2p(const ClusterMap& clusters, std::size_t theta_dd) {
  if (theta_dd == 0) throw std::invalid_argument("detect_p2p: theta_dd must be >= 1");
  ClusterMap retained;
  for (const auto& [key, cluster] : clusters) {
    if (cluster.dd >= theta_dd) retained.emplace_hint(retained.end(), key, cluster);
  }
  return retained;
}

void write_cluster_dump(std::ostream& out, const ClusterMap& clusters) {
  for (const auto& [key, c] : clusters) {
    out << key.src.to_string() << ',' << to_string(key.proto) << ',' << key.bpp_out << ',' << key.bpp_in << ','
        << c.dd << ',' << c.contacts.size() << '\n';
  }
}

}  // namespace mcdetect
