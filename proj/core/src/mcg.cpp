#include "mcdetect/mcg.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

#include "mcdetect/parallel.hpp"

namespace mcdetect {

double ddr(std::span<const Ipv4Address> sorted_contacts) {
  if (sorted_contacts.empty()) throw std::invalid_argument("ddr: empty contact set");
  return static_cast<double>(destination_diversity(sorted_contacts)) / static_cast<double>(sorted_contacts.size());
}

double ddr(const FlowCluster& cluster) {
  if (cluster.contacts.empty()) throw std::invalid_argument("ddr: empty contact set");
  return static_cast<double>(cluster.dd) / static_cast<double>(cluster.contacts.size());
}

OverlapCounts contact_overlap(std::span<const Ipv4Address> a, std::span<const Ipv4Address> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return {common, a.size() + b.size() - common};
}

double mcr(std::span<const Ipv4Address> a, std::span<const Ipv4Address> b) {
  const auto counts = contact_overlap(a, b);
  if (counts.union_size == 0) return 0.0;
  return static_cast<double>(counts.intersection) / static_cast<double>(counts.union_size);
}

double mcr(const FlowCluster& a, const FlowCluster& b) { return mcr(a.contacts, b.contacts); }

MutualContactsGraph build_mcg(const ClusterMap& clusters, double theta_mcr, std::size_t jobs) {
  if (!(theta_mcr >= 0.0 && theta_mcr < 1.0)) throw std::invalid_argument("build_mcg: theta_mcr must be in [0, 1)");

  MutualContactsGraph graph;
  graph.vertices.reserve(clusters.size());
  std::map<PatternKey, std::vector<VertexId>> buckets;
  for (const auto& [key, cluster] : clusters) {
    const auto id = static_cast<VertexId>(graph.vertices.size());
    graph.vertices.push_back(McgVertex{id, key, ddr(cluster), cluster.contacts});
    buckets[key.pattern()].push_back(id);
  }

  std::vector<const std::vector<VertexId>*> bucket_list;
  for (const auto& [pattern, members] : buckets) {
    if (members.size() > 1) bucket_list.push_back(&members);
  }

  std::vector<std::vector<WeightedEdge>> found(bucket_list.size());
  parallel_for(bucket_list.size(), jobs, [&](std::size_t b) {
    const auto& members = *bucket_list[b];
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto& vi = graph.vertices[members[i]];
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const auto& vj = graph.vertices[members[j]];
        if (vi.key.src == vj.key.src) continue;
        const double w = mcr(vi.contacts, vj.contacts);
        if (w > theta_mcr) found[b].push_back({vi.id, vj.id, w});
      }
    }
  });

  std::vector<WeightedEdge> edges;
  for (auto& part : found) edges.insert(edges.end(), part.begin(), part.end());
  graph.topology = WeightedGraph(graph.vertices.size(), std::move(edges));
  return graph;
}

void write_graph_dump(std::ostream& out, const MutualContactsGraph& graph) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& v : graph.vertices) {
    out << v.id << ',' << v.key.src.to_string() << ',' << to_string(v.key.proto) << ',' << v.key.bpp_out
        << ',' << v.key.bpp_in << ',' << v.ddr << '\n';
  }
  for (const auto& e : graph.edges()) out << e.a << ',' << e.b << ',' << e.weight << '\n';
  out.precision(precision);
}

}  // namespace mcdetect
