#include "mcdetect/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace mcdetect {

namespace {

constexpr double kGainEpsilon = 1e-12;

// Aggregated graph at one Louvain level. Node order follows the smallest
// original vertex each node contains.
struct Level {
  std::vector<std::vector<Neighbor>> adjacency;  // no self entries
  std::vector<double> self_loop;                 // internal weight, counted once
  std::vector<double> degree;                    // sum of adjacency + 2 * self_loop

  std::size_t size() const { return adjacency.size(); }
};

Level level_from_graph(const WeightedGraph& graph) {
  Level level;
  const auto n = graph.vertex_count();
  level.adjacency.resize(n);
  level.self_loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (VertexId v = 0; v < n; ++v) {
    const auto nb = graph.neighbors(v);
    level.adjacency[v].assign(nb.begin(), nb.end());
    for (const auto& x : nb) level.degree[v] += x.weight;
  }
  return level;
}

// One local-moving phase. Returns true if any node changed community.
bool move_nodes(const Level& level, double resolution, double two_m, std::vector<std::uint32_t>& community) {
  const auto n = level.size();
  std::vector<double> total(n, 0.0);
  std::vector<std::set<std::uint32_t>> members(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    community[i] = i;
    total[i] = level.degree[i];
    members[i].insert(i);
  }

  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto old_c = community[i];
      const double k_i = level.degree[i];

      touched.clear();
      link[old_c] = 0.0;
      touched.push_back(old_c);
      for (const auto& nb : level.adjacency[i]) {
        const auto c = community[nb.id];
        if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
        link[c] += nb.weight;
      }

      total[old_c] -= k_i;
      members[old_c].erase(i);

      auto best_c = old_c;
      double best_gain = link[old_c] - resolution * total[old_c] * k_i / two_m;
      for (const auto c : touched) {
        if (c == old_c) continue;
        const double gain = link[c] - resolution * total[c] * k_i / two_m;
        if (gain > best_gain + kGainEpsilon) {
          best_c = c;
          best_gain = gain;
        } else if (best_c != old_c && std::abs(gain - best_gain) <= kGainEpsilon &&
                   *members[c].begin() < *members[best_c].begin()) {
          best_c = c;
        }
      }

      total[best_c] += k_i;
      members[best_c].insert(i);
      community[i] = best_c;
      if (best_c != old_c) {
        moved = true;
        any_move = true;
      }
      for (const auto c : touched) link[c] = 0.0;
    }
  }
  return any_move;
}

// Collapses communities into nodes. `community` is rewritten to dense ids
// ordered by each community's smallest node.
Level aggregate(const Level& level, std::vector<std::uint32_t>& community) {
  const auto n = level.size();
  std::vector<std::uint32_t> dense(n, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (dense[community[i]] == std::numeric_limits<std::uint32_t>::max()) dense[community[i]] = next++;
  }
  for (auto& c : community) c = dense[c];

  Level out;
  out.self_loop.assign(next, 0.0);
  out.degree.assign(next, 0.0);
  std::vector<std::map<std::uint32_t, double>> links(next);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto ci = community[i];
    out.self_loop[ci] += level.self_loop[i];
    out.degree[ci] += level.degree[i];
    for (const auto& nb : level.adjacency[i]) {
      const auto cj = community[nb.id];
      if (cj == ci) {
        if (i < nb.id) out.self_loop[ci] += nb.weight;
      } else {
        links[ci][cj] += nb.weight;
      }
    }
  }
  out.adjacency.resize(next);
  for (std::uint32_t c = 0; c < next; ++c) {
    for (const auto& [d, w] : links[c]) out.adjacency[c].push_back({d, w});
  }
  return out;
}

}  // namespace

CommunityPartition make_partition(std::span<const std::uint32_t> labels) {
  CommunityPartition p;
  p.assignment.resize(labels.size());
  std::map<std::uint32_t, CommunityId> remap;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto [it, inserted] = remap.emplace(labels[v], static_cast<CommunityId>(p.communities.size()));
    if (inserted) p.communities.emplace_back();
    p.assignment[v] = it->second;
    p.communities[it->second].push_back(static_cast<VertexId>(v));
  }
  return p;
}

double modularity(const WeightedGraph& graph, std::span<const CommunityId> assignment, double resolution) {
  if (assignment.size() != graph.vertex_count()) throw std::invalid_argument("modularity: assignment size mismatch");
  const double two_w = 2.0 * graph.total_weight();
  if (two_w <= 0.0) return 0.0;

  CommunityId max_id = 0;
  for (const auto c : assignment) max_id = std::max(max_id, c);
  std::vector<double> internal(assignment.empty() ? 0 : max_id + 1, 0.0);
  std::vector<double> total(internal.size(), 0.0);
  for (const auto& e : graph.edges()) {
    total[assignment[e.a]] += e.weight;
    total[assignment[e.b]] += e.weight;
    if (assignment[e.a] == assignment[e.b]) internal[assignment[e.a]] += e.weight;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    q += 2.0 * internal[c] - resolution * total[c] * total[c] / two_w;
  }
  return q / two_w;
}

double modularity(const MutualContactsGraph& graph, const CommunityPartition& partition, double resolution) {
  return modularity(graph.topology, partition.assignment, resolution);
}

CommunityPartition louvain(const WeightedGraph& graph, double resolution, LouvainTrace* trace) {
  if (!(resolution > 0.0)) throw std::invalid_argument("louvain: resolution must be positive");
  const auto n = graph.vertex_count();
  std::vector<std::uint32_t> node_of(n);
  for (std::uint32_t v = 0; v < n; ++v) node_of[v] = v;

  if (trace) {
    trace->pass_modularity.clear();
    trace->pass_modularity.push_back(modularity(graph, node_of, resolution));
  }

  const double two_m = 2.0 * graph.total_weight();
  if (two_m > 0.0) {
    Level level = level_from_graph(graph);
    std::vector<std::uint32_t> community(level.size());
    while (move_nodes(level, resolution, two_m, community)) {
      level = aggregate(level, community);
      for (auto& node : node_of) node = community[node];
      if (trace) trace->pass_modularity.push_back(modularity(graph, node_of, resolution));
      community.assign(level.size(), 0);
    }
  }

  auto partition = make_partition(node_of);
  partition.modularity = modularity(graph, partition.assignment, resolution);
  return partition;
}

CommunityPartition louvain(const MutualContactsGraph& graph, double resolution, LouvainTrace* trace) {
  return louvain(graph.topology, resolution, trace);
}

void write_partition_dump(std::ostream& out, const CommunityPartition& partition) {
  for (std::size_t v = 0; v < partition.assignment.size(); ++v) out << v << ',' << partition.assignment[v] << '\n';
}

}  // namespace mcdetect
