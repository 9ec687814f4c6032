#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mcdetect {

using VertexId = std::uint32_t;

struct WeightedEdge {
  VertexId a = 0;
  VertexId b = 0;
  double weight = 0.0;

  bool operator==(const WeightedEdge&) const = default;
};

struct Neighbor {
  VertexId id = 0;
  double weight = 0.0;
};

/// Undirected simple weighted graph. Edges are stored canonically (a < b),
/// sorted by (a, b); adjacency lists are sorted by neighbor id.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Throws std::invalid_argument on self-loops, duplicate edges,
  /// out-of-range endpoints or negative weights.
  WeightedGraph(std::size_t vertex_count, std::vector<WeightedEdge> edges);

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  std::span<const Neighbor> neighbors(VertexId v) const { return adjacency_[v]; }

  bool has_edge(VertexId a, VertexId b) const { return weight(a, b).has_value(); }
  std::optional<double> weight(VertexId a, VertexId b) const;

  double total_weight() const { return total_weight_; }
  double strength(VertexId v) const;

 private:
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  double total_weight_ = 0.0;
};

}  // namespace mcdetect
