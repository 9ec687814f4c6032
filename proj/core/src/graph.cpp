#include "mcdetect/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mcdetect {

WeightedGraph::WeightedGraph(std::size_t vertex_count, std::vector<WeightedEdge> edges)
    : edges_(std::move(edges)), adjacency_(vertex_count) {
  for (auto& e : edges_) {
    if (e.a == e.b) throw std::invalid_argument("self-loop on vertex " + std::to_string(e.a));
    if (e.a >= vertex_count || e.b >= vertex_count) throw std::invalid_argument("edge endpoint out of range");
    if (!(e.weight >= 0.0)) throw std::invalid_argument("negative or NaN edge weight");
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw std::invalid_argument("duplicate edge " + std::to_string(edges_[i].a) + "-" + std::to_string(edges_[i].b));
    }
  }
  for (const auto& e : edges_) {
    adjacency_[e.a].push_back({e.b, e.weight});
    adjacency_[e.b].push_back({e.a, e.weight});
    total_weight_ += e.weight;
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.id < y.id; });
  }
}

std::optional<double> WeightedGraph::weight(VertexId a, VertexId b) const {
  if (a >= adjacency_.size() || b >= adjacency_.size()) return std::nullopt;
  const auto& list = adjacency_[a];
  const auto it = std::lower_bound(list.begin(), list.end(), b, [](const Neighbor& n, VertexId id) { return n.id < id; });
  if (it == list.end() || it->id != b) return std::nullopt;
  return it->weight;
}

double WeightedGraph::strength(VertexId v) const {
  double s = 0.0;
  for (const auto& n : adjacency_[v]) s += n.weight;
  return s;
}

}  // namespace mcdetect
