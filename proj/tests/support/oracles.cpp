#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <limits>

namespace mcdetect::oracle {

namespace {

bool edge_between(const std::vector<WeightedEdge>& edges, VertexId x, VertexId y, double* weight = nullptr) {
  for (const auto& e : edges) {
    if ((e.a == x && e.b == y) || (e.a == y && e.b == x)) {
      if (weight) *weight = e.weight;
      return true;
    }
  }
  return false;
}

}  // namespace

double ddr(const std::vector<Ipv4Address>& contacts) {
  std::set<std::string> distinct;
  std::set<std::string> prefixes;
  for (const auto c : contacts) {
    const auto text = c.to_string();
    distinct.insert(text);
    const auto first_dot = text.find('.');
    const auto second_dot = text.find('.', first_dot + 1);
    prefixes.insert(text.substr(0, second_dot));
  }
  return static_cast<double>(prefixes.size()) / static_cast<double>(distinct.size());
}

double mcr(const std::vector<Ipv4Address>& a, const std::vector<Ipv4Address>& b) {
  const std::set<Ipv4Address> sa(a.begin(), a.end());
  const std::set<Ipv4Address> sb(b.begin(), b.end());
  std::vector<Ipv4Address> inter;
  std::vector<Ipv4Address> uni;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
  if (uni.empty()) return 0.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

double avgddr(const std::vector<double>& ddrs) {
  double sum = 0.0;
  for (const auto d : ddrs) sum += d;
  return sum / static_cast<double>(ddrs.size());
}

double avgmcr(const std::vector<VertexId>& members, const std::vector<WeightedEdge>& edges) {
  const auto n = members.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = 0.0;
      if (edge_between(edges, members[i], members[j], &w)) sum += w;
    }
  }
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

Pairs enumerate_pairs(const std::vector<int>& botnet, const std::vector<int>& community,
                      const std::vector<int>& legit_community) {
  Pairs out;
  out.p = botnet.size();
  out.q = legit_community.size();
  for (std::size_t i = 0; i < botnet.size(); ++i) {
    for (std::size_t j = i + 1; j < botnet.size(); ++j) {
      const bool same_x = botnet[i] == botnet[j];
      const bool same_y = community[i] == community[j];
      if (same_x && same_y) ++out.a;
      if (same_x && !same_y) ++out.b;
      if (!same_x && same_y) ++out.c;
    }
    for (const auto lc : legit_community) {
      if (lc != community[i]) ++out.d;
    }
  }
  return out;
}

double modularity(std::size_t n, const std::vector<WeightedEdge>& edges, const std::vector<int>& labels,
                  double resolution) {
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (const auto& e : edges) {
    adj[e.a][e.b] += e.weight;
    adj[e.b][e.a] += e.weight;
  }
  std::vector<double> k(n, 0.0);
  double two_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += adj[i][j];
    two_w += k[i];
  }
  if (two_w == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] == labels[j]) q += adj[i][j] - resolution * k[i] * k[j] / two_w;
    }
  }
  return q / two_w;
}

std::pair<double, std::vector<int>> best_partition(std::size_t n, const std::vector<WeightedEdge>& edges,
                                                   double resolution) {
  std::vector<int> labels(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_labels;
  // Restricted growth strings enumerate each set partition exactly once.
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      const double q = modularity(n, edges, labels, resolution);
      if (q > best) {
        best = q;
        best_labels = labels;
      }
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      labels[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  if (n == 0) return {0.0, {}};
  labels[0] = 0;
  rec(1, 0);
  return {best, best_labels};
}

bool is_clique(const std::vector<VertexId>& vertices, const std::vector<WeightedEdge>& edges) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if (!edge_between(edges, vertices[i], vertices[j])) return false;
    }
  }
  return true;
}

std::vector<VertexId> maximum_clique(const std::vector<VertexId>& vertices, const std::vector<WeightedEdge>& edges) {
  auto sorted = vertices;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) adj[i][j] = i != j && edge_between(edges, sorted[i], sorted[j]);
  }
  std::vector<VertexId> best;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) members.push_back(i);
    }
    if (members.size() < best.size()) continue;
    bool clique = true;
    for (std::size_t x = 0; x < members.size() && clique; ++x) {
      for (std::size_t y = x + 1; y < members.size() && clique; ++y) clique = adj[members[x]][members[y]];
    }
    if (!clique) continue;
    std::vector<VertexId> subset;
    for (const auto i : members) subset.push_back(sorted[i]);
    if (subset.size() > best.size() || subset < best) best = subset;
  }
  return best;
}

}  // namespace mcdetect::oracle
