#include "mcdetect/botnet_detect.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "mcdetect/parallel.hpp"

namespace mcdetect {

namespace {

// Fixed-width-free bitset over the local vertex indices of one subgraph.
class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
    return r;
  }
  Bits operator|(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= o.words_[k];
    return r;
  }
  Bits without(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~o.words_[k];
    return r;
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      auto w = words_[k];
      while (w) {
        const auto bit = static_cast<std::size_t>(__builtin_ctzll(w));
        fn(k * 64 + bit);
        w &= w - 1;
      }
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Bron-Kerbosch with Tomita pivoting, keeping the best maximal clique under
// (larger size, then lexicographically smaller sorted local indices). Local
// indices are assigned in ascending global id order, so the local order
// matches the global one.
class MaxCliqueSearch {
 public:
  explicit MaxCliqueSearch(std::vector<Bits> adjacency) : adj_(std::move(adjacency)) {}

  std::vector<std::size_t> run() {
    const auto n = adj_.size();
    Bits p(n);
    for (std::size_t i = 0; i < n; ++i) p.set(i);
    std::vector<std::size_t> r;
    expand(r, p, Bits(n));
    return best_;
  }

 private:
  void expand(std::vector<std::size_t>& r, Bits p, Bits x) {
    if (p.none()) {
      if (x.none()) consider(r);
      return;
    }
    if (r.size() + p.count() < best_.size()) return;

    const auto px = p | x;
    std::size_t pivot = 0;
    std::size_t pivot_degree = 0;
    bool have_pivot = false;
    px.for_each([&](std::size_t u) {
      const auto d = (p & adj_[u]).count();
      if (!have_pivot || d > pivot_degree) {
        pivot = u;
        pivot_degree = d;
        have_pivot = true;
      }
    });

    const auto candidates = p.without(adj_[pivot]);
    candidates.for_each([&](std::size_t v) {
      r.push_back(v);
      expand(r, p & adj_[v], x & adj_[v]);
      r.pop_back();
      p.reset(v);
      x.set(v);
    });
  }

  void consider(const std::vector<std::size_t>& r) {
    auto sorted = r;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() > best_.size() || (sorted.size() == best_.size() && sorted < best_)) best_ = std::move(sorted);
  }

  std::vector<Bits> adj_;
  std::vector<std::size_t> best_;
};

}  // namespace

double avgddr(std::span<const VertexId> members, const MutualContactsGraph& graph) {
  if (members.empty()) throw std::invalid_argument("avgddr: empty community");
  double sum = 0.0;
  for (const auto v : members) sum += graph.vertices.at(v).ddr;
  return sum / static_cast<double>(members.size());
}

double avgmcr(std::span<const VertexId> members, const WeightedGraph& graph) {
  if (members.empty()) throw std::invalid_argument("avgmcr: empty community");
  if (members.size() < 2) return 0.0;
  std::vector<VertexId> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (const auto v : sorted) {
    for (const auto& nb : graph.neighbors(v)) {
      if (nb.id > v && std::binary_search(sorted.begin(), sorted.end(), nb.id)) sum += nb.weight;
    }
  }
  const double n = static_cast<double>(sorted.size());
  return 2.0 * sum / (n * (n - 1.0));
}

double avgmcr(std::span<const VertexId> members, const MutualContactsGraph& graph) {
  return avgmcr(members, graph.topology);
}

std::vector<CommunityScore> score_communities(const MutualContactsGraph& graph, const CommunityPartition& partition) {
  std::vector<CommunityScore> scores;
  scores.reserve(partition.communities.size());
  for (CommunityId c = 0; c < partition.communities.size(); ++c) {
    const auto& members = partition.communities[c];
    scores.push_back({c, avgddr(members, graph), avgmcr(members, graph), members.size(), false});
  }
  return scores;
}

std::set<CommunityId> filter_botnet_communities(std::span<const CommunityScore> scores, double theta_avgddr,
                                                double theta_avgmcr) {
  std::set<CommunityId> selected;
  for (const auto& s : scores) {
    if (s.avgddr >= theta_avgddr && s.avgmcr >= theta_avgmcr) selected.insert(s.community_id);
  }
  return selected;
}

std::vector<VertexId> maximum_clique(const WeightedGraph& graph, std::span<const VertexId> vertices) {
  std::vector<VertexId> local(vertices.begin(), vertices.end());
  std::sort(local.begin(), local.end());
  local.erase(std::unique(local.begin(), local.end()), local.end());
  if (local.empty()) return {};

  std::vector<Bits> adjacency(local.size(), Bits(local.size()));
  for (std::size_t i = 0; i < local.size(); ++i) {
    for (const auto& nb : graph.neighbors(local[i])) {
      const auto it = std::lower_bound(local.begin(), local.end(), nb.id);
      if (it != local.end() && *it == nb.id) adjacency[i].set(static_cast<std::size_t>(it - local.begin()));
    }
  }
  const auto best = MaxCliqueSearch(std::move(adjacency)).run();
  std::vector<VertexId> clique;
  clique.reserve(best.size());
  for (const auto i : best) clique.push_back(local[i]);
  return clique;
}

std::vector<std::vector<VertexId>> max_clique_iterative(const WeightedGraph& graph, std::span<const VertexId> vertices,
                                                        std::size_t min_size) {
  std::vector<std::vector<VertexId>> cliques;
  std::vector<VertexId> remaining(vertices.begin(), vertices.end());
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());
  while (remaining.size() >= min_size) {
    auto clique = maximum_clique(graph, remaining);
    if (clique.size() < min_size) break;
    std::vector<VertexId> rest;
    std::set_difference(remaining.begin(), remaining.end(), clique.begin(), clique.end(), std::back_inserter(rest));
    remaining = std::move(rest);
    cliques.push_back(std::move(clique));
  }
  return cliques;
}

DetectionReport detect(const MutualContactsGraph& graph, const CommunityPartition& partition, double theta_avgddr,
                       double theta_avgmcr, std::size_t jobs) {
  if (partition.assignment.size() != graph.vertex_count()) {
    throw std::invalid_argument("detect: partition does not match graph");
  }
  DetectionReport report;
  report.thresholds.theta_avgddr = theta_avgddr;
  report.thresholds.theta_avgmcr = theta_avgmcr;
  report.scores = score_communities(graph, partition);
  report.botnet_communities = filter_botnet_communities(report.scores, theta_avgddr, theta_avgmcr);
  for (auto& s : report.scores) s.selected = report.botnet_communities.contains(s.community_id);

  const std::vector<CommunityId> candidates(report.botnet_communities.begin(), report.botnet_communities.end());
  std::vector<std::vector<std::vector<VertexId>>> found(candidates.size());
  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    const auto& members = partition.communities[candidates[i]];
    if (members.size() >= 3) found[i] = max_clique_iterative(graph.topology, members, 3);
  });

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (auto& clique : found[i]) {
      for (const auto v : clique) {
        report.bot_clusters.insert(v);
        report.bot_hosts.insert(graph.vertices[v].key.src);
      }
      report.cliques.push_back({candidates[i], std::move(clique)});
    }
  }
  return report;
}

std::map<Ipv4Address, CommunityId> host_communities(const MutualContactsGraph& graph,
                                                    const CommunityPartition& partition,
                                                    const DetectionReport& report) {
  std::map<Ipv4Address, CommunityId> from_cliques;
  std::map<Ipv4Address, CommunityId> any;
  for (const auto& v : graph.vertices) {
    const auto c = partition.assignment[v.id];
    auto& target = report.bot_clusters.contains(v.id) ? from_cliques : any;
    const auto [it, inserted] = target.emplace(v.key.src, c);
    if (!inserted) it->second = std::min(it->second, c);
  }
  for (const auto& [host, c] : from_cliques) any[host] = c;
  return any;
}

}  // namespace mcdetect
