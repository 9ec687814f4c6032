#include "mcdetect/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mcdetect {

namespace {

std::vector<Ipv4Address> hosts_with_role(const LabelMap& labels, HostRole role) {
  std::vector<Ipv4Address> out;
  for (const auto& [host, label] : labels) {
    if (label.role == role) out.push_back(host);
  }
  return out;
}

ClusterMap clusters_for(const LabeledDataset& dataset, Injection injection, std::size_t theta_dd) {
  auto clusters = cluster_flows(dataset.flows);
  if (injection == Injection::post_filter) clusters = detect_p2p(clusters, theta_dd);
  return clusters;
}

}  // namespace

LabeledDataset pmmkl(const LabeledDataset& dataset, Rng& rng) {
  const auto bots = hosts_with_role(dataset.labels, HostRole::bot);
  auto legits = hosts_with_role(dataset.labels, HostRole::legit_p2p);
  if (bots.empty()) return dataset;
  if (legits.size() < bots.size()) {
    throw std::invalid_argument("pmmkl: " + std::to_string(bots.size()) + " bots but only " +
                                std::to_string(legits.size()) + " legit P2P hosts");
  }
  rng.shuffle(legits);
  std::map<Ipv4Address, Ipv4Address> remap;
  for (std::size_t i = 0; i < bots.size(); ++i) remap.emplace(legits[i], bots[i]);

  LabeledDataset out;
  out.flows.reserve(dataset.flows.size());
  for (auto f : dataset.flows) {
    if (const auto it = remap.find(f.src); it != remap.end()) f.src = it->second;
    out.flows.push_back(f);
  }
  out.labels = dataset.labels;
  out.internal_hosts = dataset.internal_hosts;
  for (const auto& [legit, bot] : remap) {
    out.labels.erase(legit);
    out.internal_hosts.erase(legit);
  }
  return out;
}

std::uint64_t padded_count(double gamma, std::uint64_t n) {
  if (gamma < 0.0) throw std::invalid_argument("padded_count: negative gamma");
  const double product = gamma * static_cast<double>(n);
  const double nearest = std::round(product);
  if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, product)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(product));
}

PaddingPlan plan_ammkl(const ClusterMap& clusters, const LabelMap& labels, double gamma,
                       const std::vector<Ipv4Address>& peer_pool, Rng& rng) {
  if (gamma < 0.0) throw std::invalid_argument("ammkl: gamma must be >= 0");
  PaddingPlan plan;
  if (gamma == 0.0) return plan;

  auto is_bot = [&](Ipv4Address host) {
    const auto it = labels.find(host);
    return it != labels.end() && it->second.role == HostRole::bot;
  };

  std::set<Ipv4Address> bot_contacts;
  std::size_t demand = 0;
  for (const auto& [key, cluster] : clusters) {
    if (!is_bot(key.src)) continue;
    bot_contacts.insert(cluster.contacts.begin(), cluster.contacts.end());
    demand += padded_count(gamma, cluster.contacts.size());
  }
  for (const auto peer : peer_pool) {
    if (bot_contacts.contains(peer)) {
      throw std::invalid_argument("ammkl: peer pool overlaps existing bot contact " + peer.to_string());
    }
  }
  if (demand > peer_pool.size()) {
    throw std::invalid_argument("ammkl: peer pool holds " + std::to_string(peer_pool.size()) + " addresses, " +
                                std::to_string(demand) + " needed");
  }

  auto shuffled = peer_pool;
  rng.shuffle(shuffled);
  std::size_t next = 0;
  for (const auto& [key, cluster] : clusters) {
    if (!is_bot(key.src)) continue;
    const auto count = padded_count(gamma, cluster.contacts.size());
    if (count == 0) continue;
    auto& pads = plan[key];
    pads.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(next),
                shuffled.begin() + static_cast<std::ptrdiff_t>(next + count));
    next += count;
  }
  return plan;
}

void apply_padding(ClusterMap& clusters, const PaddingPlan& plan) {
  for (const auto& [key, pads] : plan) {
    auto& c = clusters.at(key);
    c.contacts.insert(c.contacts.end(), pads.begin(), pads.end());
    std::sort(c.contacts.begin(), c.contacts.end());
    c.contacts.erase(std::unique(c.contacts.begin(), c.contacts.end()), c.contacts.end());
    c.dd = destination_diversity(c.contacts);
    c.flow_count += pads.size();
  }
}

LabeledDataset ammkl(const LabeledDataset& dataset, double gamma, const std::vector<Ipv4Address>& peer_pool, Rng& rng,
                     Injection injection, std::size_t theta_dd) {
  const auto plan = plan_ammkl(clusters_for(dataset, injection, theta_dd), dataset.labels, gamma, peer_pool, rng);
  LabeledDataset out = dataset;
  for (const auto& [key, pads] : plan) {
    for (const auto peer : pads) out.flows.push_back({key.src, peer, key.proto, key.bpp_out, key.bpp_in});
  }
  return out;
}

std::size_t ammkl_pool_demand(const LabeledDataset& dataset, double gamma, Injection injection, std::size_t theta_dd) {
  std::size_t demand = 0;
  for (const auto& [key, cluster] : clusters_for(dataset, injection, theta_dd)) {
    const auto it = dataset.labels.find(key.src);
    if (it != dataset.labels.end() && it->second.role == HostRole::bot) {
      demand += padded_count(gamma, cluster.contacts.size());
    }
  }
  return demand;
}

std::vector<Ipv4Address> fresh_peer_pool(const LabeledDataset& dataset, std::size_t count, Rng& rng) {
  ExternalSpace space;
  for (const auto& f : dataset.flows) {
    space.mark_used(f.src);
    space.mark_used(f.dst);
  }
  for (const auto& [host, label] : dataset.labels) space.mark_used(host);
  std::vector<Ipv4Address> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.push_back(space.fresh_address(rng));
  return pool;
}

EvasionEffort evasion_effort(std::uint64_t clusters_per_host, std::uint64_t peers_per_cluster, double gamma) {
  EvasionEffort e;
  e.peers_per_host = clusters_per_host * peers_per_cluster;
  e.extra_peers = padded_count(gamma, e.peers_per_host);
  return e;
}

}  // namespace mcdetect
