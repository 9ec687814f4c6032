#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mcdetect/p2p_filter.hpp"
#include "mcdetect/rng.hpp"
#include "mcdetect/synthgen.hpp"

namespace mcdetect {

/// Overlays bot traffic onto legitimate P2P hosts: each bot host absorbs the
/// flows of one distinct, uniformly chosen legit host, whose label is dropped.
/// Identity when there are no bots. Throws std::invalid_argument when there
/// are fewer legit hosts than bots.
LabeledDataset pmmkl(const LabeledDataset& dataset, Rng& rng);

/// ceil(gamma * n), treating products within 1e-9 of an integer as exact.
std::uint64_t padded_count(double gamma, std::uint64_t n);

enum class Injection { pre_filter, post_filter };

/// Extra peers per padded cluster, in cluster-key order.
using PaddingPlan = std::map<FlowKey, std::vector<Ipv4Address>>;

/// For every cluster owned by a bot host, ceil(gamma * n) peers drawn from
/// `peer_pool` without replacement (pads are disjoint across clusters).
/// Throws std::invalid_argument if gamma < 0, the pool overlaps a bot
/// contact, or the pool is too small.
PaddingPlan plan_ammkl(const ClusterMap& clusters, const LabelMap& labels, double gamma,
                       const std::vector<Ipv4Address>& peer_pool, Rng& rng);

/// Adds the planned peers to the clusters in place, keeping contacts sorted
/// and dd current. This is the post-filter hook form of the attack.
void apply_padding(ClusterMap& clusters, const PaddingPlan& plan);

/// Corpus form. With pre_filter injection every bot cluster is padded; with
/// post_filter only bot clusters meeting theta_dd are, which matches padding
/// the retained clusters inside the pipeline exactly.
LabeledDataset ammkl(const LabeledDataset& dataset, double gamma, const std::vector<Ipv4Address>& peer_pool, Rng& rng,
                     Injection injection = Injection::post_filter, std::size_t theta_dd = 30);

/// Number of peers ammkl would draw for this corpus.
std::size_t ammkl_pool_demand(const LabeledDataset& dataset, double gamma, Injection injection, std::size_t theta_dd);

/// `count` external addresses that appear nowhere in `dataset`.
std::vector<Ipv4Address> fresh_peer_pool(const LabeledDataset& dataset, std::size_t count, Rng& rng);

/// Per-host cost of padding every P2P cluster of a host by gamma.
struct EvasionEffort {
  std::uint64_t peers_per_host = 0;
  std::uint64_t extra_peers = 0;
};

EvasionEffort evasion_effort(std::uint64_t clusters_per_host, std::uint64_t peers_per_cluster, double gamma);

}  // namespace mcdetect
