#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mcdetect/flow_model.hpp"

namespace mcdetect {

/// Host -> group index. Used both for the ground-truth botnet grouping and
/// for detected host communities.
using HostGrouping = std::map<Ipv4Address, std::uint32_t>;

/// Converts a list of host sets into a HostGrouping (set i -> index i).
HostGrouping grouping_from_sets(const std::vector<std::vector<Ipv4Address>>& sets);

/// Pair counts over bots (a, b, c) and bot-legit pairs (d out of p * q).
struct PairCounts {
  std::uint64_t a = 0;  // same botnet, same community
  std::uint64_t b = 0;  // same botnet, different communities
  std::uint64_t c = 0;  // different botnets, same community
  std::uint64_t d = 0;  // bot-legit pairs in different communities
  std::uint64_t p = 0;  // bots
  std::uint64_t q = 0;  // legit hosts
};

/// Bots are the keys of `botnets`. Hosts missing from `communities` each
/// count as their own singleton community.
PairCounts count_pairs(const HostGrouping& botnets, const std::set<Ipv4Address>& legits,
                       const HostGrouping& communities);

double bsi(const HostGrouping& botnets, const HostGrouping& communities);
double bai(const HostGrouping& botnets, const HostGrouping& communities);
/// 1.0 when there are no bots or no legit hosts.
double blsi(const std::set<Ipv4Address>& bots, const std::set<Ipv4Address>& legits, const HostGrouping& communities);

struct CommunityIndices {
  PairCounts counts;
  double bsi = 1.0;
  double bai = 1.0;
  double blsi = 1.0;
  std::vector<std::string> warnings;
};

CommunityIndices community_indices(const LabelMap& labels, const HostGrouping& communities);

struct GroupRate {
  std::size_t detected = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(total); }
};

struct DetectionMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t negatives = 0;  // labeled non-bot hosts
  double precision = 1.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::map<std::string, GroupRate> per_botnet;
};

/// Precision is 1.0 for an empty report; recall is 0 without labeled bots.
/// Reported hosts missing from `labels` count as false positives.
DetectionMetrics detection_metrics(const std::set<Ipv4Address>& reported, const LabelMap& labels);

/// Botnet grouping derived from bot labels, botnets indexed in name order.
HostGrouping botnet_grouping(const LabelMap& labels);

}  // namespace mcdetect
