#include "mcdetect/metrics.hpp"

#include <algorithm>

namespace mcdetect {

namespace {

std::uint64_t pairs(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

// Community of every host in `hosts`, with fresh singleton ids for hosts the
// grouping does not cover.
std::map<Ipv4Address, std::uint64_t> resolve(const std::set<Ipv4Address>& hosts, const HostGrouping& communities) {
  std::uint64_t next = 0;
  for (const auto& [host, c] : communities) next = std::max<std::uint64_t>(next, std::uint64_t{c} + 1);
  std::map<Ipv4Address, std::uint64_t> out;
  for (const auto h : hosts) {
    const auto it = communities.find(h);
    out[h] = it != communities.end() ? it->second : next++;
  }
  return out;
}

}  // namespace

HostGrouping grouping_from_sets(const std::vector<std::vector<Ipv4Address>>& sets) {
  HostGrouping g;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const auto h : sets[i]) g[h] = static_cast<std::uint32_t>(i);
  }
  return g;
}

PairCounts count_pairs(const HostGrouping& botnets, const std::set<Ipv4Address>& legits,
                       const HostGrouping& communities) {
  std::set<Ipv4Address> bots;
  for (const auto& [h, g] : botnets) bots.insert(h);
  std::set<Ipv4Address> everyone = bots;
  everyone.insert(legits.begin(), legits.end());
  const auto community_of = resolve(everyone, communities);

  // Contingency sums: a = sum C(n_xy, 2); same-botnet and same-community
  // totals give b and c.
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint64_t> joint;
  std::map<std::uint32_t, std::uint64_t> per_botnet;
  std::map<std::uint64_t, std::uint64_t> bots_per_community;
  std::map<std::uint64_t, std::uint64_t> legits_per_community;
  for (const auto& [h, g] : botnets) {
    const auto y = community_of.at(h);
    ++joint[{g, y}];
    ++per_botnet[g];
    ++bots_per_community[y];
  }
  for (const auto h : legits) {
    if (!bots.contains(h)) ++legits_per_community[community_of.at(h)];
  }

  PairCounts pc;
  for (const auto& [key, n] : joint) pc.a += pairs(n);
  std::uint64_t same_botnet = 0;
  for (const auto& [g, n] : per_botnet) same_botnet += pairs(n);
  std::uint64_t same_community = 0;
  for (const auto& [y, n] : bots_per_community) same_community += pairs(n);
  pc.b = same_botnet - pc.a;
  pc.c = same_community - pc.a;

  pc.p = bots.size();
  for (const auto& [y, n] : legits_per_community) pc.q += n;
  std::uint64_t together = 0;
  for (const auto& [y, n] : legits_per_community) {
    const auto it = bots_per_community.find(y);
    if (it != bots_per_community.end()) together += it->second * n;
  }
  pc.d = pc.p * pc.q - together;
  return pc;
}

double bsi(const HostGrouping& botnets, const HostGrouping& communities) {
  const auto pc = count_pairs(botnets, {}, communities);
  return pc.a + pc.c == 0 ? 1.0 : static_cast<double>(pc.a) / static_cast<double>(pc.a + pc.c);
}

double bai(const HostGrouping& botnets, const HostGrouping& communities) {
  const auto pc = count_pairs(botnets, {}, communities);
  return pc.a + pc.b == 0 ? 1.0 : static_cast<double>(pc.a) / static_cast<double>(pc.a + pc.b);
}

double blsi(const std::set<Ipv4Address>& bots, const std::set<Ipv4Address>& legits, const HostGrouping& communities) {
  HostGrouping as_one_botnet;
  for (const auto h : bots) as_one_botnet[h] = 0;
  const auto pc = count_pairs(as_one_botnet, legits, communities);
  if (pc.p == 0 || pc.q == 0) return 1.0;
  return static_cast<double>(pc.d) / static_cast<double>(pc.p * pc.q);
}

HostGrouping botnet_grouping(const LabelMap& labels) {
  std::map<std::string, std::uint32_t> index;
  for (const auto& [h, label] : labels) {
    if (label.role == HostRole::bot) index.emplace(label.group, 0);
  }
  std::uint32_t next = 0;
  for (auto& [name, i] : index) i = next++;
  HostGrouping g;
  for (const auto& [h, label] : labels) {
    if (label.role == HostRole::bot) g[h] = index.at(label.group);
  }
  return g;
}

CommunityIndices community_indices(const LabelMap& labels, const HostGrouping& communities) {
  const auto botnets = botnet_grouping(labels);
  std::set<Ipv4Address> legits;
  for (const auto& [h, label] : labels) {
    if (label.role == HostRole::legit_p2p) legits.insert(h);
  }
  CommunityIndices out;
  out.counts = count_pairs(botnets, legits, communities);
  const auto& pc = out.counts;
  out.bsi = pc.a + pc.c == 0 ? 1.0 : static_cast<double>(pc.a) / static_cast<double>(pc.a + pc.c);
  out.bai = pc.a + pc.b == 0 ? 1.0 : static_cast<double>(pc.a) / static_cast<double>(pc.a + pc.b);
  if (pc.p == 0 || pc.q == 0) {
    out.blsi = 1.0;
    out.warnings.push_back("BLSI undefined without both bots and legit hosts; reported as 1.0");
  } else {
    out.blsi = static_cast<double>(pc.d) / static_cast<double>(pc.p * pc.q);
  }
  return out;
}

DetectionMetrics detection_metrics(const std::set<Ipv4Address>& reported, const LabelMap& labels) {
  DetectionMetrics m;
  std::size_t bots = 0;
  for (const auto& [h, label] : labels) {
    if (label.role == HostRole::bot) {
      ++bots;
      auto& rate = m.per_botnet[label.group];
      ++rate.total;
      if (reported.contains(h)) {
        ++rate.detected;
        ++m.tp;
      }
    } else {
      ++m.negatives;
    }
  }
  m.fp = reported.size() - m.tp;
  m.fn = bots - m.tp;
  m.precision = reported.empty() ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(reported.size());
  m.recall = bots == 0 ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(bots);
  m.f_score = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace mcdetect
