#include "mcdetect/pipeline.hpp"

#include <nlohmann/json.hpp>

namespace mcdetect {

namespace {

using nlohmann::ordered_json;

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

ordered_json flow_key_json(const FlowKey& key) {
  return ordered_json{{"src", key.src.to_string()},
                      {"proto", std::string(to_string(key.proto))},
                      {"bpp_out", key.bpp_out},
                      {"bpp_in", key.bpp_in}};
}

}  // namespace

void validate_thresholds(const DetectionThresholds& t) {
  if (t.theta_dd < 1) throw std::invalid_argument("theta_dd must be >= 1");
  if (!(t.theta_mcr >= 0.0 && t.theta_mcr < 1.0)) throw std::invalid_argument("theta_mcr must be in [0, 1)");
  if (!(t.theta_avgddr >= 0.0 && t.theta_avgddr <= 1.0)) throw std::invalid_argument("theta_avgddr must be in [0, 1]");
  if (!(t.theta_avgmcr >= 0.0 && t.theta_avgmcr <= 1.0)) throw std::invalid_argument("theta_avgmcr must be in [0, 1]");
  if (!(t.resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
}

PipelineResult run_pipeline(const ClusterMap& clusters, const DetectionThresholds& thresholds, std::size_t jobs,
                            const PostFilterHook& hook) {
  in_stage("config", [&] {
    validate_thresholds(thresholds);
    return 0;
  });
  PipelineResult r;
  r.cluster_count = clusters.size();
  for (const auto& [key, c] : clusters) r.flow_count += c.flow_count;
  r.p2p_clusters = in_stage("p2p_filter", [&] {
    auto retained = detect_p2p(clusters, thresholds.theta_dd);
    if (hook) hook(retained);
    return retained;
  });
  r.graph = in_stage("mcg", [&] { return build_mcg(r.p2p_clusters, thresholds.theta_mcr, jobs); });
  r.partition = in_stage("community", [&] { return louvain(r.graph, thresholds.resolution); });
  r.report = in_stage("detect", [&] {
    auto report = detect(r.graph, r.partition, thresholds.theta_avgddr, thresholds.theta_avgmcr, jobs);
    report.thresholds = thresholds;
    return report;
  });
  return r;
}

PipelineResult run_pipeline(std::span<const FlowRecord> flows, const DetectionThresholds& thresholds,
                            std::size_t jobs, const PostFilterHook& hook) {
  const auto clusters = in_stage("p2p_filter", [&] { return cluster_flows_partitioned(flows, std::max<std::size_t>(1, jobs), jobs); });
  auto r = run_pipeline(clusters, thresholds, jobs, hook);
  r.flow_count = flows.size();
  return r;
}

Evaluation evaluate(const PipelineResult& result, const LabelMap& labels) {
  Evaluation e;
  e.detection = detection_metrics(result.report.bot_hosts, labels);
  HostGrouping communities;
  for (const auto& [host, c] : host_communities(result.graph, result.partition, result.report)) communities[host] = c;
  e.indices = community_indices(labels, communities);
  return e;
}

std::string report_to_json(const PipelineResult& result, const std::optional<Evaluation>& evaluation) {
  const auto& rep = result.report;
  const auto& t = rep.thresholds;
  ordered_json j;
  j["thresholds"] = {{"theta_dd", t.theta_dd},
                     {"theta_mcr", t.theta_mcr},
                     {"theta_avgddr", t.theta_avgddr},
                     {"theta_avgmcr", t.theta_avgmcr},
                     {"resolution", t.resolution}};
  j["summary"] = {{"flows", result.flow_count},
                  {"clusters", result.cluster_count},
                  {"p2p_clusters", result.p2p_clusters.size()},
                  {"mcg_vertices", result.graph.vertex_count()},
                  {"mcg_edges", result.graph.edges().size()},
                  {"communities", result.partition.size()},
                  {"modularity", result.partition.modularity}};

  ordered_json communities = ordered_json::array();
  for (const auto& s : rep.scores) {
    communities.push_back({{"id", s.community_id},
                           {"size", s.size},
                           {"avgddr", s.avgddr},
                           {"avgmcr", s.avgmcr},
                           {"selected", s.selected}});
  }
  j["communities"] = std::move(communities);

  ordered_json cliques = ordered_json::array();
  for (const auto& c : rep.cliques) cliques.push_back({{"community", c.community_id}, {"vertices", c.vertices}});
  j["cliques"] = std::move(cliques);

  ordered_json bot_clusters = ordered_json::array();
  for (const auto v : rep.bot_clusters) {
    ordered_json entry = {{"id", v}};
    const auto key = flow_key_json(result.graph.vertices[v].key);
    for (const auto& [k, value] : key.items()) entry[k] = value;
    bot_clusters.push_back(std::move(entry));
  }
  j["bot_clusters"] = std::move(bot_clusters);

  ordered_json hosts = ordered_json::array();
  for (const auto h : rep.bot_hosts) hosts.push_back(h.to_string());
  j["bot_hosts"] = std::move(hosts);

  if (evaluation) {
    const auto& d = evaluation->detection;
    const auto& ix = evaluation->indices;
    ordered_json per_botnet = ordered_json::object();
    for (const auto& [name, rate] : d.per_botnet) {
      per_botnet[name] = {{"detected", rate.detected}, {"total", rate.total}, {"rate", rate.rate()}};
    }
    j["metrics"] = {{"precision", d.precision}, {"recall", d.recall}, {"f_score", d.f_score},
                    {"tp", d.tp},               {"fp", d.fp},         {"fn", d.fn},
                    {"negatives", d.negatives}, {"bsi", ix.bsi},      {"bai", ix.bai},
                    {"blsi", ix.blsi},          {"per_botnet", per_botnet}};
    if (!ix.warnings.empty()) j["metrics"]["warnings"] = ix.warnings;
  }
  return j.dump(2) + "\n";
}

}  // namespace mcdetect
