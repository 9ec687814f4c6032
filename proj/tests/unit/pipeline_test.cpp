#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "mcdetect/pipeline.hpp"
#include "mcdetect/synthgen.hpp"

namespace mcdetect {
namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.n_internal = 150;
  c.n_bots_per_botnet = {5, 3};
  c.n_legit_p2p = 10;
  c.external_pool = 6000;
  return c;
}

TEST(Pipeline, ReportsExactlyPlantedBots) {
  const auto d = generate_dataset(small_config());
  const auto result = run_pipeline(d.flows, DetectionThresholds{});
  const auto eval = evaluate(result, d.labels);
  EXPECT_EQ(eval.detection.recall, 1.0);
  EXPECT_EQ(eval.detection.fp, 0u);
  EXPECT_EQ(eval.detection.tp, 8u);
  EXPECT_EQ(eval.indices.bsi, 1.0);
  EXPECT_EQ(eval.indices.bai, 1.0);
  EXPECT_EQ(eval.indices.blsi, 1.0);
}

TEST(Pipeline, NoP2pFlowsGivesEmptyReport) {
  const std::vector<FlowRecord> flows = {{Ipv4Address(10, 0, 0, 1), Ipv4Address(8, 8, 8, 8), Protocol::udp, 70, 90}};
  const auto result = run_pipeline(flows, DetectionThresholds{});
  EXPECT_EQ(result.flow_count, 1u);
  EXPECT_EQ(result.cluster_count, 1u);
  EXPECT_TRUE(result.p2p_clusters.empty());
  EXPECT_TRUE(result.report.bot_hosts.empty());
  const auto json = nlohmann::json::parse(report_to_json(result));
  EXPECT_TRUE(json["bot_hosts"].empty());
}

TEST(Pipeline, ThresholdValidationNamesStage) {
  DetectionThresholds t;
  t.theta_dd = 0;
  try {
    run_pipeline(std::vector<FlowRecord>{}, t);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }
  t = DetectionThresholds{};
  t.theta_avgmcr = 1.5;
  EXPECT_THROW(validate_thresholds(t), std::invalid_argument);
  t = DetectionThresholds{};
  t.resolution = 0.0;
  EXPECT_THROW(validate_thresholds(t), std::invalid_argument);
}

TEST(Pipeline, JobsAndPartitionsDoNotChangeOutput) {
  const auto d = generate_dataset(small_config());
  const auto one = report_to_json(run_pipeline(d.flows, DetectionThresholds{}, 1));
  const auto many = report_to_json(run_pipeline(d.flows, DetectionThresholds{}, 8));
  EXPECT_EQ(one, many);
}

TEST(Pipeline, ReportJsonShape) {
  const auto d = generate_dataset(small_config());
  const auto result = run_pipeline(d.flows, DetectionThresholds{});
  const auto json = nlohmann::json::parse(report_to_json(result, evaluate(result, d.labels)));
  for (const char* key : {"thresholds", "summary", "communities", "cliques", "bot_clusters", "bot_hosts", "metrics"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  EXPECT_EQ(json["thresholds"]["theta_dd"], 30);
  EXPECT_EQ(json["bot_hosts"].size(), 8u);
  EXPECT_EQ(json["metrics"]["recall"], 1.0);
  EXPECT_EQ(json["metrics"]["per_botnet"].size(), 2u);
  EXPECT_FALSE(nlohmann::json::parse(report_to_json(result)).contains("metrics"));
}

TEST(Pipeline, HookSeesRetainedClusters) {
  const auto d = generate_dataset(small_config());
  std::size_t seen = 0;
  const auto result = run_pipeline(d.flows, DetectionThresholds{}, 1, [&](ClusterMap& c) { seen = c.size(); });
  EXPECT_EQ(seen, result.p2p_clusters.size());
  EXPECT_GT(seen, 0u);
}

}  // namespace
}  // namespace mcdetect
