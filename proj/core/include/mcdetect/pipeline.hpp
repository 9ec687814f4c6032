#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "mcdetect/botnet_detect.hpp"
#include "mcdetect/community.hpp"
#include "mcdetect/flow_model.hpp"
#include "mcdetect/mcg.hpp"
#include "mcdetect/metrics.hpp"
#include "mcdetect/p2p_filter.hpp"

namespace mcdetect {

/// Error carrying the pipeline stage that failed: ingest, p2p_filter, mcg,
/// community, detect, report.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Validates threshold ranges; throws std::invalid_argument.
void validate_thresholds(const DetectionThresholds& t);

/// Applied to the retained P2P clusters before graph construction.
using PostFilterHook = std::function<void(ClusterMap&)>;

struct PipelineResult {
  std::size_t flow_count = 0;
  std::size_t cluster_count = 0;
  ClusterMap p2p_clusters;
  MutualContactsGraph graph;
  CommunityPartition partition;
  DetectionReport report;
};

PipelineResult run_pipeline(std::span<const FlowRecord> flows, const DetectionThresholds& thresholds,
                            std::size_t jobs = 1, const PostFilterHook& hook = {});

/// Pipeline over precomputed clusters (skips ingestion and grouping).
PipelineResult run_pipeline(const ClusterMap& clusters, const DetectionThresholds& thresholds, std::size_t jobs = 1,
                            const PostFilterHook& hook = {});

struct Evaluation {
  DetectionMetrics detection;
  CommunityIndices indices;
};

Evaluation evaluate(const PipelineResult& result, const LabelMap& labels);

/// Report JSON with a fixed key order. `evaluation` adds a "metrics" object.
std::string report_to_json(const PipelineResult& result, const std::optional<Evaluation>& evaluation = std::nullopt);

}  // namespace mcdetect
