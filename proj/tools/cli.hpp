#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcdetect/attacks.hpp"
#include "mcdetect/pipeline.hpp"
#include "mcdetect/synthgen.hpp"

namespace mcdetect::cli {

/// Reads theta_dd, theta_mcr, theta_avgddr, theta_avgmcr and resolution from a
/// JSON object on top of `base`. Unknown keys are an error.
DetectionThresholds thresholds_from_json(std::string_view json_text, DetectionThresholds base = {});

struct DetectOptions {
  std::filesystem::path flows;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out = "report.json";
  std::optional<std::filesystem::path> dump_dir;
  DetectionThresholds thresholds;
  std::size_t jobs = 1;
};

struct DetectOutcome {
  PipelineResult result;
  std::optional<Evaluation> evaluation;
};

/// Runs the pipeline and writes the report. Throws StageError.
DetectOutcome run_detect(const DetectOptions& options);

struct GenerateOptions {
  SynthConfig config;
  std::filesystem::path out_dir;
};

LabeledDataset run_generate(const GenerateOptions& options);

enum class AttackType { pmmkl, ammkl };

struct AttackOptions {
  std::filesystem::path in_dir;
  std::filesystem::path out_dir;
  AttackType type = AttackType::pmmkl;
  double gamma = 0.0;
  Injection injection = Injection::post_filter;
  std::size_t theta_dd = 30;
  std::uint64_t seed = kDefaultSeed;
};

LabeledDataset run_attack(const AttackOptions& options);

/// Values per threshold; empty axes take the base value.
struct ThresholdGrid {
  std::vector<std::size_t> theta_dd;
  std::vector<double> theta_mcr;
  std::vector<double> theta_avgddr;
  std::vector<double> theta_avgmcr;
  std::vector<double> resolution;

  /// Cartesian product in axis order above, the last axis varying fastest.
  std::vector<DetectionThresholds> expand(const DetectionThresholds& base) const;
};

ThresholdGrid grid_from_json(std::string_view json_text);

struct SweepRow {
  DetectionThresholds thresholds;
  DetectionMetrics detection;
  CommunityIndices indices;
};

struct SweepOptions {
  std::filesystem::path flows;
  std::filesystem::path labels;
  std::filesystem::path grid;
  std::filesystem::path out = "table.csv";
  DetectionThresholds base;
  std::size_t jobs = 1;
};

std::vector<SweepRow> run_sweep(const SweepOptions& options);

/// Header plus one line per row; per-botnet rate columns follow the threshold columns.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const LabelMap& labels);

/// Command-line entry point. Returns the process exit code: 0 on success,
/// 1 when a stage fails, 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcdetect::cli
