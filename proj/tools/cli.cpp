#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mcdetect/parallel.hpp"

namespace mcdetect::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

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

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

template <typename T>
std::vector<T> axis(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_array()) {
    if (v.empty()) throw std::invalid_argument(std::string("grid axis ") + key + " is empty");
    return v.get<std::vector<T>>();
  }
  return {v.get<T>()};
}

}  // namespace

DetectionThresholds thresholds_from_json(std::string_view json_text, DetectionThresholds base) {
  const auto j = json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("threshold config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "theta_dd") base.theta_dd = value.get<std::size_t>();
    else if (key == "theta_mcr") base.theta_mcr = value.get<double>();
    else if (key == "theta_avgddr") base.theta_avgddr = value.get<double>();
    else if (key == "theta_avgmcr") base.theta_avgmcr = value.get<double>();
    else if (key == "resolution") base.resolution = value.get<double>();
    else throw std::invalid_argument("threshold config: unknown key '" + key + "'");
  }
  return base;
}

DetectOutcome run_detect(const DetectOptions& options) {
  in_stage("config", [&] {
    validate_thresholds(options.thresholds);
    return 0;
  });
  const auto flows = in_stage("ingest", [&] { return parse_flow_file(options.flows); });
  std::optional<LabelMap> labels;
  if (options.labels) labels = in_stage("ingest", [&] { return parse_label_file(*options.labels); });

  DetectOutcome outcome;
  outcome.result = run_pipeline(flows, options.thresholds, options.jobs);
  if (labels) outcome.evaluation = in_stage("evaluate", [&] { return evaluate(outcome.result, *labels); });

  in_stage("report", [&] {
    write_text(options.out, report_to_json(outcome.result, outcome.evaluation));
    if (options.dump_dir) {
      fs::create_directories(*options.dump_dir);
      auto clusters = open_output(*options.dump_dir / "p2p_clusters.csv");
      write_cluster_dump(clusters, outcome.result.p2p_clusters);
      auto graph = open_output(*options.dump_dir / "mcg.csv");
      write_graph_dump(graph, outcome.result.graph);
      auto partition = open_output(*options.dump_dir / "communities.csv");
      write_partition_dump(partition, outcome.result.partition);
    }
    return 0;
  });
  return outcome;
}

LabeledDataset run_generate(const GenerateOptions& options) {
  in_stage("config", [&] {
    options.config.validate();
    return 0;
  });
  auto dataset = in_stage("generate", [&] { return generate_dataset(options.config); });
  in_stage("report", [&] {
    write_dataset(options.out_dir, dataset);
    write_manifest(options.out_dir, options.config, dataset);
    return 0;
  });
  return dataset;
}

LabeledDataset run_attack(const AttackOptions& options) {
  const auto dataset = in_stage("ingest", [&] { return read_dataset(options.in_dir); });
  auto attacked = in_stage("attack", [&] {
    Rng rng(options.seed);
    if (options.type == AttackType::pmmkl) return pmmkl(dataset, rng);
    const auto demand = ammkl_pool_demand(dataset, options.gamma, options.injection, options.theta_dd);
    const auto pool = fresh_peer_pool(dataset, demand, rng);
    return ammkl(dataset, options.gamma, pool, rng, options.injection, options.theta_dd);
  });
  in_stage("report", [&] {
    write_dataset(options.out_dir, attacked);
    nlohmann::ordered_json j;
    j["type"] = options.type == AttackType::pmmkl ? "pmmkl" : "ammkl";
    if (options.type == AttackType::ammkl) {
      j["gamma"] = options.gamma;
      j["injection"] = options.injection == Injection::pre_filter ? "pre" : "post";
      j["theta_dd"] = options.theta_dd;
    }
    j["seed"] = options.seed;
    j["source"] = options.in_dir.string();
    j["flows_before"] = dataset.flows.size();
    j["flows_after"] = attacked.flows.size();
    write_text(options.out_dir / "attack.json", j.dump(2) + "\n");
    return 0;
  });
  return attacked;
}

std::vector<DetectionThresholds> ThresholdGrid::expand(const DetectionThresholds& base) const {
  auto or_base = [](const auto& values, auto fallback) {
    using T = decltype(fallback);
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<DetectionThresholds> out;
  for (const auto dd : or_base(theta_dd, base.theta_dd)) {
    for (const auto mcr : or_base(theta_mcr, base.theta_mcr)) {
      for (const auto avgddr : or_base(theta_avgddr, base.theta_avgddr)) {
        for (const auto avgmcr : or_base(theta_avgmcr, base.theta_avgmcr)) {
          for (const auto res : or_base(resolution, base.resolution)) out.push_back({dd, mcr, avgddr, avgmcr, res});
        }
      }
    }
  }
  return out;
}

ThresholdGrid grid_from_json(std::string_view json_text) {
  const auto j = json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("grid: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "theta_dd" && key != "theta_mcr" && key != "theta_avgddr" && key != "theta_avgmcr" &&
        key != "resolution") {
      throw std::invalid_argument("grid: unknown key '" + key + "'");
    }
  }
  ThresholdGrid g;
  g.theta_dd = axis<std::size_t>(j, "theta_dd");
  g.theta_mcr = axis<double>(j, "theta_mcr");
  g.theta_avgddr = axis<double>(j, "theta_avgddr");
  g.theta_avgmcr = axis<double>(j, "theta_avgmcr");
  g.resolution = axis<double>(j, "resolution");
  return g;
}

std::vector<SweepRow> run_sweep(const SweepOptions& options) {
  const auto cells = in_stage("config", [&] {
    auto expanded = grid_from_json(read_text(options.grid)).expand(options.base);
    for (const auto& t : expanded) validate_thresholds(t);
    return expanded;
  });
  const auto flows = in_stage("ingest", [&] { return parse_flow_file(options.flows); });
  const auto labels = in_stage("ingest", [&] { return parse_label_file(options.labels); });
  const auto clusters = in_stage("p2p_filter", [&] { return cluster_flows(flows); });

  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    auto result = run_pipeline(clusters, cells[i], 1);
    result.flow_count = flows.size();
    const auto evaluation = evaluate(result, labels);
    rows[i] = {cells[i], evaluation.detection, evaluation.indices};
  });

  in_stage("report", [&] {
    auto out = open_output(options.out);
    write_sweep_csv(out, rows, labels);
    return 0;
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const LabelMap& labels) {
  std::vector<std::string> botnets;
  for (const auto& [host, label] : labels) {
    if (label.role == HostRole::bot) botnets.push_back(label.group);
  }
  std::sort(botnets.begin(), botnets.end());
  botnets.erase(std::unique(botnets.begin(), botnets.end()), botnets.end());

  out << "theta_dd,theta_mcr,theta_avgddr,theta_avgmcr,resolution";
  for (const auto& name : botnets) out << ",rate_" << name;
  out << ",precision,recall,fp,fn,f_score,bsi,bai,blsi\n";
  for (const auto& row : rows) {
    const auto& t = row.thresholds;
    out << t.theta_dd << ',' << format_double(t.theta_mcr) << ',' << format_double(t.theta_avgddr) << ','
        << format_double(t.theta_avgmcr) << ',' << format_double(t.resolution);
    for (const auto& name : botnets) {
      const auto it = row.detection.per_botnet.find(name);
      out << ',' << format_double(it == row.detection.per_botnet.end() ? 0.0 : it->second.rate());
    }
    out << ',' << format_double(row.detection.precision) << ',' << format_double(row.detection.recall) << ','
        << row.detection.fp << ',' << row.detection.fn << ',' << format_double(row.detection.f_score) << ','
        << format_double(row.indices.bsi) << ',' << format_double(row.indices.bai) << ','
        << format_double(row.indices.blsi) << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow-level P2P botnet detection"};
  app.require_subcommand(1);

  // detect
  DetectOptions detect_opts;
  std::optional<std::string> detect_config;
  std::optional<std::size_t> theta_dd;
  std::optional<double> theta_mcr, theta_avgddr, theta_avgmcr, resolution;
  auto* detect_cmd = app.add_subcommand("detect", "Run the detection pipeline on a flow file");
  detect_cmd->add_option("--flows", detect_opts.flows, "Flow CSV")->required();
  detect_cmd->add_option("--labels", detect_opts.labels, "Label CSV; adds metrics to the report");
  detect_cmd->add_option("--config", detect_config, "Threshold JSON; flags override it");
  detect_cmd->add_option("--theta-dd", theta_dd, "Minimum /16 destination diversity");
  detect_cmd->add_option("--theta-mcr", theta_mcr, "MCG edge threshold (strict)");
  detect_cmd->add_option("--theta-avgddr", theta_avgddr, "Community AVGDDR threshold");
  detect_cmd->add_option("--theta-avgmcr", theta_avgmcr, "Community AVGMCR threshold");
  detect_cmd->add_option("--resolution", resolution, "Louvain resolution");
  detect_cmd->add_option("--jobs", detect_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  detect_cmd->add_option("--dump-dir", detect_opts.dump_dir, "Write cluster, graph and community dumps here");
  detect_cmd->add_option("--out", detect_opts.out, "Report JSON")->capture_default_str();

  // generate
  std::optional<std::string> generate_config;
  std::optional<std::uint64_t> generate_seed;
  std::string generate_dir;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a labeled synthetic corpus");
  generate_cmd->add_option("--config", generate_config, "SynthConfig JSON");
  generate_cmd->add_option("--out-dir", generate_dir, "Output directory")->required();
  generate_cmd->add_option("--seed", generate_seed, "Random seed (default " + std::to_string(kDefaultSeed) + ")");

  // attack
  AttackOptions attack_opts;
  std::string attack_in, attack_out;
  const std::map<std::string, AttackType> attack_types{{"pmmkl", AttackType::pmmkl}, {"ammkl", AttackType::ammkl}};
  const std::map<std::string, Injection> injections{{"pre", Injection::pre_filter}, {"post", Injection::post_filter}};
  auto* attack_cmd = app.add_subcommand("attack", "Apply an evasion attack to a corpus");
  attack_cmd->add_option("--in", attack_in, "Corpus directory")->required();
  attack_cmd->add_option("--type", attack_opts.type, "pmmkl or ammkl")
      ->required()
      ->transform(CLI::CheckedTransformer(attack_types, CLI::ignore_case));
  attack_cmd->add_option("--gamma", attack_opts.gamma, "AMMKL padding ratio")->check(CLI::NonNegativeNumber);
  attack_cmd->add_option("--injection", attack_opts.injection, "pre or post (default post)")
      ->transform(CLI::CheckedTransformer(injections, CLI::ignore_case));
  attack_cmd->add_option("--theta-dd", attack_opts.theta_dd, "P2P filter threshold used by post injection");
  attack_cmd->add_option("--seed", attack_opts.seed, "Random seed")->capture_default_str();
  attack_cmd->add_option("--out", attack_out, "Output corpus directory")->required();

  // sweep
  SweepOptions sweep_opts;
  std::optional<std::string> sweep_config;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a threshold grid");
  sweep_cmd->add_option("--flows", sweep_opts.flows, "Flow CSV")->required();
  sweep_cmd->add_option("--labels", sweep_opts.labels, "Label CSV")->required();
  sweep_cmd->add_option("--grid", sweep_opts.grid, "Grid JSON")->required();
  sweep_cmd->add_option("--config", sweep_config, "Threshold JSON for axes absent from the grid");
  sweep_cmd->add_option("--jobs", sweep_opts.jobs, "Concurrent cells")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_opts.out, "Output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*detect_cmd) {
      if (detect_config) {
        detect_opts.thresholds =
            in_stage("config", [&] { return thresholds_from_json(read_text(*detect_config)); });
      }
      if (theta_dd) detect_opts.thresholds.theta_dd = *theta_dd;
      if (theta_mcr) detect_opts.thresholds.theta_mcr = *theta_mcr;
      if (theta_avgddr) detect_opts.thresholds.theta_avgddr = *theta_avgddr;
      if (theta_avgmcr) detect_opts.thresholds.theta_avgmcr = *theta_avgmcr;
      if (resolution) detect_opts.thresholds.resolution = *resolution;
      const auto outcome = run_detect(detect_opts);
      out << outcome.result.report.bot_hosts.size() << " bot hosts in " << outcome.result.report.cliques.size()
          << " cliques; report written to " << detect_opts.out.string() << '\n';
    } else if (*generate_cmd) {
      GenerateOptions opts;
      opts.out_dir = generate_dir;
      if (generate_config) {
        opts.config = in_stage("config", [&] { return synth_config_from_json(read_text(*generate_config)); });
      }
      if (generate_seed) opts.config.seed = *generate_seed;
      const auto dataset = run_generate(opts);
      out << dataset.flows.size() << " flows, " << dataset.labels.size() << " hosts written to " << generate_dir
          << '\n';
    } else if (*attack_cmd) {
      attack_opts.in_dir = attack_in;
      attack_opts.out_dir = attack_out;
      const auto dataset = run_attack(attack_opts);
      out << dataset.flows.size() << " flows written to " << attack_out << '\n';
    } else if (*sweep_cmd) {
      if (sweep_config) {
        sweep_opts.base = in_stage("config", [&] { return thresholds_from_json(read_text(*sweep_config)); });
      }
      const auto rows = run_sweep(sweep_opts);
      out << rows.size() << " rows written to " << sweep_opts.out.string() << '\n';
    }
  } catch (const StageError& e) {
    err << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mcdetect::cli
