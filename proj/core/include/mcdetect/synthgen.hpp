#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mcdetect/flow_model.hpp"
#include "mcdetect/rng.hpp"

namespace mcdetect {

/// Parameters of a synthetic labeled corpus. The first block mirrors the
/// corpus shape; the second block tunes the background and legitimate-P2P
/// models.
struct SynthConfig {
  std::uint64_t seed = kDefaultSeed;
  std::size_t n_internal = 500;
  std::vector<std::size_t> n_bots_per_botnet = {5, 4, 3};
  std::size_t n_legit_p2p = 20;
  std::size_t external_pool = 20000;
  double bot_mcr_target = 0.5;
  double bot_ddr_target = 0.9;
  double legit_mcr_ceiling = 0.05;
  std::size_t flows_per_cluster = 60;
  std::size_t clusters_per_host = 2;

  std::size_t n_legit_apps = 4;
  std::size_t n_popular_servers = 40;
  double background_population_factor = 1.5;
  std::size_t background_min_contacts = 12;
  std::size_t background_max_contacts = 25;
  std::size_t background_max_blocks = 6;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  bool operator==(const SynthConfig&) const = default;
};

SynthConfig synth_config_from_json(std::string_view json_text);
std::string synth_config_to_json(const SynthConfig& config);

struct LabeledDataset {
  std::vector<FlowRecord> flows;
  LabelMap labels;
  std::set<Ipv4Address> internal_hosts;
};

/// Undirected host contact graph with sorted, duplicate-free neighbor lists.
using ContactGraph = std::map<Ipv4Address, std::vector<Ipv4Address>>;

ContactGraph contact_graph_from_flows(const std::vector<FlowRecord>& flows);
void add_contact(ContactGraph& graph, Ipv4Address a, Ipv4Address b);

struct TwoColoring {
  std::vector<Ipv4Address> internal;  // selected color class, discovery order
  std::vector<Ipv4Address> external;  // opposite color class, discovery order
};

/// Alternating breadth-first coloring from `start` until both color classes
/// reach `target` (or the component is exhausted), then the start's class
/// (or else the other one) trimmed to exactly `target` hosts becomes internal.
/// Throws std::runtime_error if no class reaches the target or the trimmed
/// class violates the mutual-contact criterion.
TwoColoring two_color_sample(const ContactGraph& graph, std::size_t target, Ipv4Address start);
TwoColoring two_color_sample(const ContactGraph& graph, std::size_t target, Rng& rng);

/// True iff every host in `hosts` shares at least one contact with another
/// host in `hosts`.
bool every_host_has_mutual_contact(const ContactGraph& graph, const std::vector<Ipv4Address>& hosts);

/// Allocator over the synthetic external address space (/16 blocks whose
/// first octet lies in [20, 220), minus a few reserved octets). Tracks every
/// address handed out so draws never collide.
class ExternalSpace {
 public:
  ExternalSpace();

  Prefix16 random_block(Rng& rng) const;
  /// A block never returned by reserve_block before.
  Prefix16 reserve_block(Rng& rng);
  /// An unused address inside `block`, marked used.
  Ipv4Address fresh_address(Prefix16 block, Rng& rng);
  /// An unused address in a uniformly random block, marked used.
  Ipv4Address fresh_address(Rng& rng);

  void mark_used(Ipv4Address addr) { used_.insert(addr.value); }
  bool is_used(Ipv4Address addr) const { return used_.contains(addr.value); }

 private:
  std::vector<std::uint8_t> first_octets_;
  std::unordered_set<std::uint32_t> used_;
  std::unordered_set<std::uint16_t> reserved_blocks_;
};

/// Shared state of one generation run: the random stream, the external
/// address space, pattern and placeholder allocation. Planted fragments use
/// placeholder source addresses in 100.64.0.0/10 until assemble() remaps them.
class SynthContext {
 public:
  explicit SynthContext(const SynthConfig& config);

  const SynthConfig& config() const { return config_; }
  Rng& rng() { return rng_; }
  ExternalSpace& space() { return space_; }
  const std::vector<Ipv4Address>& external_pool();

  PatternKey allocate_pattern();
  Ipv4Address allocate_placeholder();

 private:
  SynthConfig config_;
  Rng rng_;
  ExternalSpace space_;
  std::vector<Ipv4Address> pool_;
  bool pool_ready_ = false;
  std::set<PatternKey> patterns_;
  std::uint32_t next_placeholder_ = 0;
};

/// Patterns used by background traffic; planted patterns never collide with them.
const std::vector<PatternKey>& background_patterns();

/// Sampled internal background hosts with their outbound flows.
LabeledDataset generate_background(SynthContext& ctx);

/// Bots of one botnet on placeholder addresses. Each of the botnet's
/// clusters_per_host patterns is shared by all bots; per pattern, contact
/// sets are a shared core plus private tails sized for the MCR target, spread
/// over /16 blocks for the DDR target. Throws std::invalid_argument if n_bots < 3.
LabeledDataset plant_botnet(const std::string& name, std::size_t n_bots, SynthContext& ctx);

/// Hosts of one legitimate P2P application on placeholder addresses. Same
/// pattern per application, divergent high-DDR contact sets whose pairwise
/// MCR never exceeds legit_mcr_ceiling.
LabeledDataset plant_legit_p2p(const std::string& name, std::size_t n_hosts, SynthContext& ctx);

/// Maps every planted host onto a distinct random internal background host,
/// merges flows and labels, and drops internal-to-internal flows.
LabeledDataset assemble(LabeledDataset background, const std::vector<LabeledDataset>& planted, SynthContext& ctx);

/// Full corpus for `config`: background, one botnet per entry of
/// n_bots_per_botnet, legitimate hosts spread over n_legit_apps applications.
LabeledDataset generate_dataset(const SynthConfig& config);

std::string botnet_name(std::size_t index);
std::string legit_app_name(std::size_t index);

/// Writes flows.csv and labels.csv into `dir`, creating it if needed.
void write_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset);

/// manifest.json: the resolved config plus corpus counts.
std::string manifest_json(const SynthConfig& config, const LabeledDataset& dataset);
void write_manifest(const std::filesystem::path& dir, const SynthConfig& config, const LabeledDataset& dataset);

/// Reads flows.csv and labels.csv from `dir`; internal hosts are the labeled hosts.
LabeledDataset read_dataset(const std::filesystem::path& dir);

}  // namespace mcdetect
