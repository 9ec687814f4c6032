#include "mcdetect/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "mcdetect/mcg.hpp"

namespace mcdetect {

namespace {

using nlohmann::ordered_json;

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

// `count` addresses over fresh /16 blocks so that distinct prefixes make up
// about `ddr` of them.
std::vector<Ipv4Address> spread_addresses(std::size_t count, double ddr, SynthContext& ctx) {
  std::vector<Ipv4Address> out;
  if (count == 0) return out;
  const auto blocks_needed = std::clamp<std::size_t>(round_count(ddr * static_cast<double>(count)), 1, count);
  std::vector<Prefix16> blocks;
  blocks.reserve(blocks_needed);
  for (std::size_t b = 0; b < blocks_needed; ++b) blocks.push_back(ctx.space().reserve_block(ctx.rng()));
  out.reserve(count);
  for (const auto block : blocks) out.push_back(ctx.space().fresh_address(block, ctx.rng()));
  while (out.size() < count) {
    const auto block = blocks[ctx.rng().below(blocks.size())];
    out.push_back(ctx.space().fresh_address(block, ctx.rng()));
  }
  return out;
}

void emit_cluster(std::vector<FlowRecord>& flows, Ipv4Address src, const PatternKey& pattern,
                  const std::vector<Ipv4Address>& contacts) {
  for (const auto dst : contacts) flows.push_back({src, dst, pattern.proto, pattern.bpp_out, pattern.bpp_in});
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("SynthConfig: " + message);
}

}  // namespace

void SynthConfig::validate() const {
  require(n_internal >= 1, "n_internal must be >= 1");
  require(n_legit_p2p >= 1, "n_legit_p2p must be >= 1");
  require(external_pool >= 1, "external_pool must be >= 1");
  require(flows_per_cluster >= 1, "flows_per_cluster must be >= 1");
  require(clusters_per_host >= 1, "clusters_per_host must be >= 1");
  require(n_legit_apps >= 1, "n_legit_apps must be >= 1");
  require(n_popular_servers >= 1, "n_popular_servers must be >= 1");
  require(bot_mcr_target > 0.0 && bot_mcr_target <= 1.0, "bot_mcr_target must be in (0, 1]");
  require(bot_ddr_target > 0.0 && bot_ddr_target <= 1.0, "bot_ddr_target must be in (0, 1]");
  require(legit_mcr_ceiling > 0.0 && legit_mcr_ceiling <= 1.0, "legit_mcr_ceiling must be in (0, 1]");
  require(background_population_factor >= 1.0, "background_population_factor must be >= 1");
  require(background_min_contacts >= 1 && background_max_contacts >= background_min_contacts,
          "background contact range must satisfy 1 <= min <= max");
  require(background_max_blocks >= 1, "background_max_blocks must be >= 1");
  require(external_pool >= flows_per_cluster, "external_pool must hold at least flows_per_cluster addresses");
  std::size_t planted = n_legit_p2p;
  for (std::size_t i = 0; i < n_bots_per_botnet.size(); ++i) {
    require(n_bots_per_botnet[i] >= 3, "botnet " + std::to_string(i) + " has " + std::to_string(n_bots_per_botnet[i]) +
                                           " bots; at least 3 are required (clique floor)");
    planted += n_bots_per_botnet[i];
  }
  require(planted <= n_internal, "more planted hosts (" + std::to_string(planted) + ") than internal hosts (" +
                                     std::to_string(n_internal) + ")");
}

SynthConfig synth_config_from_json(std::string_view json_text) {
  const auto j = ordered_json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("SynthConfig: expected a JSON object");
  SynthConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "n_internal") c.n_internal = value.get<std::size_t>();
    else if (key == "n_bots_per_botnet") c.n_bots_per_botnet = value.get<std::vector<std::size_t>>();
    else if (key == "n_legit_p2p") c.n_legit_p2p = value.get<std::size_t>();
    else if (key == "external_pool") c.external_pool = value.get<std::size_t>();
    else if (key == "bot_mcr_target") c.bot_mcr_target = value.get<double>();
    else if (key == "bot_ddr_target") c.bot_ddr_target = value.get<double>();
    else if (key == "legit_mcr_ceiling") c.legit_mcr_ceiling = value.get<double>();
    else if (key == "flows_per_cluster") c.flows_per_cluster = value.get<std::size_t>();
    else if (key == "clusters_per_host") c.clusters_per_host = value.get<std::size_t>();
    else if (key == "n_legit_apps") c.n_legit_apps = value.get<std::size_t>();
    else if (key == "n_popular_servers") c.n_popular_servers = value.get<std::size_t>();
    else if (key == "background_population_factor") c.background_population_factor = value.get<double>();
    else if (key == "background_min_contacts") c.background_min_contacts = value.get<std::size_t>();
    else if (key == "background_max_contacts") c.background_max_contacts = value.get<std::size_t>();
    else if (key == "background_max_blocks") c.background_max_blocks = value.get<std::size_t>();
    else throw std::invalid_argument("SynthConfig: unknown key '" + key + "'");
  }
  return c;
}

std::string synth_config_to_json(const SynthConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["n_internal"] = c.n_internal;
  j["n_bots_per_botnet"] = c.n_bots_per_botnet;
  j["n_legit_p2p"] = c.n_legit_p2p;
  j["external_pool"] = c.external_pool;
  j["bot_mcr_target"] = c.bot_mcr_target;
  j["bot_ddr_target"] = c.bot_ddr_target;
  j["legit_mcr_ceiling"] = c.legit_mcr_ceiling;
  j["flows_per_cluster"] = c.flows_per_cluster;
  j["clusters_per_host"] = c.clusters_per_host;
  j["n_legit_apps"] = c.n_legit_apps;
  j["n_popular_servers"] = c.n_popular_servers;
  j["background_population_factor"] = c.background_population_factor;
  j["background_min_contacts"] = c.background_min_contacts;
  j["background_max_contacts"] = c.background_max_contacts;
  j["background_max_blocks"] = c.background_max_blocks;
  return j.dump(2);
}

void add_contact(ContactGraph& graph, Ipv4Address a, Ipv4Address b) {
  auto insert_sorted = [](std::vector<Ipv4Address>& list, Ipv4Address x) {
    const auto it = std::lower_bound(list.begin(), list.end(), x);
    if (it == list.end() || *it != x) list.insert(it, x);
  };
  insert_sorted(graph[a], b);
  insert_sorted(graph[b], a);
}

ContactGraph contact_graph_from_flows(const std::vector<FlowRecord>& flows) {
  ContactGraph graph;
  for (const auto& f : flows) {
    graph[f.src].push_back(f.dst);
    graph[f.dst].push_back(f.src);
  }
  for (auto& [host, list] : graph) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return graph;
}

bool every_host_has_mutual_contact(const ContactGraph& graph, const std::vector<Ipv4Address>& hosts) {
  std::map<Ipv4Address, std::size_t> reach;  // contact -> number of listed hosts touching it
  for (const auto h : hosts) {
    const auto it = graph.find(h);
    if (it == graph.end()) continue;
    for (const auto c : it->second) ++reach[c];
  }
  for (const auto h : hosts) {
    const auto it = graph.find(h);
    if (it == graph.end()) return false;
    const bool shared = std::any_of(it->second.begin(), it->second.end(), [&](Ipv4Address c) { return reach[c] >= 2; });
    if (!shared) return false;
  }
  return true;
}

TwoColoring two_color_sample(const ContactGraph& graph, std::size_t target, Ipv4Address start) {
  if (target == 0) throw std::invalid_argument("two_color_sample: target must be >= 1");
  if (!graph.contains(start)) throw std::invalid_argument("two_color_sample: start host not in graph");

  std::map<Ipv4Address, bool> color;  // true = start's color
  std::vector<Ipv4Address> same{start};
  std::vector<Ipv4Address> other;
  std::deque<Ipv4Address> queue{start};
  color[start] = true;
  auto done = [&] { return same.size() >= target && other.size() >= target; };
  while (!queue.empty() && !done()) {
    const auto host = queue.front();
    queue.pop_front();
    const bool next_color = !color[host];
    for (const auto contact : graph.at(host)) {
      if (color.contains(contact)) continue;
      color[contact] = next_color;
      (next_color ? same : other).push_back(contact);
      queue.push_back(contact);
      if (done()) break;
    }
  }

  TwoColoring result;
  if (same.size() >= target) {
    result.internal.assign(same.begin(), same.begin() + static_cast<std::ptrdiff_t>(target));
    result.external = std::move(other);
  } else if (other.size() >= target) {
    result.internal.assign(other.begin(), other.begin() + static_cast<std::ptrdiff_t>(target));
    result.external = std::move(same);
  } else {
    throw std::runtime_error("two_color_sample: target " + std::to_string(target) +
                             " unreachable; color classes reached " + std::to_string(same.size()) + " and " +
                             std::to_string(other.size()));
  }
  if (target >= 2 && !every_host_has_mutual_contact(graph, result.internal)) {
    throw std::runtime_error("two_color_sample: sampled hosts violate the mutual-contact criterion");
  }
  return result;
}

TwoColoring two_color_sample(const ContactGraph& graph, std::size_t target, Rng& rng) {
  if (graph.empty()) throw std::runtime_error("two_color_sample: empty graph");
  auto it = graph.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng.below(graph.size())));
  return two_color_sample(graph, target, it->first);
}

ExternalSpace::ExternalSpace() {
  for (int octet = 20; octet < 220; ++octet) {
    if (octet == 100 || octet == 127 || octet == 169 || octet == 172 || octet == 192 || octet == 198) continue;
    first_octets_.push_back(static_cast<std::uint8_t>(octet));
  }
}

Prefix16 ExternalSpace::random_block(Rng& rng) const {
  const auto first = first_octets_[rng.below(first_octets_.size())];
  const auto second = rng.below(256);
  return Prefix16{static_cast<std::uint16_t>((first << 8) | second)};
}

Prefix16 ExternalSpace::reserve_block(Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const auto block = random_block(rng);
    if (reserved_blocks_.insert(block.value).second) return block;
  }
  throw std::runtime_error("ExternalSpace: no unreserved /16 block left");
}

Ipv4Address ExternalSpace::fresh_address(Prefix16 block, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const auto third = static_cast<std::uint32_t>(rng.below(256));
    const auto fourth = static_cast<std::uint32_t>(rng.between(1, 254));
    const Ipv4Address addr{(std::uint32_t{block.value} << 16) | (third << 8) | fourth};
    if (used_.insert(addr.value).second) return addr;
  }
  throw std::runtime_error("ExternalSpace: /16 block exhausted");
}

Ipv4Address ExternalSpace::fresh_address(Rng& rng) {
  const auto block = random_block(rng);
  return fresh_address(block, rng);
}

SynthContext::SynthContext(const SynthConfig& config) : config_(config), rng_(config.seed) {}

const std::vector<Ipv4Address>& SynthContext::external_pool() {
  if (!pool_ready_) {
    pool_.reserve(config_.external_pool);
    for (std::size_t i = 0; i < config_.external_pool; ++i) pool_.push_back(space_.fresh_address(rng_));
    pool_ready_ = true;
  }
  return pool_;
}

const std::vector<PatternKey>& background_patterns() {
  static const std::vector<PatternKey> patterns = {
      {Protocol::tcp, 52, 1448}, {Protocol::tcp, 60, 1200}, {Protocol::tcp, 64, 900}, {Protocol::tcp, 76, 1380},
      {Protocol::tcp, 90, 640},  {Protocol::tcp, 120, 1460}, {Protocol::udp, 72, 72},  {Protocol::udp, 80, 120},
      {Protocol::udp, 96, 480},  {Protocol::udp, 128, 128},
  };
  return patterns;
}

PatternKey SynthContext::allocate_pattern() {
  const auto& reserved = background_patterns();
  while (true) {
    PatternKey p;
    p.proto = rng_.chance(0.5) ? Protocol::udp : Protocol::tcp;
    p.bpp_out = rng_.between(60, 1400);
    p.bpp_in = rng_.between(60, 1400);
    if (std::find(reserved.begin(), reserved.end(), p) != reserved.end()) continue;
    if (patterns_.insert(p).second) return p;
  }
}

Ipv4Address SynthContext::allocate_placeholder() {
  ++next_placeholder_;
  if (next_placeholder_ >= (1u << 22)) throw std::runtime_error("SynthContext: placeholder space exhausted");
  return Ipv4Address{Ipv4Address(100, 64, 0, 0).value + next_placeholder_};
}

LabeledDataset generate_background(SynthContext& ctx) {
  const auto& cfg = ctx.config();
  auto& rng = ctx.rng();
  auto& space = ctx.space();
  LabeledDataset out;
  if (cfg.n_internal == 0) return out;

  const auto n_clients =
      static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.n_internal) * cfg.background_population_factor));
  std::vector<Ipv4Address> clients;
  std::set<Ipv4Address> client_set;
  while (clients.size() < n_clients) {
    const Ipv4Address addr(10, static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                           static_cast<std::uint8_t>(rng.between(1, 254)));
    if (client_set.insert(addr).second) clients.push_back(addr);
  }
  std::vector<Ipv4Address> popular;
  for (std::size_t i = 0; i < cfg.n_popular_servers; ++i) popular.push_back(space.fresh_address(rng));

  const auto& patterns = background_patterns();
  std::vector<FlowRecord> population;
  for (const auto client : clients) {
    const auto n_clusters = static_cast<std::size_t>(rng.between(1, 3));
    const auto chosen = rng.sample_indices(patterns.size(), n_clusters);
    const auto n_blocks = static_cast<std::size_t>(rng.between(1, cfg.background_max_blocks));
    std::vector<Prefix16> home;
    for (std::size_t b = 0; b < n_blocks; ++b) home.push_back(space.random_block(rng));

    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const auto& pattern = patterns[chosen[k]];
      const auto n_contacts = static_cast<std::size_t>(rng.between(cfg.background_min_contacts, cfg.background_max_contacts));
      std::vector<Ipv4Address> contacts;
      // At most one popular server per cluster; other contacts are private.
      if (k == 0 || rng.chance(0.7)) contacts.push_back(popular[rng.below(popular.size())]);
      while (contacts.size() < n_contacts) contacts.push_back(space.fresh_address(home[rng.below(home.size())], rng));
      emit_cluster(population, client, pattern, contacts);
    }
  }

  const auto graph = contact_graph_from_flows(population);
  const auto start = clients[rng.below(clients.size())];
  const auto coloring = two_color_sample(graph, cfg.n_internal, start);

  out.internal_hosts.insert(coloring.internal.begin(), coloring.internal.end());
  for (const auto& f : population) {
    if (out.internal_hosts.contains(f.src) && !out.internal_hosts.contains(f.dst)) out.flows.push_back(f);
  }
  for (const auto h : out.internal_hosts) out.labels.emplace(h, HostLabel{h, HostRole::background, ""});
  return out;
}

LabeledDataset plant_botnet(const std::string& name, std::size_t n_bots, SynthContext& ctx) {
  if (n_bots < 3) {
    throw std::invalid_argument("plant_botnet: " + name + " needs at least 3 bots, got " + std::to_string(n_bots));
  }
  const auto& cfg = ctx.config();
  const std::size_t m = cfg.flows_per_cluster;
  const double j = cfg.bot_mcr_target;
  // core / (core + 2 * tail) = j with core + tail = m
  const auto core_size = std::clamp<std::size_t>(round_count(static_cast<double>(m) * 2.0 * j / (1.0 + j)), 1, m);
  const auto tail_size = m - core_size;

  LabeledDataset out;
  std::vector<Ipv4Address> bots;
  for (std::size_t b = 0; b < n_bots; ++b) {
    bots.push_back(ctx.allocate_placeholder());
    out.labels.emplace(bots.back(), HostLabel{bots.back(), HostRole::bot, name});
  }
  for (std::size_t p = 0; p < cfg.clusters_per_host; ++p) {
    const auto pattern = ctx.allocate_pattern();
    const auto core = spread_addresses(core_size, cfg.bot_ddr_target, ctx);
    for (const auto bot : bots) {
      auto contacts = core;
      const auto tail = spread_addresses(tail_size, cfg.bot_ddr_target, ctx);
      contacts.insert(contacts.end(), tail.begin(), tail.end());
      emit_cluster(out.flows, bot, pattern, contacts);
    }
  }
  return out;
}

LabeledDataset plant_legit_p2p(const std::string& name, std::size_t n_hosts, SynthContext& ctx) {
  if (n_hosts == 0) throw std::invalid_argument("plant_legit_p2p: " + name + " needs at least 1 host");
  const auto& cfg = ctx.config();
  const auto& pool = ctx.external_pool();
  auto& rng = ctx.rng();
  const std::size_t m = cfg.flows_per_cluster;
  const double ceiling = cfg.legit_mcr_ceiling;
  // Half of the largest shared set that keeps two clusters at the ceiling.
  const auto bootstrap_size =
      std::min<std::size_t>(m, static_cast<std::size_t>(std::floor(static_cast<double>(m) * ceiling / (1.0 + ceiling))));

  LabeledDataset out;
  std::vector<Ipv4Address> hosts;
  for (std::size_t h = 0; h < n_hosts; ++h) {
    hosts.push_back(ctx.allocate_placeholder());
    out.labels.emplace(hosts.back(), HostLabel{hosts.back(), HostRole::legit_p2p, name});
  }
  for (std::size_t p = 0; p < cfg.clusters_per_host; ++p) {
    const auto pattern = ctx.allocate_pattern();
    std::vector<Ipv4Address> bootstrap;
    for (std::size_t i = 0; i < bootstrap_size; ++i) bootstrap.push_back(ctx.space().fresh_address(rng));

    std::vector<std::vector<Ipv4Address>> accepted;  // sorted contact sets of this pattern
    for (const auto host : hosts) {
      std::vector<Ipv4Address> contacts;
      bool ok = false;
      for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
        contacts = bootstrap;
        for (const auto idx : rng.sample_indices(pool.size(), m - bootstrap_size)) contacts.push_back(pool[idx]);
        auto sorted = contacts;
        std::sort(sorted.begin(), sorted.end());
        ok = std::all_of(accepted.begin(), accepted.end(),
                         [&](const std::vector<Ipv4Address>& other) { return mcr(sorted, other) <= ceiling; });
        if (ok) accepted.push_back(std::move(sorted));
      }
      if (!ok) {
        throw std::runtime_error("plant_legit_p2p: cannot keep pairwise MCR under legit_mcr_ceiling; "
                                 "increase external_pool");
      }
      emit_cluster(out.flows, host, pattern, contacts);
    }
  }
  return out;
}

LabeledDataset assemble(LabeledDataset background, const std::vector<LabeledDataset>& planted, SynthContext& ctx) {
  std::vector<Ipv4Address> planted_hosts;
  for (const auto& fragment : planted) {
    for (const auto& [host, label] : fragment.labels) planted_hosts.push_back(host);
  }
  const std::vector<Ipv4Address> internal(background.internal_hosts.begin(), background.internal_hosts.end());
  if (planted_hosts.size() > internal.size()) {
    throw std::invalid_argument("assemble: " + std::to_string(planted_hosts.size()) + " planted hosts but only " +
                                std::to_string(internal.size()) + " internal hosts");
  }
  const auto targets = ctx.rng().sample_indices(internal.size(), planted_hosts.size());
  std::map<Ipv4Address, Ipv4Address> remap;
  for (std::size_t i = 0; i < planted_hosts.size(); ++i) remap.emplace(planted_hosts[i], internal[targets[i]]);

  LabeledDataset out;
  out.internal_hosts = std::move(background.internal_hosts);
  out.labels = std::move(background.labels);
  auto is_internal = [&](Ipv4Address a) { return out.internal_hosts.contains(a) || remap.contains(a); };

  out.flows.reserve(background.flows.size());
  for (const auto& f : background.flows) {
    if (!is_internal(f.dst)) out.flows.push_back(f);
  }
  for (const auto& fragment : planted) {
    for (auto f : fragment.flows) {
      if (is_internal(f.dst)) continue;
      if (const auto it = remap.find(f.src); it != remap.end()) f.src = it->second;
      out.flows.push_back(f);
    }
    for (auto [host, label] : fragment.labels) {
      label.host = remap.at(host);
      out.labels[label.host] = label;
    }
  }
  return out;
}

std::string botnet_name(std::size_t index) { return "botnet-" + std::to_string(index); }
std::string legit_app_name(std::size_t index) { return "p2p-app-" + std::to_string(index); }

LabeledDataset generate_dataset(const SynthConfig& config) {
  config.validate();
  SynthContext ctx(config);
  auto background = generate_background(ctx);

  std::vector<LabeledDataset> planted;
  for (std::size_t i = 0; i < config.n_bots_per_botnet.size(); ++i) {
    planted.push_back(plant_botnet(botnet_name(i), config.n_bots_per_botnet[i], ctx));
  }
  const auto apps = std::min(config.n_legit_apps, config.n_legit_p2p);
  for (std::size_t a = 0; a < apps; ++a) {
    const auto hosts = config.n_legit_p2p / apps + (a < config.n_legit_p2p % apps ? 1 : 0);
    planted.push_back(plant_legit_p2p(legit_app_name(a), hosts, ctx));
  }
  return assemble(std::move(background), planted, ctx);
}

void write_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset) {
  std::filesystem::create_directories(dir);
  write_flow_file(dir / "flows.csv", dataset.flows);
  write_label_file(dir / "labels.csv", dataset.labels);
}

std::string manifest_json(const SynthConfig& config, const LabeledDataset& dataset) {
  ordered_json j;
  j["config"] = ordered_json::parse(synth_config_to_json(config));
  std::map<std::string, std::size_t> roles;
  for (const auto& [host, label] : dataset.labels) ++roles[std::string(to_string(label.role))];
  j["flows"] = dataset.flows.size();
  j["internal_hosts"] = dataset.internal_hosts.size();
  ordered_json by_role = ordered_json::object();
  for (const auto& [role, n] : roles) by_role[role] = n;
  j["hosts_by_role"] = by_role;
  j["files"] = {{"flows", "flows.csv"}, {"labels", "labels.csv"}};
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& dir, const SynthConfig& config, const LabeledDataset& dataset) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + (dir / "manifest.json").string() + "'");
  out << manifest_json(config, dataset);
}

LabeledDataset read_dataset(const std::filesystem::path& dir) {
  LabeledDataset d;
  d.flows = parse_flow_file(dir / "flows.csv");
  d.labels = parse_label_file(dir / "labels.csv");
  for (const auto& [host, label] : d.labels) d.internal_hosts.insert(host);
  return d;
}

}  // namespace mcdetect
