#include "mcdetect/flow_model.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace mcdetect {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits on ',' into exactly N fields; returns false on a different count.
template <std::size_t N>
bool split_fields(std::string_view line, std::array<std::string_view, N>& out, std::size_t& count) {
  count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (count < N) out[count] = field;
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return count == N;
}

bool is_unsigned_integer(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

bool looks_numeric(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  return is_unsigned_integer(s);
}

std::uint64_t parse_bpp(std::string_view field, std::size_t line, const char* name) {
  if (!field.empty() && field.front() == '-' && is_unsigned_integer(field.substr(1))) {
    throw ParseError(line, std::string("negative ") + name + " '" + std::string(field) + "'");
  }
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string("field ") + name + ": not a nonnegative integer '" + std::string(field) + "'");
  }
  return value;
}

Ipv4Address parse_address(std::string_view field, std::size_t line, const char* name) {
  if (field.find(':') != std::string_view::npos) {
    throw ParseError(line, std::string("field ") + name + ": IPv6 address '" + std::string(field) +
                               "' is not supported (IPv4 only)");
  }
  auto addr = Ipv4Address::parse(field);
  if (!addr) {
    throw ParseError(line, std::string("field ") + name + ": invalid IPv4 address '" + std::string(field) + "'");
  }
  return *addr;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  int octets = 0;
  std::size_t pos = 0;
  while (octets < 4) {
    const auto dot = text.find('.', pos);
    const auto part = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    if (part.empty() || part.size() > 3 || !is_unsigned_integer(part)) return std::nullopt;
    unsigned octet = 0;
    std::from_chars(part.data(), part.data() + part.size(), octet);
    if (octet > 255) return std::nullopt;
    value = (value << 8) | octet;
    ++octets;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
    if (octets == 4) return std::nullopt;  // trailing dot or fifth octet
  }
  if (octets != 4) return std::nullopt;
  return Ipv4Address{value};
}

std::string Ipv4Address::to_string() const {
  return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) + '.' +
         std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
}

std::string_view to_string(Protocol proto) {
  return proto == Protocol::tcp ? "tcp" : "udp";
}

std::optional<Protocol> parse_protocol(std::string_view token) {
  if (token == "tcp" || token == "TCP" || token == "6") return Protocol::tcp;
  if (token == "udp" || token == "UDP" || token == "17") return Protocol::udp;
  return std::nullopt;
}

std::string_view to_string(HostRole role) {
  switch (role) {
    case HostRole::bot: return "bot";
    case HostRole::legit_p2p: return "legit_p2p";
    case HostRole::background_p2p: return "background_p2p";
    case HostRole::background: return "background";
  }
  return "background";
}

std::optional<HostRole> parse_role(std::string_view token) {
  if (token == "bot") return HostRole::bot;
  if (token == "legit_p2p") return HostRole::legit_p2p;
  if (token == "background_p2p") return HostRole::background_p2p;
  if (token == "background") return HostRole::background;
  return std::nullopt;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

std::vector<FlowRecord> parse_flows(std::istream& in) {
  std::vector<FlowRecord> flows;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 5> f;
    std::size_t count = 0;
    if (!split_fields(line, f, count)) {
      throw ParseError(line_no, "expected 5 comma-separated fields, got " + std::to_string(count));
    }
    if (!seen_data) {
      seen_data = true;
      if (!looks_numeric(f[3]) && !looks_numeric(f[4])) continue;  // header
    }

    FlowRecord r;
    r.src = parse_address(f[0], line_no, "src_ip");
    r.dst = parse_address(f[1], line_no, "dst_ip");
    const auto proto = parse_protocol(f[2]);
    if (!proto) throw ParseError(line_no, "field proto: unknown protocol '" + std::string(f[2]) + "'");
    r.proto = *proto;
    r.bpp_out = parse_bpp(f[3], line_no, "bpp_out");
    r.bpp_in = parse_bpp(f[4], line_no, "bpp_in");
    if (r.src == r.dst) {
      throw ParseError(line_no, "src and dst are the same host " + r.src.to_string());
    }
    flows.push_back(r);
  }
  if (in.bad()) throw ParseError(line_no, "read failure");
  return flows;
}

std::vector<FlowRecord> parse_flow_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_flows(in);
}

void write_flows(std::ostream& out, std::span<const FlowRecord> flows) {
  out << "src_ip,dst_ip,proto,bpp_out,bpp_in\n";
  for (const auto& r : flows) {
    out << r.src.to_string() << ',' << r.dst.to_string() << ',' << to_string(r.proto) << ',' << r.bpp_out << ','
        << r.bpp_in << '\n';
  }
}

void write_flow_file(const std::filesystem::path& path, std::span<const FlowRecord> flows) {
  auto out = open_output(path);
  write_flows(out, flows);
}

LabelMap parse_labels(std::istream& in) {
  LabelMap labels;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 3> f;
    std::size_t count = 0;
    if (!split_fields(line, f, count)) {
      throw ParseError(line_no, "expected 3 comma-separated fields, got " + std::to_string(count));
    }
    if (!seen_data) {
      seen_data = true;
      if (!Ipv4Address::parse(f[0]) && !parse_role(f[1])) continue;  // header
    }

    HostLabel label;
    label.host = parse_address(f[0], line_no, "host_ip");
    const auto role = parse_role(f[1]);
    if (!role) throw ParseError(line_no, "field role: unknown role '" + std::string(f[1]) + "'");
    label.role = *role;
    label.group = std::string(f[2]);
    if ((label.role == HostRole::bot || label.role == HostRole::legit_p2p) && label.group.empty()) {
      throw ParseError(line_no, "field group: required for role " + std::string(to_string(label.role)));
    }
    if (label.role == HostRole::background && !label.group.empty()) {
      throw ParseError(line_no, "field group: must be empty for role background");
    }
    if (!labels.emplace(label.host, label).second) {
      throw ParseError(line_no, "duplicate label for host " + label.host.to_string());
    }
  }
  if (in.bad()) throw ParseError(line_no, "read failure");
  return labels;
}

LabelMap parse_label_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_labels(in);
}

void write_labels(std::ostream& out, const LabelMap& labels) {
  out << "host_ip,role,group\n";
  for (const auto& [host, label] : labels) {
    out << host.to_string() << ',' << to_string(label.role) << ',' << label.group << '\n';
  }
}

void write_label_file(const std::filesystem::path& path, const LabelMap& labels) {
  auto out = open_output(path);
  write_labels(out, labels);
}

std::uint64_t derive_bpp(std::uint64_t total_bytes, std::uint64_t total_packets) {
  if (total_packets == 0) throw std::invalid_argument("derive_bpp: zero packets");
  return total_bytes / total_packets;
}

}  // namespace mcdetect
