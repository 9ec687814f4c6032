#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcdetect {

/// IPv4 host address in host byte order.
struct Ipv4Address {
  std::uint32_t value = 0;

  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t v) : value(v) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  /// Strict dotted-quad parse. Returns nullopt for anything else, IPv6 included.
  static std::optional<Ipv4Address> parse(std::string_view text);

  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;
};

enum class Protocol : std::uint8_t { tcp, udp };

std::string_view to_string(Protocol proto);
std::optional<Protocol> parse_protocol(std::string_view token);

/// Leading 16 bits of an IPv4 address (a.b.*.*  ->  a*256 + b).
struct Prefix16 {
  std::uint16_t value = 0;
  constexpr auto operator<=>(const Prefix16&) const = default;
};

constexpr Prefix16 prefix16(Ipv4Address addr) {
  return Prefix16{static_cast<std::uint16_t>(addr.value >> 16)};
}

/// The statistical pattern of a flow: two clusters are "the same type" iff
/// their patterns are equal.
struct PatternKey {
  Protocol proto = Protocol::tcp;
  std::uint64_t bpp_out = 0;
  std::uint64_t bpp_in = 0;

  constexpr auto operator<=>(const PatternKey&) const = default;
};

/// Grouping key for flow clusters. Ordered lexicographically over
/// (src, proto, bpp_out, bpp_in).
struct FlowKey {
  Ipv4Address src;
  Protocol proto = Protocol::tcp;
  std::uint64_t bpp_out = 0;
  std::uint64_t bpp_in = 0;

  constexpr PatternKey pattern() const { return PatternKey{proto, bpp_out, bpp_in}; }
  constexpr auto operator<=>(const FlowKey&) const = default;
};

struct FlowRecord {
  Ipv4Address src;
  Ipv4Address dst;
  Protocol proto = Protocol::tcp;
  std::uint64_t bpp_out = 0;
  std::uint64_t bpp_in = 0;

  constexpr FlowKey key() const { return FlowKey{src, proto, bpp_out, bpp_in}; }
  constexpr PatternKey pattern() const { return PatternKey{proto, bpp_out, bpp_in}; }
  constexpr bool operator==(const FlowRecord&) const = default;
};

enum class HostRole : std::uint8_t { bot, legit_p2p, background_p2p, background };

std::string_view to_string(HostRole role);
std::optional<HostRole> parse_role(std::string_view token);

struct HostLabel {
  Ipv4Address host;
  HostRole role = HostRole::background;
  std::string group;  // botnet or application name; empty for background

  bool operator==(const HostLabel&) const = default;
};

using LabelMap = std::map<Ipv4Address, HostLabel>;

/// Thrown for malformed flow or label input. `line()` is 1-based, 0 when the
/// failure is not tied to a line (I/O errors).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::vector<FlowRecord> parse_flows(std::istream& in);
std::vector<FlowRecord> parse_flow_file(const std::filesystem::path& path);
void write_flows(std::ostream& out, std::span<const FlowRecord> flows);
void write_flow_file(const std::filesystem::path& path, std::span<const FlowRecord> flows);

LabelMap parse_labels(std::istream& in);
LabelMap parse_label_file(const std::filesystem::path& path);
void write_labels(std::ostream& out, const LabelMap& labels);
void write_label_file(const std::filesystem::path& path, const LabelMap& labels);

/// floor(total_bytes / total_packets). Throws std::invalid_argument on zero packets.
std::uint64_t derive_bpp(std::uint64_t total_bytes, std::uint64_t total_packets);

}  // namespace mcdetect
