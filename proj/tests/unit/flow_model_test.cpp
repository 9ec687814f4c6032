#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "mcdetect/flow_model.hpp"
#include "mcdetect/rng.hpp"

namespace mcdetect {
namespace {

std::vector<FlowRecord> parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_flows(in);
}

TEST(FlowModel, ParsesDataLine) {
  const auto flows = parse_text("10.0.0.1,93.184.216.34,tcp,120,64\n");
  ASSERT_EQ(flows.size(), 1u);
  EXPECT_EQ(flows[0].src, Ipv4Address(10, 0, 0, 1));
  EXPECT_EQ(flows[0].dst, Ipv4Address(93, 184, 216, 34));
  EXPECT_EQ(flows[0].proto, Protocol::tcp);
  EXPECT_EQ(flows[0].bpp_out, 120u);
  EXPECT_EQ(flows[0].bpp_in, 64u);
}

TEST(FlowModel, RejectsSameSourceAndDestination) {
  try {
    parse_text("10.0.0.1,10.0.0.1,udp,10,10\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("same host"), std::string::npos);
  }
}

TEST(FlowModel, EmptyInputYieldsNoFlows) {
  EXPECT_TRUE(parse_text("").empty());
  EXPECT_TRUE(parse_text("# only a comment\n\n").empty());
}

TEST(FlowModel, SkipsHeaderAndComments) {
  const auto flows = parse_text(
      "# exported\n"
      "src_ip,dst_ip,proto,bpp_out,bpp_in\n"
      "10.0.0.1,8.8.8.8,udp,70,90\n"
      "\n"
      "# trailing\n"
      "10.0.0.2,8.8.4.4,TCP,1,2\n");
  ASSERT_EQ(flows.size(), 2u);
  EXPECT_EQ(flows[1].proto, Protocol::tcp);
}

TEST(FlowModel, ReportsLineAndFieldOnErrors) {
  auto expect_error = [](const std::string& text, std::size_t line, const std::string& fragment) {
    try {
      parse_text(text);
      ADD_FAILURE() << "no error for: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("10.0.0.1,8.8.8.8,tcp,1\n", 1, "5 comma-separated");
  expect_error("10.0.0.1,8.8.8.8,tcp,1,2\n10.0.0.300,8.8.8.8,tcp,1,2\n", 2, "src_ip");
  expect_error("10.0.0.1,8.8.8.8,icmp,1,2\n", 1, "unknown protocol");
  expect_error("10.0.0.1,8.8.8.8,tcp,-4,2\n", 1, "negative bpp_out");
  expect_error("10.0.0.1,8.8.8.8,tcp,4,x\n", 1, "bpp_in");
  expect_error("10.0.0.1,2001:db8::1,tcp,4,2\n", 1, "IPv6");
}

TEST(FlowModel, Ipv4ParseIsStrict) {
  EXPECT_TRUE(Ipv4Address::parse("0.0.0.0"));
  EXPECT_TRUE(Ipv4Address::parse("255.255.255.255"));
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "1.2.3.4.", "256.1.1.1", "a.b.c.d", "1..2.3", " 1.2.3.4"}) {
    EXPECT_FALSE(Ipv4Address::parse(bad)) << bad;
  }
}

TEST(FlowModel, Prefix16) {
  EXPECT_EQ(prefix16(Ipv4Address(93, 184, 216, 34)).value, 93 * 256 + 184);
  EXPECT_EQ(prefix16(Ipv4Address(93, 184, 1, 1)), prefix16(Ipv4Address(93, 184, 216, 34)));
  EXPECT_NE(prefix16(Ipv4Address(10, 0, 0, 1)), prefix16(Ipv4Address(10, 1, 0, 1)));
}

TEST(FlowModel, Prefix16ConstantOnBlocksAndInjectiveAcrossThem) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto a = Ipv4Address(static_cast<std::uint32_t>(rng.next()));
    const auto b = Ipv4Address(static_cast<std::uint32_t>(rng.next()));
    const bool same_block = (a.value >> 16) == (b.value >> 16);
    EXPECT_EQ(prefix16(a) == prefix16(b), same_block);
    const Ipv4Address sibling((a.value & 0xffff0000u) | (b.value & 0xffffu));
    EXPECT_EQ(prefix16(sibling), prefix16(a));
  }
}

TEST(FlowModel, DeriveBpp) {
  EXPECT_EQ(derive_bpp(1200, 10), 120u);
  EXPECT_EQ(derive_bpp(125, 2), 62u);
  EXPECT_EQ(derive_bpp(0, 5), 0u);
  EXPECT_THROW(derive_bpp(10, 0), std::invalid_argument);
}

TEST(FlowModel, KeyOrderingIsLexicographic) {
  const FlowKey a{Ipv4Address(1, 0, 0, 0), Protocol::udp, 0, 0};
  const FlowKey b{Ipv4Address(2, 0, 0, 0), Protocol::tcp, 0, 0};
  const FlowKey c{Ipv4Address(2, 0, 0, 0), Protocol::tcp, 0, 1};
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_EQ(c.pattern(), (PatternKey{Protocol::tcp, 0, 1}));
}

TEST(FlowModel, SerializeParseRoundTrip) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FlowRecord> flows;
    const auto n = rng.below(50);
    for (std::uint64_t i = 0; i < n; ++i) {
      FlowRecord r;
      r.src = Ipv4Address(static_cast<std::uint32_t>(rng.next()));
      do {
        r.dst = Ipv4Address(static_cast<std::uint32_t>(rng.next()));
      } while (r.dst == r.src);
      r.proto = rng.chance(0.5) ? Protocol::tcp : Protocol::udp;
      r.bpp_out = rng.below(100000);
      r.bpp_in = rng.below(100000);
      flows.push_back(r);
    }
    std::stringstream buffer;
    write_flows(buffer, flows);
    EXPECT_EQ(parse_flows(buffer), flows);
  }
}

TEST(FlowModel, LabelsRoundTripAndValidate) {
  LabelMap labels;
  labels[Ipv4Address(10, 0, 0, 1)] = {Ipv4Address(10, 0, 0, 1), HostRole::bot, "storm"};
  labels[Ipv4Address(10, 0, 0, 2)] = {Ipv4Address(10, 0, 0, 2), HostRole::legit_p2p, "emule"};
  labels[Ipv4Address(10, 0, 0, 3)] = {Ipv4Address(10, 0, 0, 3), HostRole::background, ""};
  labels[Ipv4Address(10, 0, 0, 4)] = {Ipv4Address(10, 0, 0, 4), HostRole::background_p2p, ""};
  std::stringstream buffer;
  write_labels(buffer, labels);
  EXPECT_EQ(parse_labels(buffer), labels);

  std::istringstream missing_group("10.0.0.1,bot,\n");
  EXPECT_THROW(parse_labels(missing_group), ParseError);
  std::istringstream bad_role("10.0.0.1,zombie,x\n");
  EXPECT_THROW(parse_labels(bad_role), ParseError);
  std::istringstream duplicate("10.0.0.1,background,\n10.0.0.1,background,\n");
  EXPECT_THROW(parse_labels(duplicate), ParseError);
}

TEST(FlowModel, MissingFileIsAnError) {
  EXPECT_THROW(parse_flow_file("/nonexistent/flows.csv"), ParseError);
}

TEST(FlowModel, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "mcdetect_flow_model_test.csv";
  const std::vector<FlowRecord> flows = {{Ipv4Address(10, 0, 0, 1), Ipv4Address(1, 2, 3, 4), Protocol::udp, 5, 6}};
  write_flow_file(path, flows);
  EXPECT_EQ(parse_flow_file(path), flows);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace mcdetect
