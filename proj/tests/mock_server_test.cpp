// Copyright 2026 The ednslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <chrono>

#include "ednslab/client_profile.hpp"
#include "ednslab/error.hpp"
#include "ednslab/mock_server.hpp"
#include "ednslab/probe.hpp"
#include "ednslab/transport.hpp"
#include "test_support.hpp"

namespace ednslab {
namespace {

using namespace std::chrono_literals;

constexpr ServerPolicy kAllPolicies[] = {ServerPolicy::FullEdns, ServerPolicy::IgnoreEdns512,
                                         ServerPolicy::EchoOptTruncate, ServerPolicy::DropEdnsQuery,
                                         ServerPolicy::FormerrOnEdns};

const DomainName kOrigin = DomainName::parse("mock.test");

ZoneConfig zone_of(std::size_t size) { return generate_txt_zone(kOrigin, size, 2); }

DnsMessage query(const ClientProfile& profile, RRType type = RRType::TXT, const DomainName& name = kOrigin) {
  return build_query(name, type, profile, 0x4242);
}

TEST(Respond, FullEdnsAnswersLargeUdpInFull) {
  auto r = respond(query(dig_like(4000)), zone_of(900), ServerPolicy::FullEdns, TransportKind::Udp);
  ASSERT_TRUE(r.has_value());
  EXPECT_FALSE(r->header.flags.tc);
  EXPECT_FALSE(r->answers.empty());
  ASSERT_TRUE(r->edns.has_value());
  EXPECT_EQ(r->edns->udp_payload_size, kEchoedUdpSize);
  EXPECT_TRUE(r->header.flags.aa);
  EXPECT_TRUE(r->header.flags.qr);
  EXPECT_EQ(r->header.id, 0x4242);
  EXPECT_EQ(encode_message(*r).size(), 900u);
}

TEST(Respond, EchoOptTruncateSetsTcWithEmptyAnswer) {
  auto r = respond(query(dig_like(4000)), zone_of(900), ServerPolicy::EchoOptTruncate, TransportKind::Udp);
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(r->header.flags.tc);
  EXPECT_TRUE(r->edns.has_value());
  EXPECT_TRUE(r->answers.empty());
  EXPECT_EQ(r->questions, query(dig_like(4000)).questions);
}

TEST(Respond, TcpAlwaysFullAnswer) {
  auto full = respond(query(dig_like(4000)), zone_of(900), ServerPolicy::FullEdns, TransportKind::Tcp);
  for (auto policy : kAllPolicies) {
    auto r = respond(query(dig_like(4000)), zone_of(900), policy, TransportKind::Tcp);
    ASSERT_TRUE(r.has_value()) << policy_name(policy);
    EXPECT_FALSE(r->header.flags.tc);
    EXPECT_EQ(r->answers, full->answers);
  }
}

TEST(Respond, NoOptQueryGetsLegacyLimit) {
  auto r = respond(query(nslookup_like()), zone_of(900), ServerPolicy::FullEdns, TransportKind::Udp);
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(r->header.flags.tc);
  EXPECT_FALSE(r->edns.has_value());
}

TEST(Respond, IgnoreEdnsTruncatesWithoutOpt) {
  auto r = respond(query(dig_like(4000)), zone_of(900), ServerPolicy::IgnoreEdns512, TransportKind::Udp);
  EXPECT_TRUE(r->header.flags.tc);
  EXPECT_FALSE(r->edns.has_value());
}

TEST(Respond, DropAndFormerrPolicies) {
  EXPECT_FALSE(respond(query(dig_like()), zone_of(900), ServerPolicy::DropEdnsQuery, TransportKind::Udp).has_value());
  auto plain = respond(query(nslookup_like()), zone_of(300), ServerPolicy::DropEdnsQuery, TransportKind::Udp);
  ASSERT_TRUE(plain.has_value());
  EXPECT_FALSE(plain->answers.empty());
  auto formerr = respond(query(dig_like()), zone_of(300), ServerPolicy::FormerrOnEdns, TransportKind::Udp);
  ASSERT_TRUE(formerr.has_value());
  EXPECT_EQ(formerr->header.flags.rcode, rcode::kFormErr);
  EXPECT_TRUE(formerr->answers.empty());
}

TEST(Respond, ErrorRcodes) {
  auto zone = zone_of(300);
  auto nx = respond(query(dig_like(), RRType::TXT, DomainName::parse("missing.mock.test")), zone,
                    ServerPolicy::FullEdns, TransportKind::Udp);
  EXPECT_EQ(nx->header.flags.rcode, rcode::kNXDomain);
  DnsMessage empty;
  empty.header.id = 9;
  EXPECT_EQ(respond(empty, zone, ServerPolicy::FullEdns, TransportKind::Udp)->header.flags.rcode, rcode::kFormErr);
  auto chaos = query(nslookup_like());
  chaos.questions[0].qclass = 3;
  EXPECT_EQ(respond(chaos, zone, ServerPolicy::FullEdns, TransportKind::Udp)->header.flags.rcode, rcode::kRefused);
  auto notify = query(nslookup_like());
  notify.header.flags.opcode = 4;
  EXPECT_EQ(respond(notify, zone, ServerPolicy::FullEdns, TransportKind::Udp)->header.flags.rcode, rcode::kNotImp);
}

TEST(Respond, EffectiveLimitPerPolicy) {
  auto with_opt = query(dig_like(4000));
  auto without = query(nslookup_like());
  EXPECT_EQ(effective_udp_limit(with_opt, ServerPolicy::FullEdns), 4000u);
  EXPECT_EQ(effective_udp_limit(without, ServerPolicy::FullEdns), 512u);
  EXPECT_EQ(effective_udp_limit(with_opt, ServerPolicy::IgnoreEdns512), 512u);
  EXPECT_EQ(effective_udp_limit(with_opt, ServerPolicy::EchoOptTruncate), 512u);
  auto tiny = query(dig_like(100));
  EXPECT_EQ(effective_udp_limit(tiny, ServerPolicy::FullEdns), 512u);
}

TEST(Policies, NamesRoundTrip) {
  for (auto p : kAllPolicies) EXPECT_EQ(parse_policy(policy_name(p)), p);
  EXPECT_FALSE(parse_policy("full_edns").has_value());
}

// ---- properties over a (policy, size, profile, qtype) matrix -----------------

struct Case {
  ServerPolicy policy;
  std::size_t size;
  ClientProfile profile;
  RRType qtype;
};

std::vector<Case> matrix() {
  std::vector<Case> out;
  std::vector<ClientProfile> profiles{nslookup_like(), dig_like(512), dig_like(600), dig_like(1232), dig_like(4000),
                                      dig_like(65535)};
  // The matrix also asks NS and A, which no built-in profile allows.
  for (auto& p : profiles) p.allowed_qtypes = {RRType::TXT, RRType::NS, RRType::A, RRType::DNSKEY};
  for (auto policy : kAllPolicies) {
    for (std::size_t size : {120u, 511u, 512u, 513u, 600u, 900u, 1300u, 3000u}) {
      for (const auto& profile : profiles) {
        for (auto qtype : {RRType::TXT, RRType::NS, RRType::A}) out.push_back({policy, size, profile, qtype});
      }
    }
  }
  return out;
}

TEST(RespondProperty, Deterministic) {
  for (const auto& c : matrix()) {
    auto zone = zone_of(c.size);
    auto q = query(c.profile, c.qtype);
    for (auto t : {TransportKind::Udp, TransportKind::Tcp}) {
      ASSERT_EQ(respond(q, zone, c.policy, t), respond(q, zone, c.policy, t));
    }
  }
}

TEST(RespondProperty, UdpFitsLimitAndTruncatesExactlyWhenFullWouldNot) {
  for (const auto& c : matrix()) {
    auto zone = zone_of(c.size);
    auto q = query(c.profile, c.qtype);
    auto udp = respond(q, zone, c.policy, TransportKind::Udp);
    if (!udp) continue;
    auto limit = effective_udp_limit(q, c.policy);
    ASSERT_LE(encode_message(*udp).size(), limit);
    if (udp->header.flags.rcode != rcode::kNoError) continue;
    // The untruncated UDP reply is the TCP reply with the same OPT decision.
    auto full = *respond(q, zone, c.policy, TransportKind::Tcp);
    full.edns = udp->edns;
    bool would_overflow = encode_message(full).size() > limit;
    ASSERT_EQ(udp->header.flags.tc, would_overflow) << policy_name(c.policy) << " " << c.size << " " << c.profile.name;
    if (!udp->header.flags.tc) ASSERT_EQ(udp->answers, full.answers);
  }
}

TEST(RespondProperty, FullEdnsNeverTruncatesWhenAdvertisedSizeSuffices) {
  for (const auto& c : matrix()) {
    if (c.policy != ServerPolicy::FullEdns || !c.profile.sends_edns) continue;
    auto zone = zone_of(c.size);
    auto q = query(c.profile, c.qtype);
    auto full_size = encode_message(*respond(q, zone, c.policy, TransportKind::Tcp)).size();
    if (c.profile.advertised_udp_size < full_size) continue;
    ASSERT_FALSE(respond(q, zone, c.policy, TransportKind::Udp)->header.flags.tc);
  }
}

// ---- live server -------------------------------------------------------------

TEST(Serve, EndToEndDigLikeSession) {
  auto mock = testing::start_mock(zone_of(900), ServerPolicy::FullEdns);
  EXPECT_NE(mock->udp_port(), 0);
  EXPECT_EQ(mock->udp_port(), mock->tcp_port());
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, dig_like(4000), {1000ms, 0});
  EXPECT_EQ(obs.udp_response_size, 900u);
  EXPECT_EQ(mock->udp_queries(), 1u);
  EXPECT_EQ(mock->tcp_queries(), 0u);
}

TEST(Serve, ShutdownSilencesServer) {
  auto mock = testing::start_mock(zone_of(300), ServerPolicy::FullEdns);
  auto ep = mock->endpoint();
  EXPECT_NO_THROW(udp_exchange(ep, query(nslookup_like()), 500ms, 0));
  mock->stop();
  mock->stop();
  try {
    udp_exchange(ep, query(nslookup_like()), 100ms, 0);
    FAIL() << "server still answering";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.code(), Errc::Timeout);
  }
}

TEST(Serve, PortInUseRaisesBindFailure) {
  auto first = testing::start_mock(zone_of(300), ServerPolicy::FullEdns);
  try {
    serve(zone_of(300), ServerPolicy::FullEdns, {"127.0.0.1", first->udp_port(), first->tcp_port()});
    FAIL() << "second bind succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BindFailure);
  }
}

TEST(Serve, MalformedDatagramGetsFormerr) {
  auto mock = testing::start_mock(zone_of(300), ServerPolicy::FullEdns);
  int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(mock->udp_port());
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  std::uint8_t junk[] = {0xAB, 0xCD, 0x01, 0x00, 0x00, 0x01};
  ::sendto(fd, junk, sizeof junk, 0, reinterpret_cast<sockaddr*>(&sa), sizeof sa);
  pollfd p{fd, POLLIN, 0};
  ASSERT_EQ(::poll(&p, 1, 1000), 1);
  std::uint8_t buf[512];
  auto n = ::recv(fd, buf, sizeof buf, 0);
  ::close(fd);
  auto reply = decode_message(OctetView(buf, static_cast<std::size_t>(n)));
  EXPECT_EQ(reply.header.id, 0xABCD);
  EXPECT_EQ(reply.header.flags.rcode, rcode::kFormErr);
}

}  // namespace
}  // namespace ednslab
