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

#include <algorithm>
#include <chrono>
#include <random>

#include "ednslab/client_profile.hpp"
#include "ednslab/error.hpp"
#include "ednslab/lab.hpp"
#include "ednslab/mock_server.hpp"
#include "ednslab/probe.hpp"
#include "test_support.hpp"

namespace ednslab {
namespace {

using namespace std::chrono_literals;

const ExchangeOptions kFast{500ms, 0};

ProbeSettings fast_settings() {
  ProbeSettings s;
  s.exchange = kFast;
  return s;
}

// ---- classification ----------------------------------------------------------

ProbeObservation observation(bool sends_edns, std::optional<std::size_t> size, bool tc, bool opt) {
  ProbeObservation o;
  o.profile = sends_edns ? dig_like(4000) : nslookup_like();
  o.udp_response_size = size;
  o.tc_seen = tc;
  o.opt_in_response = opt;
  return o;
}

TEST(Classify, LargeUntruncatedEdnsAnswerIsCompliant) {
  EXPECT_EQ(classify(observation(true, 1200, false, true)).verdict, Verdict::Compliant);
}

TEST(Classify, TruncatedDespiteOptIsNonCompliant) {
  auto o = observation(true, 60, true, true);
  o.tcp_fallback_used = true;
  o.tcp_succeeded = true;
  EXPECT_EQ(classify(o).verdict, Verdict::NonCompliantTruncated);
}

TEST(Classify, ClientWithoutEdnsTruncatedIsClientCause) {
  EXPECT_EQ(classify(observation(false, 60, true, false)).verdict, Verdict::NonCompliantClientNoEdns);
}

TEST(Classify, SmallAnswerIsNotExercised) {
  EXPECT_EQ(classify(observation(true, 300, false, true)).verdict, Verdict::NotExercised);
  EXPECT_EQ(classify(observation(true, 512, false, true)).verdict, Verdict::NotExercised);
  EXPECT_EQ(classify(observation(true, 513, false, true)).verdict, Verdict::Compliant);
}

TEST(Classify, SilenceAndEdnsFailures) {
  auto silent = observation(true, std::nullopt, false, false);
  silent.plain_retry_answered = false;
  EXPECT_EQ(classify(silent).verdict, Verdict::Unreachable);
  silent.plain_retry_answered = true;
  EXPECT_EQ(classify(silent).verdict, Verdict::EdnsDropped);
  auto formerr = observation(true, 40, false, false);
  formerr.rcode = rcode::kFormErr;
  EXPECT_EQ(classify(formerr).verdict, Verdict::EdnsRefused);
  auto plain_formerr = observation(false, 40, false, false);
  plain_formerr.rcode = rcode::kFormErr;
  EXPECT_EQ(classify(plain_formerr).verdict, Verdict::NotExercised);
}

// Rule table written independently of classify(): first matching predicate wins.
Verdict oracle_verdict(const ProbeObservation& o) {
  struct Rule {
    bool (*when)(const ProbeObservation&);
    Verdict then;
  };
  static const Rule kRules[] = {
      {[](const ProbeObservation& x) { return !x.udp_response_size && !(x.plain_retry_answered && *x.plain_retry_answered); },
       Verdict::Unreachable},
      {[](const ProbeObservation& x) { return !x.udp_response_size; }, Verdict::EdnsDropped},
      {[](const ProbeObservation& x) { return x.profile.sends_edns && x.rcode == 1; }, Verdict::EdnsRefused},
      {[](const ProbeObservation& x) { return !x.profile.sends_edns && x.tc_seen; }, Verdict::NonCompliantClientNoEdns},
      {[](const ProbeObservation& x) { return x.profile.sends_edns && x.tc_seen; }, Verdict::NonCompliantTruncated},
      {[](const ProbeObservation& x) { return !x.tc_seen && *x.udp_response_size > 512; }, Verdict::Compliant},
      {[](const ProbeObservation&) { return true; }, Verdict::NotExercised},
  };
  for (const auto& r : kRules) {
    if (r.when(o)) return r.then;
  }
  return Verdict::NotExercised;
}

template <typename F>
void for_each_observation(F&& visit) {
  const std::optional<std::size_t> sizes[] = {std::nullopt, 0, 12, 300, 511, 512, 513, 900, 4000, 65535};
  const std::optional<bool> tristate[] = {std::nullopt, false, true};
  for (bool edns : {false, true}) {
    for (auto size : sizes) {
      for (bool tc : {false, true}) {
        for (bool opt : {false, true}) {
          for (int rc = 0; rc < 16; ++rc) {
            for (bool fallback : {false, true}) {
              for (auto tcp_ok : tristate) {
                for (auto plain : tristate) {
                  auto o = observation(edns, size, tc, opt);
                  o.rcode = static_cast<std::uint8_t>(rc);
                  o.tcp_fallback_used = fallback;
                  o.tcp_succeeded = tcp_ok;
                  o.plain_retry_answered = plain;
                  visit(o);
                }
              }
            }
          }
        }
      }
    }
  }
}

TEST(ClassifyProperty, TotalAndMatchesRuleTable) {
  std::size_t count = 0;
  for_each_observation([&](const ProbeObservation& o) {
    auto v = classify(o);
    ++count;
    ASSERT_TRUE(parse_verdict(verdict_name(v.verdict)).has_value());
    ASSERT_FALSE(v.cause.empty());
    ASSERT_EQ(v.verdict, oracle_verdict(o));
    if (v.verdict == Verdict::Compliant) {
      ASSERT_TRUE(o.udp_response_size && *o.udp_response_size > 512 && !o.tc_seen);
    }
    if (v.verdict == Verdict::NonCompliantTruncated) ASSERT_TRUE(o.profile.sends_edns);
  });
  EXPECT_EQ(count, 2u * 10 * 2 * 2 * 16 * 2 * 3 * 3);
}

// ---- aggregation -------------------------------------------------------------

constexpr Verdict kAllVerdicts[] = {Verdict::Compliant,  Verdict::NonCompliantTruncated,
                                    Verdict::NonCompliantClientNoEdns, Verdict::EdnsDropped,
                                    Verdict::EdnsRefused, Verdict::NotExercised,
                                    Verdict::Unreachable};

TEST(Aggregate, DomainVerdictRules) {
  using V = Verdict;
  EXPECT_EQ(aggregate_domain({V::Compliant, V::Compliant}), DomainVerdict::Yes);
  EXPECT_EQ(aggregate_domain({V::Compliant, V::NonCompliantTruncated}), DomainVerdict::No);
  EXPECT_EQ(aggregate_domain({V::Compliant, V::NotExercised}), DomainVerdict::Yes);
  EXPECT_EQ(aggregate_domain({V::NotExercised}), DomainVerdict::Indeterminate);
  EXPECT_EQ(aggregate_domain({}), DomainVerdict::Indeterminate);
  EXPECT_EQ(aggregate_domain({V::Unreachable, V::EdnsDropped}), DomainVerdict::No);
  EXPECT_EQ(aggregate_domain({V::Unreachable}), DomainVerdict::Indeterminate);
}

TEST(AggregateProperty, PermutationInvariantOverAllMultisets) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Verdict> vs(static_cast<std::size_t>(rng() % 7));
    for (auto& v : vs) v = kAllVerdicts[rng() % 7];
    auto want = aggregate_domain(vs);
    auto worst = worst_verdict(vs);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(vs.begin(), vs.end(), rng);
      ASSERT_EQ(aggregate_domain(vs), want);
      ASSERT_EQ(worst_verdict(vs), worst);
    }
    bool any_bad = std::any_of(vs.begin(), vs.end(), [](Verdict v) {
      return v == Verdict::NonCompliantTruncated || v == Verdict::NonCompliantClientNoEdns ||
             v == Verdict::EdnsDropped || v == Verdict::EdnsRefused;
    });
    bool any_ok = std::count(vs.begin(), vs.end(), Verdict::Compliant) > 0;
    ASSERT_EQ(want, any_bad ? DomainVerdict::No : any_ok ? DomainVerdict::Yes : DomainVerdict::Indeterminate);
  }
}

TEST(Aggregate, WorstVerdictOrdering) {
  EXPECT_EQ(worst_verdict({Verdict::Compliant, Verdict::NotExercised}), Verdict::Compliant);
  EXPECT_EQ(worst_verdict({Verdict::Unreachable, Verdict::Compliant}), Verdict::Compliant);
  EXPECT_EQ(worst_verdict({Verdict::Unreachable, Verdict::NotExercised}), Verdict::Unreachable);
  EXPECT_EQ(worst_verdict({}), Verdict::NotExercised);
  EXPECT_EQ(worst_verdict({Verdict::EdnsDropped, Verdict::NonCompliantTruncated}), Verdict::NonCompliantTruncated);
  EXPECT_EQ(worst_verdict({Verdict::Compliant}), Verdict::Compliant);
  for (auto v : kAllVerdicts) EXPECT_EQ(parse_verdict(verdict_name(v)), v);
}

// ---- enumerate_ns ------------------------------------------------------------

const DomainName kOrigin = DomainName::parse("enum.test");

TEST(EnumerateNs, FiveTargets) {
  auto zone = generate_txt_zone(kOrigin, 300, 5, {127, 0, 0, 31});
  auto mock = testing::start_mock(zone, ServerPolicy::FullEdns);
  auto servers = enumerate_ns(kOrigin, mock->endpoint(), fast_settings());
  ASSERT_EQ(servers.size(), 5u);
  EXPECT_EQ(servers[0].name, DomainName::parse("ns1.enum.test"));
  EXPECT_EQ(servers[4].address, (Endpoint{"127.0.0.35", mock->udp_port()}));
}

TEST(EnumerateNs, ExplicitServerPort) {
  auto mock = testing::start_mock(generate_txt_zone(kOrigin, 300, 2), ServerPolicy::FullEdns);
  auto settings = fast_settings();
  settings.server_port = 53;
  EXPECT_EQ(enumerate_ns(kOrigin, mock->endpoint(), settings)[0].address.port, 53);
}

TEST(EnumerateNs, NoNsRecordsRaises) {
  auto zone = generate_txt_zone(kOrigin, 300, 0);
  auto mock = testing::start_mock(zone, ServerPolicy::FullEdns);
  try {
    enumerate_ns(kOrigin, mock->endpoint(), fast_settings());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoNsRecords);
  }
}

TEST(EnumerateNs, SharedAddressDeduplicates) {
  auto zone = generate_txt_zone(kOrigin, 300, 2);
  zone.ns_targets[1].address = zone.ns_targets[0].address;
  auto mock = testing::start_mock(zone, ServerPolicy::FullEdns);
  EXPECT_EQ(enumerate_ns(kOrigin, mock->endpoint(), fast_settings()).size(), 1u);
}

TEST(EnumerateNs, SilentResolverIsUnreachable) {
  Endpoint closed{"127.0.0.1", testing::unused_port(SOCK_DGRAM)};
  auto settings = fast_settings();
  settings.exchange.timeout = 50ms;
  try {
    enumerate_ns(kOrigin, closed, settings);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ResolverUnreachable);
  }
}

// ---- probe_server ------------------------------------------------------------

void expect_observation_invariants(const ProbeObservation& o) {
  if (o.tcp_fallback_used) EXPECT_TRUE(o.tc_seen);
  EXPECT_EQ(o.tcp_succeeded.has_value(), o.tcp_fallback_used);
  if (o.plain_retry_answered) {
    EXPECT_TRUE(o.profile.sends_edns);
    EXPECT_FALSE(o.udp_response_size.has_value());
  }
}

TEST(ProbeServer, DigLikeAgainstFullEdns) {
  auto zone = generate_txt_zone(kOrigin, 900, 1);
  auto mock = testing::start_mock(zone, ServerPolicy::FullEdns);
  auto profile = dig_like(4000);
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, profile, kFast);
  // Size oracle: the codec applied to the mock's pure reply.
  auto expected = encode_message(*respond(build_query(kOrigin, RRType::TXT, profile, 0), zone, ServerPolicy::FullEdns,
                                          TransportKind::Udp))
                      .size();
  EXPECT_EQ(obs.udp_response_size, expected);
  EXPECT_EQ(expected, 900u);
  EXPECT_FALSE(obs.tc_seen);
  EXPECT_TRUE(obs.opt_in_response);
  EXPECT_EQ(classify(obs).verdict, Verdict::Compliant);
  expect_observation_invariants(obs);
}

TEST(ProbeServer, DigLikeAgainstEchoOptTruncate) {
  auto mock = testing::start_mock(generate_txt_zone(kOrigin, 900, 1), ServerPolicy::EchoOptTruncate);
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, dig_like(4000), kFast);
  EXPECT_TRUE(obs.tc_seen);
  EXPECT_TRUE(obs.opt_in_response);
  EXPECT_TRUE(obs.tcp_fallback_used);
  EXPECT_EQ(obs.tcp_succeeded, true);
  EXPECT_EQ(classify(obs).verdict, Verdict::NonCompliantTruncated);
  expect_observation_invariants(obs);
}

TEST(ProbeServer, NslookupLikeAgainstFullEdns) {
  auto mock = testing::start_mock(generate_txt_zone(kOrigin, 900, 1), ServerPolicy::FullEdns);
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, nslookup_like(), kFast);
  EXPECT_TRUE(obs.tc_seen);
  EXPECT_TRUE(obs.tcp_fallback_used);
  EXPECT_FALSE(obs.opt_in_response);
  EXPECT_EQ(classify(obs).verdict, Verdict::NonCompliantClientNoEdns);
  expect_observation_invariants(obs);
}

TEST(ProbeServer, DroppedEdnsDetectedByPlainRetry) {
  auto mock = testing::start_mock(generate_txt_zone(kOrigin, 900, 1), ServerPolicy::DropEdnsQuery);
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, dig_like(4000), {100ms, 0});
  EXPECT_FALSE(obs.udp_response_size.has_value());
  EXPECT_EQ(obs.plain_retry_answered, true);
  EXPECT_EQ(classify(obs).verdict, Verdict::EdnsDropped);
  expect_observation_invariants(obs);
}

TEST(ProbeServer, FormerrOnEdnsIsRefused) {
  auto mock = testing::start_mock(generate_txt_zone(kOrigin, 900, 1), ServerPolicy::FormerrOnEdns);
  auto obs = probe_server(mock->endpoint(), kOrigin, RRType::TXT, dig_like(4000), kFast);
  EXPECT_EQ(obs.rcode, rcode::kFormErr);
  EXPECT_EQ(classify(obs).verdict, Verdict::EdnsRefused);
}

TEST(ProbeServer, SilentServerIsUnreachable) {
  Endpoint closed{"127.0.0.1", testing::unused_port(SOCK_DGRAM)};
  auto obs = probe_server(closed, kOrigin, RRType::TXT, dig_like(4000), {50ms, 0});
  EXPECT_EQ(obs.plain_retry_answered, false);
  EXPECT_FALSE(obs.error.empty());
  EXPECT_EQ(classify(obs).verdict, Verdict::Unreachable);
  expect_observation_invariants(obs);
}

// ---- probe_domain ------------------------------------------------------------

std::vector<ClientProfile> both_profiles() { return {nslookup_like(), dig_like(4000)}; }
const std::vector<RRType> kQtypes{RRType::TXT, RRType::DNSKEY};

DomainResult probe_lab_domain(const Lab& lab, std::size_t i, std::size_t parallelism = 8) {
  auto settings = fast_settings();
  settings.parallelism = parallelism;
  return probe_domain(DomainName::parse(lab.domains()[i].origin), lab.resolver(i), both_profiles(), kQtypes, settings);
}

TEST(ProbeDomain, FiveTruncatingServers) {
  auto lab = Lab::start({{"five.lab.test", 5, ServerPolicy::EchoOptTruncate, {127, 0, 0, 41}}});
  auto r = probe_lab_domain(*lab, 0);
  EXPECT_EQ(r.ns_count, 5u);
  EXPECT_EQ(r.verdicts.at("nslookup-like"), DomainVerdict::No);
  EXPECT_EQ(r.verdicts.at("dig-like"), DomainVerdict::No);
  ASSERT_EQ(r.servers.size(), 5u);
  for (const auto& s : r.servers) {
    ASSERT_EQ(s.probes.size(), 3u);  // nslookup TXT, dig TXT, dig DNSKEY
    EXPECT_EQ(s.by_profile.at("dig-like"), Verdict::NonCompliantTruncated);
    for (const auto& p : s.probes) expect_observation_invariants(p.observation);
  }
}

TEST(ProbeDomain, SixCompliantServers) {
  auto lab = Lab::start({{"six.lab.test", 6, ServerPolicy::FullEdns, {127, 0, 0, 51}}});
  auto r = probe_lab_domain(*lab, 0);
  EXPECT_EQ(r.ns_count, 6u);
  EXPECT_EQ(r.verdicts.at("nslookup-like"), DomainVerdict::No);
  EXPECT_EQ(r.verdicts.at("dig-like"), DomainVerdict::Yes);
}

TEST(ProbeDomain, SmallAnswersAreIndeterminate) {
  LabDomain small{"small.lab.test", 1, ServerPolicy::FullEdns, {127, 0, 0, 61}};
  small.txt_response_size = 400;
  small.dnskey_count = 0;
  auto lab = Lab::start({small});
  auto r = probe_lab_domain(*lab, 0);
  EXPECT_EQ(r.ns_count, 1u);
  EXPECT_EQ(r.verdicts.at("dig-like"), DomainVerdict::Indeterminate);
  EXPECT_EQ(r.verdicts.at("nslookup-like"), DomainVerdict::Indeterminate);
}

TEST(ProbeDomainProperty, IndependentOfSchedulingAndRepeatable) {
  auto lab = Lab::start({{"mixed.lab.test", 4, ServerPolicy::IgnoreEdns512, {127, 0, 0, 71}}});
  auto serial = probe_lab_domain(*lab, 0, 1);
  auto parallel = probe_lab_domain(*lab, 0, 16);
  auto again = probe_lab_domain(*lab, 0, 3);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial, again);
}

TEST(ProbeDomain, AggregateRecomputesFromProbes) {
  auto lab = Lab::start({{"agg.lab.test", 2, ServerPolicy::FullEdns, {127, 0, 0, 81}}});
  auto r = probe_lab_domain(*lab, 0);
  auto copy = r;
  for (auto& s : copy.servers) {
    for (auto& p : s.probes) {
      if (p.profile == "dig-like" && p.qtype == RRType::TXT) p.verdict.verdict = Verdict::EdnsDropped;
    }
  }
  aggregate(copy);
  EXPECT_EQ(copy.verdicts.at("dig-like"), DomainVerdict::No);
  aggregate(r);
  EXPECT_EQ(r.verdicts.at("dig-like"), DomainVerdict::Yes);
}

}  // namespace
}  // namespace ednslab
