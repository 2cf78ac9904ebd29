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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ednslab/client_profile.hpp"
#include "ednslab/endpoint.hpp"
#include "ednslab/transport.hpp"
#include "ednslab/wire.hpp"

namespace ednslab {

/// What one probe saw on the wire. Protocol outcomes are data here, never errors.
struct ProbeObservation {
  ClientProfile profile;
  Endpoint server;
  RRType qtype = RRType::TXT;
  std::optional<std::size_t> udp_response_size;  // absent when no UDP answer arrived
  bool tc_seen = false;
  bool opt_in_response = false;
  std::uint8_t rcode = 0;
  bool tcp_fallback_used = false;
  std::optional<bool> tcp_succeeded;        // set iff tcp_fallback_used
  std::optional<bool> plain_retry_answered;  // set iff an EDNS query timed out
  SessionTranscript transcript;
  std::string error;  // transport diagnostic, empty when none

  bool operator==(const ProbeObservation&) const = default;
};

enum class Verdict {
  Compliant,
  NonCompliantTruncated,
  NonCompliantClientNoEdns,
  EdnsDropped,
  EdnsRefused,
  NotExercised,
  Unreachable,
};

/// "COMPLIANT", "NON_COMPLIANT_TRUNCATED", ...
std::string verdict_name(Verdict verdict);
std::optional<Verdict> parse_verdict(std::string_view text);

struct ComplianceVerdict {
  Verdict verdict = Verdict::NotExercised;
  std::string cause;

  bool operator==(const ComplianceVerdict&) const = default;
};

/// Total. Rules, first match wins:
///   no UDP answer, plain retry not answered  -> UNREACHABLE
///   no UDP answer, plain retry answered      -> EDNS_DROPPED
///   FORMERR to an OPT-bearing query          -> EDNS_REFUSED
///   client sent no OPT and saw TC            -> NON_COMPLIANT_CLIENT_NO_EDNS
///   client sent OPT and saw TC               -> NON_COMPLIANT_TRUNCATED
///   UDP answer over 512 octets, no TC        -> COMPLIANT
///   otherwise                                -> NOT_EXERCISED
ComplianceVerdict classify(const ProbeObservation& observation);

/// Leftmost is worst: NON_COMPLIANT_* > EDNS_* > COMPLIANT > UNREACHABLE > NOT_EXERCISED.
/// A server that proved compliance on one qtype stays COMPLIANT when another
/// qtype was not exercised.
int verdict_severity(Verdict verdict);
Verdict worst_verdict(const std::vector<Verdict>& verdicts);

enum class DomainVerdict { Yes, No, Indeterminate };

std::string domain_verdict_name(DomainVerdict verdict);
std::optional<DomainVerdict> parse_domain_verdict(std::string_view text);

/// Yes iff at least one server was exercised and every exercised server is
/// COMPLIANT; No iff any server is NON_COMPLIANT_*, EDNS_DROPPED or EDNS_REFUSED.
/// NOT_EXERCISED and UNREACHABLE servers are not exercised.
DomainVerdict aggregate_domain(const std::vector<Verdict>& server_verdicts);

struct ProbeSettings {
  ExchangeOptions exchange;
  std::optional<std::uint16_t> server_port;  // defaults to the resolver's port
  std::size_t parallelism = 8;
};

struct NameServer {
  DomainName name;
  Endpoint address;

  bool operator==(const NameServer&) const = default;
};

/// NS lookup via `resolver`, then an A lookup per target. Deduplicated by
/// address, sorted by name. Throws Error{NoNsRecords | ResolverUnreachable}.
std::vector<NameServer> enumerate_ns(const DomainName& domain, const Endpoint& resolver,
                                     const ProbeSettings& settings = {});

/// Throws Error{QueryTypeUnsupportedByProfile} when the profile cannot ask `qtype`.
ProbeObservation probe_server(const Endpoint& server, const DomainName& domain, RRType qtype,
                              const ClientProfile& profile, const ExchangeOptions& options = {});

struct ProbeResult {
  std::string profile;
  RRType qtype = RRType::TXT;
  ProbeObservation observation;
  ComplianceVerdict verdict;

  bool operator==(const ProbeResult&) const = default;
};

struct ServerResult {
  NameServer server;
  std::vector<ProbeResult> probes;            // profile order, then qtype order
  std::map<std::string, Verdict> by_profile;  // worst over that profile's qtypes

  bool operator==(const ServerResult&) const = default;
};

struct DomainResult {
  DomainName domain;
  std::size_t ns_count = 0;
  std::vector<std::string> profiles;  // column order
  std::vector<ServerResult> servers;
  std::map<std::string, DomainVerdict> verdicts;

  bool operator==(const DomainResult&) const = default;
};

/// Probes every (server x profile x qtype the profile allows) with at most
/// `settings.parallelism` probes in flight. Output order does not depend on
/// scheduling. Throws Error{NoNsRecords | ResolverUnreachable}.
DomainResult probe_domain(const DomainName& domain, const Endpoint& resolver, const std::vector<ClientProfile>& profiles,
                          const std::vector<RRType>& qtypes, const ProbeSettings& settings = {});

/// The per-server and per-domain fold used by probe_domain, exposed for tests.
void aggregate(DomainResult& result);

}  // namespace ednslab
