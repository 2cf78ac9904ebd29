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

#include "ednslab/probe.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "ednslab/error.hpp"
#include "ednslab/zone.hpp"

namespace ednslab {

namespace {

// Classic UDP ceiling; only answers beyond it prove anything.
constexpr std::size_t kClassicUdpLimit = 512;

void record_udp(ProbeObservation& obs, const ExchangeRecord& udp) {
  obs.udp_response_size = udp.response_size;
  obs.tc_seen = udp.response.header.flags.tc;
  obs.opt_in_response = udp.response.edns.has_value();
  obs.rcode = udp.response.header.flags.rcode;
}

DnsMessage plain_query(const DomainName& name, RRType qtype, bool rd) {
  DnsMessage q;
  q.header.id = random_transaction_id();
  q.header.flags.rd = rd;
  q.questions.push_back({name, qtype, kClassIN});
  return q;
}

ExchangeRecord lookup(const Endpoint& resolver, const DomainName& name, RRType qtype, const ProbeSettings& settings) {
  try {
    return resolve_with_fallback(resolver, plain_query(name, qtype, true), settings.exchange).final;
  } catch (const TransportError& e) {
    throw Error(Errc::ResolverUnreachable, resolver.to_string() + ": " + e.what());
  }
}

std::vector<Ipv4> addresses_for(const DomainName& name, const std::vector<ResourceRecord>& records) {
  std::vector<Ipv4> out;
  for (const auto& rr : records) {
    if (rr.rtype == RRType::A && rr.name == name && rr.rdata.size() == 4) out.push_back(rr.a_address());
  }
  return out;
}

}  // namespace

std::string verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::Compliant: return "COMPLIANT";
    case Verdict::NonCompliantTruncated: return "NON_COMPLIANT_TRUNCATED";
    case Verdict::NonCompliantClientNoEdns: return "NON_COMPLIANT_CLIENT_NO_EDNS";
    case Verdict::EdnsDropped: return "EDNS_DROPPED";
    case Verdict::EdnsRefused: return "EDNS_REFUSED";
    case Verdict::NotExercised: return "NOT_EXERCISED";
    case Verdict::Unreachable: return "UNREACHABLE";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (auto v : {Verdict::Compliant, Verdict::NonCompliantTruncated, Verdict::NonCompliantClientNoEdns,
                 Verdict::EdnsDropped, Verdict::EdnsRefused, Verdict::NotExercised, Verdict::Unreachable}) {
    if (text == verdict_name(v)) return v;
  }
  return std::nullopt;
}

ComplianceVerdict classify(const ProbeObservation& o) {
  const bool answered = o.udp_response_size.has_value();
  const bool sends_edns = o.profile.sends_edns;
  if (!answered && o.plain_retry_answered != true) {
    return {Verdict::Unreachable, o.error.empty() ? "no response to any attempt" : o.error};
  }
  if (!answered) {
    return {Verdict::EdnsDropped, "OPT-bearing query unanswered, plain query answered"};
  }
  if (o.rcode == rcode::kFormErr && sends_edns) {
    return {Verdict::EdnsRefused, "FORMERR in reply to an OPT-bearing query"};
  }
  if (!sends_edns && o.tc_seen) {
    return {Verdict::NonCompliantClientNoEdns, "client sent no OPT; legacy 512-octet limit forced truncation"};
  }
  if (sends_edns && o.tc_seen) {
    std::string cause = o.opt_in_response ? "server echoed OPT yet truncated" : "server ignored OPT and truncated";
    if (o.tcp_succeeded == true) cause += "; answer retrieved over TCP";
    return {Verdict::NonCompliantTruncated, cause};
  }
  if (*o.udp_response_size > kClassicUdpLimit) {
    return {Verdict::Compliant, std::to_string(*o.udp_response_size) + "-octet answer delivered over UDP"};
  }
  return {Verdict::NotExercised, "response fits in 512 octets"};
}

int verdict_severity(Verdict verdict) {
  switch (verdict) {
    case Verdict::NonCompliantTruncated: return 6;
    case Verdict::NonCompliantClientNoEdns: return 5;
    case Verdict::EdnsDropped: return 4;
    case Verdict::EdnsRefused: return 3;
    case Verdict::Compliant: return 2;
    case Verdict::Unreachable: return 1;
    case Verdict::NotExercised: return 0;
  }
  return 0;
}

Verdict worst_verdict(const std::vector<Verdict>& verdicts) {
  Verdict worst = Verdict::NotExercised;
  bool any = false;
  for (auto v : verdicts) {
    if (!any || verdict_severity(v) > verdict_severity(worst)) worst = v;
    any = true;
  }
  return worst;
}

std::string domain_verdict_name(DomainVerdict verdict) {
  switch (verdict) {
    case DomainVerdict::Yes: return "Yes";
    case DomainVerdict::No: return "No";
    case DomainVerdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::optional<DomainVerdict> parse_domain_verdict(std::string_view text) {
  for (auto v : {DomainVerdict::Yes, DomainVerdict::No, DomainVerdict::Indeterminate}) {
    if (text == domain_verdict_name(v)) return v;
  }
  return std::nullopt;
}

DomainVerdict aggregate_domain(const std::vector<Verdict>& server_verdicts) {
  bool exercised = false;
  for (auto v : server_verdicts) {
    switch (v) {
      case Verdict::NonCompliantTruncated:
      case Verdict::NonCompliantClientNoEdns:
      case Verdict::EdnsDropped:
      case Verdict::EdnsRefused:
        return DomainVerdict::No;
      case Verdict::Compliant:
        exercised = true;
        break;
      case Verdict::NotExercised:
      case Verdict::Unreachable:
        break;
    }
  }
  return exercised ? DomainVerdict::Yes : DomainVerdict::Indeterminate;
}

std::vector<NameServer> enumerate_ns(const DomainName& domain, const Endpoint& resolver,
                                     const ProbeSettings& settings) {
  auto ns_reply = lookup(resolver, domain, RRType::NS, settings);
  std::vector<DomainName> targets;
  for (const auto& rr : ns_reply.response.answers) {
    if (rr.rtype == RRType::NS && rr.name == domain) targets.push_back(rr.ns_target());
  }
  if (targets.empty()) throw Error(Errc::NoNsRecords, domain.to_string());
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  const std::uint16_t port = settings.server_port.value_or(resolver.port);
  std::vector<NameServer> out;
  std::set<std::string> seen;
  for (const auto& target : targets) {
    auto addresses = addresses_for(target, ns_reply.response.additional);
    if (addresses.empty()) addresses = addresses_for(target, lookup(resolver, target, RRType::A, settings).response.answers);
    if (addresses.empty()) continue;
    std::string host = ipv4_to_string(addresses.front());
    if (!seen.insert(host).second) continue;
    out.push_back({target, {host, port}});
  }
  if (out.empty()) throw Error(Errc::NoNsRecords, "no NS target of " + domain.to_string() + " has an address");
  return out;
}

ProbeObservation probe_server(const Endpoint& server, const DomainName& domain, RRType qtype,
                              const ClientProfile& profile, const ExchangeOptions& options) {
  DnsMessage query = build_query(domain, qtype, profile, random_transaction_id());
  ProbeObservation obs;
  obs.profile = profile;
  obs.server = server;
  obs.qtype = qtype;
  try {
    auto result = resolve_with_fallback(server, query, options);
    record_udp(obs, result.udp);
    obs.tcp_fallback_used = result.final.transport == TransportKind::Tcp;
    if (obs.tcp_fallback_used) obs.tcp_succeeded = true;
    obs.transcript = std::move(result.transcript);
    return obs;
  } catch (const TransportError& e) {
    obs.transcript = e.transcript();
    obs.error = e.what();
    if (e.code() == Errc::TcpFallbackFailed && e.udp_record()) {
      record_udp(obs, *e.udp_record());
      obs.tcp_fallback_used = true;
      obs.tcp_succeeded = false;
      return obs;
    }
    if (e.code() != Errc::Timeout && e.code() != Errc::IdMismatchFlood) return obs;
  }

  if (profile.sends_edns) {
    // Separate "drops EDNS" from "drops everything".
    try {
      (void)udp_exchange(server, plain_query(domain, qtype, profile.rd), options.timeout, 0, &obs.transcript);
      obs.plain_retry_answered = true;
    } catch (const TransportError&) {
      obs.plain_retry_answered = false;
    }
  }
  return obs;
}

void aggregate(DomainResult& result) {
  result.verdicts.clear();
  for (auto& server : result.servers) {
    server.by_profile.clear();
    for (const auto& profile : result.profiles) {
      std::vector<Verdict> verdicts;
      for (const auto& probe : server.probes) {
        if (probe.profile == profile) verdicts.push_back(probe.verdict.verdict);
      }
      server.by_profile[profile] = worst_verdict(verdicts);
    }
  }
  for (const auto& profile : result.profiles) {
    std::vector<Verdict> verdicts;
    for (const auto& server : result.servers) verdicts.push_back(server.by_profile.at(profile));
    result.verdicts[profile] = aggregate_domain(verdicts);
  }
}

DomainResult probe_domain(const DomainName& domain, const Endpoint& resolver, const std::vector<ClientProfile>& profiles,
                          const std::vector<RRType>& qtypes, const ProbeSettings& settings) {
  DomainResult result;
  result.domain = domain;
  for (const auto& p : profiles) result.profiles.push_back(p.name);

  auto servers = enumerate_ns(domain, resolver, settings);
  result.ns_count = servers.size();

  struct Task {
    std::size_t server;
    const ClientProfile* profile;
    RRType qtype;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < servers.size(); ++s) {
    result.servers.push_back({servers[s], {}, {}});
    for (const auto& profile : profiles) {
      for (auto qtype : qtypes) {
        if (profile.allows(qtype)) tasks.push_back({s, &profile, qtype});
      }
    }
  }

  std::vector<ProbeResult> done(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& t = tasks[i];
      ProbeResult& out = done[i];
      out.profile = t.profile->name;
      out.qtype = t.qtype;
      try {
        out.observation = probe_server(servers[t.server].address, domain, t.qtype, *t.profile, settings.exchange);
      } catch (const std::exception& e) {
        out.observation.profile = *t.profile;
        out.observation.server = servers[t.server].address;
        out.observation.qtype = t.qtype;
        out.observation.error = e.what();
      }
      out.verdict = classify(out.observation);
    }
  };
  std::size_t width = std::clamp<std::size_t>(settings.parallelism, 1, std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < tasks.size(); ++i) result.servers[tasks[i].server].probes.push_back(std::move(done[i]));
  aggregate(result);
  return result;
}

}  // namespace ednslab
