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

#include "ednslab/lab.hpp"

#include "ednslab/error.hpp"

namespace ednslab {

namespace {

constexpr int kPortAttempts = 16;
constexpr std::uint16_t kFixtureEdnsSize = 4000;

}  // namespace

ZoneConfig build_lab_zone(const LabDomain& domain) {
  auto origin = DomainName::parse(domain.origin);
  auto zone = generate_txt_zone(origin, domain.txt_response_size, domain.ns_count, domain.first_address);
  auto keys = generate_dnskey_rrset(origin, domain.dnskey_count, domain.dnskey_octets);
  zone.records.insert(zone.records.end(), keys.begin(), keys.end());
  return zone;
}

std::unique_ptr<Lab> Lab::start(const std::vector<LabDomain>& domains, std::uint16_t port) {
  std::vector<ZoneConfig> zones;
  for (const auto& d : domains) zones.push_back(build_lab_zone(d));

  for (int attempt = 0;; ++attempt) {
    std::unique_ptr<Lab> lab(new Lab);
    lab->domains_ = domains;
    lab->port_ = port;
    try {
      for (std::size_t i = 0; i < domains.size(); ++i) {
        auto& row = lab->servers_.emplace_back();
        for (const auto& ns : zones[i].ns_targets) {
          ServeOptions options{ipv4_to_string(ns.address), lab->port_, lab->port_};
          row.push_back(serve(zones[i], domains[i].policy, options));
          lab->port_ = row.back()->udp_port();
        }
      }
      return lab;
    } catch (const Error& e) {
      // A chosen ephemeral port can be taken on another loopback address.
      if (port != 0 || e.code() != Errc::BindFailure || attempt + 1 >= kPortAttempts) throw;
    }
  }
}

Endpoint Lab::resolver(std::size_t index) const { return servers_.at(index).front()->endpoint(); }

std::vector<LabDomain> table_fixture() {
  return {
      {"truncating.lab.test", 5, ServerPolicy::EchoOptTruncate, {127, 0, 0, 11}},
      {"compliant.lab.test", 6, ServerPolicy::FullEdns, {127, 0, 0, 21}},
  };
}

std::vector<ExpectedRow> table_fixture_expectation() {
  return {
      {"truncating.lab.test", 5, DomainVerdict::No, DomainVerdict::No},
      {"compliant.lab.test", 6, DomainVerdict::No, DomainVerdict::Yes},
  };
}

SelftestOutcome run_table_selftest(const ProbeSettings& settings) {
  auto fixture = table_fixture();
  auto lab = Lab::start(fixture);
  std::vector<ClientProfile> profiles{nslookup_like(), dig_like(kFixtureEdnsSize)};
  std::vector<RRType> qtypes{RRType::TXT, RRType::DNSKEY};

  std::vector<DomainResult> results;
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    results.push_back(
        probe_domain(DomainName::parse(fixture[i].origin), lab->resolver(i), profiles, qtypes, settings));
  }

  SelftestOutcome outcome;
  outcome.report = build_report(results);
  auto expected = table_fixture_expectation();
  if (outcome.report.rows.size() != expected.size()) {
    outcome.mismatches.push_back("expected " + std::to_string(expected.size()) + " rows, got " +
                                 std::to_string(outcome.report.rows.size()));
    return outcome;
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& row = outcome.report.rows[i];
    const auto& want = expected[i];
    auto cell = [&](const char* profile) {
      auto it = row.verdicts.find(profile);
      return it == row.verdicts.end() ? std::string("missing") : domain_verdict_name(it->second);
    };
    std::string got = row.domain.to_string() + ", " + std::to_string(row.ns_count) + ", " + cell("nslookup-like") +
                      ", " + cell("dig-like");
    std::string wanted = want.domain + ", " + std::to_string(want.ns_count) + ", " +
                         domain_verdict_name(want.nslookup) + ", " + domain_verdict_name(want.dig);
    if (got != wanted) outcome.mismatches.push_back("row " + std::to_string(i) + ": got (" + got + "), want (" + wanted + ")");
  }
  return outcome;
}

}  // namespace ednslab
