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

// Desk-scale compliance lab: several mock domains, each served by N
// authoritative mocks on distinct loopback addresses sharing one port.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ednslab/mock_server.hpp"
#include "ednslab/probe.hpp"
#include "ednslab/report.hpp"
#include "ednslab/zone.hpp"

namespace ednslab {

struct LabDomain {
  std::string origin;
  std::size_t ns_count = 1;
  ServerPolicy policy = ServerPolicy::FullEdns;
  Ipv4 first_address{127, 0, 0, 1};
  std::size_t txt_response_size = 900;
  std::size_t dnskey_count = 3;  // 0 leaves DNSKEY queries unexercised
  std::size_t dnskey_octets = 260;
};

ZoneConfig build_lab_zone(const LabDomain& domain);

class Lab {
 public:
  /// Starts every server. Port 0 picks one free port shared by all servers.
  /// Throws Error{BindFailure}.
  static std::unique_ptr<Lab> start(const std::vector<LabDomain>& domains, std::uint16_t port = 0);

  std::uint16_t port() const noexcept { return port_; }
  const std::vector<LabDomain>& domains() const noexcept { return domains_; }
  /// First server of domain `index`; it answers NS and A lookups for its zone.
  Endpoint resolver(std::size_t index) const;
  const std::vector<std::unique_ptr<MockServer>>& servers(std::size_t index) const { return servers_.at(index); }

 private:
  Lab() = default;
  std::uint16_t port_ = 0;
  std::vector<LabDomain> domains_;
  std::vector<std::vector<std::unique_ptr<MockServer>>> servers_;
};

/// Two domains: five servers that echo OPT yet truncate, and six fully
/// compliant servers.
std::vector<LabDomain> table_fixture();

struct ExpectedRow {
  std::string domain;
  std::size_t ns_count;
  DomainVerdict nslookup;
  DomainVerdict dig;
};

std::vector<ExpectedRow> table_fixture_expectation();

struct SelftestOutcome {
  ComplianceReport report;
  std::vector<std::string> mismatches;  // empty when the table was reproduced

  bool passed() const noexcept { return mismatches.empty(); }
};

/// Starts the fixture on loopback, probes it with both built-in profiles
/// (advertised size 4000) over TXT and DNSKEY, and compares the rows.
SelftestOutcome run_table_selftest(const ProbeSettings& settings = {});

}  // namespace ednslab
