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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ednslab/wire.hpp"

namespace ednslab {

inline constexpr std::uint32_t kDefaultTtl = 3600;

using Ipv4 = std::array<std::uint8_t, 4>;

std::string ipv4_to_string(const Ipv4& address);
/// Throws Error{InvalidAddress}.
Ipv4 parse_ipv4(std::string_view text);

struct NsTarget {
  DomainName name;
  Ipv4 address{};

  bool operator==(const NsTarget&) const = default;
};

/// Authoritative data for one origin. NS records at the origin and the A
/// records of their targets are derived from `ns_targets`, so every NS target
/// always has an address.
struct ZoneConfig {
  DomainName origin;
  std::vector<ResourceRecord> records;
  std::vector<NsTarget> ns_targets;
  std::uint32_t ns_ttl = kDefaultTtl;

  bool operator==(const ZoneConfig&) const = default;

  /// Throws Error{InvalidZone} for out-of-zone names, OPT records, or bad TXT rdata.
  void validate() const;
  /// Exact-name, case-insensitive. Includes the derived NS/A records.
  std::vector<ResourceRecord> lookup(const DomainName& name, RRType type) const;
  bool has_name(const DomainName& name) const;
};

bool is_within(const DomainName& name, const DomainName& origin);

/// Zone document (JSON):
///   {"origin": "a.test",
///    "records": [{"name": "a.test", "type": "TXT", "ttl": 3600, "data": ["..."]}, ...],
///    "ns": [{"name": "ns1.a.test", "address": "127.0.0.1"}]}
/// Throws Error{ZoneParseError | InvalidZone}.
ZoneConfig parse_zone(std::string_view text);
std::string print_zone(const ZoneConfig& zone);
ZoneConfig load_zone_file(const std::filesystem::path& path);
void save_zone_file(const ZoneConfig& zone, const std::filesystem::path& path);

/// Builds a TXT rrset at the origin such that the response to a dig-like TXT
/// query (OPT echoed) encodes to exactly `target_response_size` octets, plus
/// `ns_count` NS targets ns1..nsN with consecutive addresses from `first_address`.
/// Throws Error{TargetTooSmall | InvalidZone}.
ZoneConfig generate_txt_zone(const DomainName& origin, std::size_t target_response_size, std::size_t ns_count,
                             Ipv4 first_address = {127, 0, 0, 1});

/// Smallest response the generator can produce for `origin`: one TXT record
/// holding one empty character-string.
std::size_t minimal_txt_response_size(const DomainName& origin);

/// Deterministic DNSKEY rrset at `owner` with `count` keys of `key_octets` each.
std::vector<ResourceRecord> generate_dnskey_rrset(const DomainName& owner, std::size_t count,
                                                  std::size_t key_octets = 256);

std::string base64_encode(OctetView data);
/// Throws Error{ZoneParseError}.
Octets base64_decode(std::string_view text);

}  // namespace ednslab
