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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ednslab/wire.hpp"

namespace ednslab {

/// How an emulated stub client shapes its queries.
struct ClientProfile {
  std::string name;
  bool sends_edns = false;
  std::uint16_t advertised_udp_size = 512;  // meaningful iff sends_edns
  bool do_bit = false;
  std::vector<RRType> allowed_qtypes;
  bool rd = true;

  bool operator==(const ClientProfile&) const = default;

  bool allows(RRType qtype) const;
};

inline constexpr std::uint16_t kDefaultEdnsSize = 4096;

/// Sends OPT; queries TXT and DNSKEY.
ClientProfile dig_like(std::uint16_t advertised_udp_size = kDefaultEdnsSize);
/// No OPT; TXT only.
ClientProfile nslookup_like();
/// Looks up "dig-like" / "nslookup-like".
std::optional<ClientProfile> builtin_profile(std::string_view name, std::uint16_t edns_size = kDefaultEdnsSize);

/// One-question query shaped by `profile`. Throws Error{QueryTypeUnsupportedByProfile}.
DnsMessage build_query(const DomainName& domain, RRType qtype, const ClientProfile& profile, std::uint16_t id);

}  // namespace ednslab
