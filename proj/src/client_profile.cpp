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

#include "ednslab/client_profile.hpp"

#include <algorithm>

#include "ednslab/error.hpp"

namespace ednslab {

bool ClientProfile::allows(RRType qtype) const {
  return std::find(allowed_qtypes.begin(), allowed_qtypes.end(), qtype) != allowed_qtypes.end();
}

ClientProfile dig_like(std::uint16_t advertised_udp_size) {
  return {"dig-like", true, advertised_udp_size, false, {RRType::TXT, RRType::DNSKEY}, true};
}

ClientProfile nslookup_like() { return {"nslookup-like", false, 512, false, {RRType::TXT}, true}; }

std::optional<ClientProfile> builtin_profile(std::string_view name, std::uint16_t edns_size) {
  if (name == "dig-like") return dig_like(edns_size);
  if (name == "nslookup-like") return nslookup_like();
  return std::nullopt;
}

DnsMessage build_query(const DomainName& domain, RRType qtype, const ClientProfile& profile, std::uint16_t id) {
  if (!profile.allows(qtype)) {
    throw Error(Errc::QueryTypeUnsupportedByProfile, profile.name + " cannot query " + rrtype_name(qtype));
  }
  DnsMessage query;
  query.header.id = id;
  query.header.flags.rd = profile.rd;
  query.questions.push_back({domain, qtype, kClassIN});
  if (profile.sends_edns) {
    EdnsOpt opt;
    opt.udp_payload_size = profile.advertised_udp_size;
    opt.version = 0;
    opt.do_bit = profile.do_bit;
    query.edns = opt;
  }
  return query;
}

}  // namespace ednslab
