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

#include "ednslab/zone.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "ednslab/error.hpp"

namespace ednslab {

using json = nlohmann::json;

namespace {

constexpr std::string_view kBase64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// Wire overhead of an RR apart from its owner name: type, class, ttl, rdlength.
constexpr std::size_t kRecordFixed = 10;
// Echoed OPT with no options: root owner plus the fixed part.
constexpr std::size_t kOptSize = 1 + kRecordFixed;
constexpr std::size_t kStringsPerRecord = 4;
constexpr std::size_t kMaxTarget = 60000;

std::string hex(OctetView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (auto b : data) {
    out += digits[b >> 4];
    out += digits[b & 0x0F];
  }
  return out;
}

Octets unhex(std::string_view text) {
  if (text.size() % 2 != 0) throw Error(Errc::ZoneParseError, "odd number of hex digits");
  Octets out;
  for (std::size_t i = 0; i < text.size(); i += 2) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + i + 2, v, 16);
    if (ec != std::errc{} || ptr != text.data() + i + 2) throw Error(Errc::ZoneParseError, "bad hex digit");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

template <typename T>
T parse_uint(const std::string& text, const char* what) {
  unsigned long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v > std::numeric_limits<T>::max()) {
    throw Error(Errc::ZoneParseError, std::string("bad ") + what + " '" + text + "'");
  }
  return static_cast<T>(v);
}

// RFC 3597 generic form: "\# <length> <hex>".
std::string generic_rdata(const Octets& rdata) {
  std::string out = "\\# " + std::to_string(rdata.size());
  if (!rdata.empty()) out += " " + hex(rdata);
  return out;
}

std::optional<Octets> parse_generic(const std::string& text) {
  auto words = split_ws(text);
  if (words.empty() || words[0] != "\\#") return std::nullopt;
  if (words.size() < 2) throw Error(Errc::ZoneParseError, "generic rdata without length");
  auto length = parse_uint<std::uint16_t>(words[1], "generic rdata length");
  std::string digits;
  for (std::size_t i = 2; i < words.size(); ++i) digits += words[i];
  Octets rdata = unhex(digits);
  if (rdata.size() != length) throw Error(Errc::ZoneParseError, "generic rdata length mismatch");
  return rdata;
}

bool is_utf8_encodable(const std::string& s) {
  try {
    (void)json(s).dump();
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

json record_data(const ResourceRecord& rr) {
  try {
    switch (rr.rtype) {
      case RRType::TXT: {
        auto strings = rr.txt_strings();
        if (std::all_of(strings.begin(), strings.end(), is_utf8_encodable)) return strings;
        break;
      }
      case RRType::A:
        return ipv4_to_string(rr.a_address());
      case RRType::NS:
        return rr.ns_target().to_string();
      case RRType::AAAA:
        if (rr.rdata.size() == 16) {
          char text[INET6_ADDRSTRLEN] = {};
          ::inet_ntop(AF_INET6, rr.rdata.data(), text, sizeof text);
          return std::string(text);
        }
        break;
      case RRType::DNSKEY:
        if (rr.rdata.size() >= 4) {
          unsigned flags = (rr.rdata[0] << 8) | rr.rdata[1];
          return std::to_string(flags) + " " + std::to_string(rr.rdata[2]) + " " + std::to_string(rr.rdata[3]) + " " +
                 base64_encode(OctetView(rr.rdata).subspan(4));
        }
        break;
      default:
        break;
    }
  } catch (const Error&) {
    // malformed typed rdata falls through to the generic form
  }
  return generic_rdata(rr.rdata);
}

ResourceRecord parse_record(const json& j) {
  if (!j.is_object()) throw Error(Errc::ZoneParseError, "record must be an object");
  ResourceRecord rr;
  rr.name = DomainName::parse(j.at("name").get<std::string>());
  auto type_text = j.at("type").get<std::string>();
  auto type = parse_rrtype(type_text);
  if (!type) throw Error(Errc::ZoneParseError, "unknown record type '" + type_text + "'");
  rr.rtype = *type;
  rr.rclass = kClassIN;
  rr.ttl = j.value("ttl", kDefaultTtl);
  const json& data = j.at("data");

  if (data.is_string()) {
    auto text = data.get<std::string>();
    if (auto generic = parse_generic(text)) {
      rr.rdata = std::move(*generic);
      return rr;
    }
    switch (rr.rtype) {
      case RRType::A:
        return ResourceRecord::a(rr.name, rr.ttl, parse_ipv4(text));
      case RRType::NS:
        return ResourceRecord::ns(rr.name, rr.ttl, DomainName::parse(text));
      case RRType::AAAA: {
        rr.rdata.resize(16);
        if (::inet_pton(AF_INET6, text.c_str(), rr.rdata.data()) != 1) {
          throw Error(Errc::ZoneParseError, "bad AAAA address '" + text + "'");
        }
        return rr;
      }
      case RRType::DNSKEY: {
        auto words = split_ws(text);
        if (words.size() < 4) throw Error(Errc::ZoneParseError, "DNSKEY needs flags protocol algorithm key");
        std::string key;
        for (std::size_t i = 3; i < words.size(); ++i) key += words[i];
        return ResourceRecord::dnskey(rr.name, rr.ttl, parse_uint<std::uint16_t>(words[0], "DNSKEY flags"),
                                      parse_uint<std::uint8_t>(words[1], "DNSKEY protocol"),
                                      parse_uint<std::uint8_t>(words[2], "DNSKEY algorithm"), base64_decode(key));
      }
      case RRType::TXT:
        return ResourceRecord::txt(rr.name, rr.ttl, {text});
      default:
        throw Error(Errc::ZoneParseError, rrtype_name(rr.rtype) + " data must use the \\# generic form");
    }
  }
  if (data.is_array() && rr.rtype == RRType::TXT) {
    return ResourceRecord::txt(rr.name, rr.ttl, data.get<std::vector<std::string>>());
  }
  throw Error(Errc::ZoneParseError, "unsupported data for " + rrtype_name(rr.rtype));
}

}  // namespace

std::string ipv4_to_string(const Ipv4& a) {
  return std::to_string(a[0]) + "." + std::to_string(a[1]) + "." + std::to_string(a[2]) + "." + std::to_string(a[3]);
}

Ipv4 parse_ipv4(std::string_view text) {
  Ipv4 out{};
  std::string s(text);
  if (::inet_pton(AF_INET, s.c_str(), out.data()) != 1) {
    throw Error(Errc::InvalidAddress, "not an IPv4 address: '" + s + "'");
  }
  return out;
}

bool is_within(const DomainName& name, const DomainName& origin) {
  const auto& n = name.labels();
  const auto& o = origin.labels();
  if (o.size() > n.size()) return false;
  auto suffix = DomainName::from_labels(std::vector<std::string>(n.end() - static_cast<std::ptrdiff_t>(o.size()), n.end()));
  return suffix == origin;
}

void ZoneConfig::validate() const {
  for (const auto& rr : records) {
    if (!is_within(rr.name, origin)) {
      throw Error(Errc::InvalidZone, rr.name.to_string() + " is outside " + origin.to_string());
    }
    if (rr.rtype == RRType::OPT) throw Error(Errc::InvalidZone, "OPT records cannot live in a zone");
    try {
      if (rr.rtype == RRType::TXT) (void)rr.txt_strings();
      if (rr.rtype == RRType::A) (void)rr.a_address();
      if (rr.rtype == RRType::NS) (void)rr.ns_target();
    } catch (const Error& e) {
      throw Error(Errc::InvalidZone, e.what());
    }
  }
}

std::vector<ResourceRecord> ZoneConfig::lookup(const DomainName& name, RRType type) const {
  std::vector<ResourceRecord> out;
  if (type == RRType::NS && name == origin) {
    for (const auto& ns : ns_targets) out.push_back(ResourceRecord::ns(origin, ns_ttl, ns.name));
  }
  if (type == RRType::A) {
    for (const auto& ns : ns_targets) {
      if (ns.name == name) out.push_back(ResourceRecord::a(ns.name, ns_ttl, ns.address));
    }
  }
  for (const auto& rr : records) {
    if (rr.rtype == type && rr.name == name) out.push_back(rr);
  }
  return out;
}

bool ZoneConfig::has_name(const DomainName& name) const {
  if (name == origin) return true;
  if (std::any_of(ns_targets.begin(), ns_targets.end(), [&](const NsTarget& ns) { return ns.name == name; })) {
    return true;
  }
  return std::any_of(records.begin(), records.end(), [&](const ResourceRecord& rr) { return rr.name == name; });
}

ZoneConfig parse_zone(std::string_view text) {
  ZoneConfig zone;
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw Error(Errc::ZoneParseError, "zone document must be an object");
    zone.origin = DomainName::parse(doc.at("origin").get<std::string>());
    zone.ns_ttl = doc.value("ns_ttl", kDefaultTtl);
    for (const auto& r : doc.value("records", json::array())) zone.records.push_back(parse_record(r));
    for (const auto& n : doc.value("ns", json::array())) {
      zone.ns_targets.push_back(
          {DomainName::parse(n.at("name").get<std::string>()), parse_ipv4(n.at("address").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ZoneParseError, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ZoneParseError) throw;
    throw Error(Errc::ZoneParseError, e.what());
  }
  zone.validate();
  return zone;
}

std::string print_zone(const ZoneConfig& zone) {
  json doc;
  doc["origin"] = zone.origin.to_string();
  doc["ns_ttl"] = zone.ns_ttl;
  doc["records"] = json::array();
  for (const auto& rr : zone.records) {
    doc["records"].push_back(
        {{"name", rr.name.to_string()}, {"type", rrtype_name(rr.rtype)}, {"ttl", rr.ttl}, {"data", record_data(rr)}});
  }
  doc["ns"] = json::array();
  for (const auto& ns : zone.ns_targets) {
    doc["ns"].push_back({{"name", ns.name.to_string()}, {"address", ipv4_to_string(ns.address)}});
  }
  return doc.dump(2) + "\n";
}

ZoneConfig load_zone_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ZoneParseError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_zone(buf.str());
}

void save_zone_file(const ZoneConfig& zone, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ZoneParseError, "cannot write " + path.string());
  out << print_zone(zone);
}

std::size_t minimal_txt_response_size(const DomainName& origin) {
  std::size_t w = origin.wire_length();
  return kHeaderSize + (w + 4) + (w + kRecordFixed + 1) + kOptSize;
}

ZoneConfig generate_txt_zone(const DomainName& origin, std::size_t target, std::size_t ns_count, Ipv4 first_address) {
  if (target > kMaxTarget) throw Error(Errc::InvalidZone, "target above 60000 octets");
  std::size_t size = minimal_txt_response_size(origin);
  if (target < size) {
    throw Error(Errc::TargetTooSmall, "target " + std::to_string(target) + " below minimal response of " +
                                          std::to_string(size) + " octets");
  }
  if (static_cast<std::size_t>(first_address[3]) + ns_count > 256) {
    throw Error(Errc::InvalidZone, "too many NS targets for the address block");
  }

  // Lay out string lengths first; every step adds exactly what it costs.
  const std::size_t new_record_cost = origin.wire_length() + kRecordFixed + 1;
  std::vector<std::vector<std::size_t>> layout{{0}};
  while (size < target) {
    std::size_t need = target - size;
    auto& rec = layout.back();
    if (rec.back() < kMaxCharacterString) {
      std::size_t grow = std::min(need, kMaxCharacterString - rec.back());
      rec.back() += grow;
      size += grow;
    } else if (rec.size() < kStringsPerRecord || need < new_record_cost) {
      rec.push_back(0);
      size += 1;
    } else {
      layout.push_back({0});
      size += new_record_cost;
    }
  }

  static constexpr std::string_view kFill = "abcdefghijklmnopqrstuvwxyz0123456789";
  ZoneConfig zone;
  zone.origin = origin;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    std::vector<std::string> strings;
    for (std::size_t j = 0; j < layout[i].size(); ++j) {
      std::string s = "v=lab" + std::to_string(i) + "." + std::to_string(j) + " ";
      while (s.size() < layout[i][j]) s += kFill[s.size() % kFill.size()];
      s.resize(layout[i][j]);
      strings.push_back(std::move(s));
    }
    zone.records.push_back(ResourceRecord::txt(origin, kDefaultTtl, strings));
  }
  for (std::size_t i = 0; i < ns_count; ++i) {
    Ipv4 address = first_address;
    address[3] = static_cast<std::uint8_t>(first_address[3] + i);
    std::vector<std::string> labels{"ns" + std::to_string(i + 1)};
    labels.insert(labels.end(), origin.labels().begin(), origin.labels().end());
    zone.ns_targets.push_back({DomainName::from_labels(std::move(labels)), address});
  }
  zone.validate();
  return zone;
}

std::vector<ResourceRecord> generate_dnskey_rrset(const DomainName& owner, std::size_t count, std::size_t key_octets) {
  std::vector<ResourceRecord> out;
  std::uint32_t state = 0x9E3779B9u;
  for (std::size_t k = 0; k < count; ++k) {
    Octets key(key_octets);
    for (auto& b : key) {
      state = state * 1664525u + 1013904223u;
      b = static_cast<std::uint8_t>(state >> 24);
    }
    std::uint16_t flags = k == 0 ? 257 : 256;  // one KSK, the rest ZSKs
    out.push_back(ResourceRecord::dnskey(owner, kDefaultTtl, flags, 3, 8, key));
  }
  return out;
}

std::string base64_encode(OctetView data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < data.size(); i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    for (int shift : {18, 12, 6, 0}) out += kBase64Alphabet[(v >> shift) & 0x3F];
  }
  if (std::size_t rest = data.size() - i; rest > 0) {
    std::uint32_t v = data[i] << 16;
    if (rest == 2) v |= data[i + 1] << 8;
    out += kBase64Alphabet[(v >> 18) & 0x3F];
    out += kBase64Alphabet[(v >> 12) & 0x3F];
    out += rest == 2 ? kBase64Alphabet[(v >> 6) & 0x3F] : '=';
    out += '=';
  }
  return out;
}

Octets base64_decode(std::string_view text) {
  Octets out;
  std::uint32_t acc = 0;
  int bits = 0;
  std::size_t padding = 0;
  for (char c : text) {
    if (c == '=') {
      ++padding;
      continue;
    }
    if (padding > 0) throw Error(Errc::ZoneParseError, "base64 data after padding");
    auto pos = kBase64Alphabet.find(c);
    if (pos == std::string_view::npos) throw Error(Errc::ZoneParseError, "bad base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> bits));
    }
  }
  if (padding > 2) throw Error(Errc::ZoneParseError, "too much base64 padding");
  return out;
}

}  // namespace ednslab
