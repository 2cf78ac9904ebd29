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

#include "ednslab/wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_set>

#include "ednslab/error.hpp"

namespace ednslab {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return lower(x) == lower(y);
         });
}

void put16(Octets& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put32(Octets& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}

// Bounds-checked big-endian reader over a whole message.
class Reader {
 public:
  Reader(OctetView buf, std::size_t pos) : buf_(buf), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t remaining() const { return pos_ <= buf_.size() ? buf_.size() - pos_ : 0; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(Errc::TruncatedBuffer, std::string("buffer ends inside ") + what);
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return buf_[pos_++];
  }

  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>((buf_[pos_] << 8) | buf_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32(const char* what) {
    std::uint32_t hi = u16(what);
    return (hi << 16) | u16(what);
  }

  Octets bytes(std::size_t n, const char* what) {
    need(n, what);
    Octets out(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
               buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  DomainName name() {
    auto decoded = decode_name(buf_, pos_);
    pos_ = decoded.next_offset;
    return decoded.name;
  }

 private:
  OctetView buf_;
  std::size_t pos_;
};

void check_labels(const std::vector<std::string>& labels) {
  std::size_t total = 1;
  for (const auto& label : labels) {
    if (label.empty()) throw Error(Errc::InvalidName, "empty label");
    if (label.size() > kMaxLabelLength) {
      throw Error(Errc::LabelTooLong, "label of " + std::to_string(label.size()) + " octets");
    }
    total += label.size() + 1;
  }
  if (total > kMaxNameLength) {
    throw Error(Errc::NameTooLong, "name encodes to " + std::to_string(total) + " octets");
  }
}

void append_record(Octets& out, const ResourceRecord& rr) {
  if (rr.rdata.size() > 0xFFFF) throw Error(Errc::MessageTooLarge, "rdata exceeds 65535 octets");
  append_name(out, rr.name);
  put16(out, static_cast<std::uint16_t>(rr.rtype));
  put16(out, rr.rclass);
  put32(out, rr.ttl);
  put16(out, static_cast<std::uint16_t>(rr.rdata.size()));
  out.insert(out.end(), rr.rdata.begin(), rr.rdata.end());
}

ResourceRecord read_record(Reader& in, OctetView whole, DecodeDiagnostics* diag) {
  ResourceRecord rr;
  rr.name = in.name();
  rr.rtype = static_cast<RRType>(in.u16("record type"));
  rr.rclass = in.u16("record class");
  rr.ttl = in.u32("record ttl");
  std::uint16_t rdlength = in.u16("rdata length");
  in.need(rdlength, "rdata");
  std::size_t rdata_start = in.pos();
  if (rr.rtype == RRType::NS) {
    // Expand a compressed target so rdata stays meaningful outside this message.
    auto target = decode_name(whole, rdata_start);
    if (target.next_offset != rdata_start + rdlength) {
      throw Error(Errc::TruncatedBuffer, "NS rdata length disagrees with target name");
    }
    rr.rdata = encode_name(target.name);
    in.seek(rdata_start + rdlength);
  } else {
    rr.rdata = in.bytes(rdlength, "rdata");
  }
  if (diag != nullptr && rr.rtype != RRType::OPT && rr.rclass != kClassIN) {
    diag->notes.push_back("UnsupportedClass: " + std::to_string(rr.rclass) + " on " + rr.name.to_string() +
                          " " + rrtype_name(rr.rtype));
  }
  return rr;
}

}  // namespace

// --- record types -----------------------------------------------------------

std::string rrtype_name(RRType type) {
  switch (type) {
    case RRType::A: return "A";
    case RRType::NS: return "NS";
    case RRType::TXT: return "TXT";
    case RRType::AAAA: return "AAAA";
    case RRType::OPT: return "OPT";
    case RRType::DNSKEY: return "DNSKEY";
  }
  return "TYPE" + std::to_string(static_cast<std::uint16_t>(type));
}

std::optional<RRType> parse_rrtype(std::string_view text) {
  for (RRType t : {RRType::A, RRType::NS, RRType::TXT, RRType::AAAA, RRType::OPT, RRType::DNSKEY}) {
    if (iequals(text, rrtype_name(t))) return t;
  }
  if (text.size() > 4 && iequals(text.substr(0, 4), "TYPE")) {
    std::uint16_t value = 0;
    auto digits = text.substr(4);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) return static_cast<RRType>(value);
  }
  return std::nullopt;
}

// --- DomainName -------------------------------------------------------------

DomainName DomainName::from_labels(std::vector<std::string> labels) {
  check_labels(labels);
  DomainName name;
  name.labels_ = std::move(labels);
  return name;
}

DomainName DomainName::parse(std::string_view text) {
  if (text.empty() || text == ".") return {};
  if (text.back() == '.') text.remove_suffix(1);
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (true) {
    auto dot = text.find('.', start);
    labels.emplace_back(text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return from_labels(std::move(labels));
}

std::size_t DomainName::wire_length() const noexcept {
  std::size_t total = 1;
  for (const auto& label : labels_) total += label.size() + 1;
  return total;
}

std::string DomainName::canonical() const {
  std::string out = to_string();
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::string DomainName::to_string() const {
  if (labels_.empty()) return ".";
  std::string out;
  for (const auto& label : labels_) {
    if (!out.empty()) out += '.';
    out += label;
  }
  return out;
}

bool operator==(const DomainName& a, const DomainName& b) noexcept {
  return std::equal(a.labels_.begin(), a.labels_.end(), b.labels_.begin(), b.labels_.end(), iequals);
}

// --- flags ------------------------------------------------------------------

std::uint16_t pack_flags(const HeaderFlags& f) noexcept {
  std::uint16_t word = 0;
  if (f.qr) word |= 0x8000;
  word |= static_cast<std::uint16_t>((f.opcode & 0x0F) << 11);
  if (f.aa) word |= 0x0400;
  if (f.tc) word |= 0x0200;
  if (f.rd) word |= 0x0100;
  if (f.ra) word |= 0x0080;
  word |= static_cast<std::uint16_t>(f.rcode & 0x0F);
  return word;
}

HeaderFlags unpack_flags(std::uint16_t word) noexcept {
  HeaderFlags f;
  f.qr = (word & 0x8000) != 0;
  f.opcode = static_cast<std::uint8_t>((word >> 11) & 0x0F);
  f.aa = (word & 0x0400) != 0;
  f.tc = (word & 0x0200) != 0;
  f.rd = (word & 0x0100) != 0;
  f.ra = (word & 0x0080) != 0;
  f.z = static_cast<std::uint8_t>((word >> 4) & 0x07);
  f.rcode = static_cast<std::uint8_t>(word & 0x0F);
  return f;
}

// --- records ------------------------------------------------------------------

ResourceRecord ResourceRecord::txt(DomainName name, std::uint32_t ttl, const std::vector<std::string>& strings) {
  ResourceRecord rr{std::move(name), RRType::TXT, kClassIN, ttl, {}};
  for (const auto& s : strings) {
    if (s.size() > kMaxCharacterString) {
      throw Error(Errc::InvalidRdata, "TXT character-string of " + std::to_string(s.size()) + " octets");
    }
    rr.rdata.push_back(static_cast<std::uint8_t>(s.size()));
    rr.rdata.insert(rr.rdata.end(), s.begin(), s.end());
  }
  return rr;
}

ResourceRecord ResourceRecord::ns(DomainName name, std::uint32_t ttl, const DomainName& target) {
  return {std::move(name), RRType::NS, kClassIN, ttl, encode_name(target)};
}

ResourceRecord ResourceRecord::a(DomainName name, std::uint32_t ttl, std::array<std::uint8_t, 4> address) {
  return {std::move(name), RRType::A, kClassIN, ttl, Octets(address.begin(), address.end())};
}

ResourceRecord ResourceRecord::dnskey(DomainName name, std::uint32_t ttl, std::uint16_t flags, std::uint8_t protocol,
                                      std::uint8_t algorithm, OctetView public_key) {
  ResourceRecord rr{std::move(name), RRType::DNSKEY, kClassIN, ttl, {}};
  put16(rr.rdata, flags);
  rr.rdata.push_back(protocol);
  rr.rdata.push_back(algorithm);
  rr.rdata.insert(rr.rdata.end(), public_key.begin(), public_key.end());
  return rr;
}

std::vector<std::string> ResourceRecord::txt_strings() const {
  if (rtype != RRType::TXT) throw Error(Errc::InvalidRdata, "not a TXT record");
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < rdata.size()) {
    std::size_t len = rdata[pos++];
    if (pos + len > rdata.size()) throw Error(Errc::InvalidRdata, "TXT character-string overruns rdata");
    out.emplace_back(rdata.begin() + static_cast<std::ptrdiff_t>(pos),
                     rdata.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

DomainName ResourceRecord::ns_target() const {
  if (rtype != RRType::NS) throw Error(Errc::InvalidRdata, "not an NS record");
  try {
    auto decoded = decode_name(rdata, 0);
    if (decoded.next_offset != rdata.size()) throw Error(Errc::InvalidRdata, "trailing octets after NS target");
    return decoded.name;
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidRdata) throw;
    throw Error(Errc::InvalidRdata, e.what());
  }
}

std::array<std::uint8_t, 4> ResourceRecord::a_address() const {
  if (rtype != RRType::A || rdata.size() != 4) throw Error(Errc::InvalidRdata, "not a 4-octet A record");
  return {rdata[0], rdata[1], rdata[2], rdata[3]};
}

ResourceRecord EdnsOpt::to_record() const {
  std::uint32_t ttl = (static_cast<std::uint32_t>(extended_rcode) << 24) | (static_cast<std::uint32_t>(version) << 16) |
                      (do_bit ? 0x8000u : 0u);
  return {DomainName{}, RRType::OPT, udp_payload_size, ttl, options};
}

EdnsOpt EdnsOpt::from_record(const ResourceRecord& rr) {
  EdnsOpt opt;
  opt.udp_payload_size = rr.rclass;
  opt.extended_rcode = static_cast<std::uint8_t>(rr.ttl >> 24);
  opt.version = static_cast<std::uint8_t>(rr.ttl >> 16);
  opt.do_bit = (rr.ttl & 0x8000u) != 0;
  opt.options = rr.rdata;
  return opt;
}

SectionCounts DnsMessage::counts() const noexcept {
  return {static_cast<std::uint16_t>(questions.size()), static_cast<std::uint16_t>(answers.size()),
          static_cast<std::uint16_t>(authority.size()),
          static_cast<std::uint16_t>(additional.size() + (edns ? 1 : 0))};
}

// --- names ------------------------------------------------------------------

void append_name(Octets& out, const DomainName& name) {
  for (const auto& label : name.labels()) {
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
  }
  out.push_back(0);
}

Octets encode_name(const DomainName& name) {
  Octets out;
  out.reserve(name.wire_length());
  append_name(out, name);
  return out;
}

DecodedName decode_name(OctetView buffer, std::size_t offset) {
  std::vector<std::string> labels;
  std::unordered_set<std::size_t> visited;
  std::size_t pos = offset;
  std::optional<std::size_t> next;  // set at the first pointer
  std::size_t encoded = 1;

  while (true) {
    if (pos >= buffer.size()) throw Error(Errc::TruncatedBuffer, "name runs past end of buffer");
    if (!visited.insert(pos).second) {
      throw Error(Errc::PointerLoop, "offset " + std::to_string(pos) + " visited twice");
    }
    std::uint8_t len = buffer[pos];
    if ((len & 0xC0) == 0xC0) {
      if (pos + 1 >= buffer.size()) throw Error(Errc::TruncatedBuffer, "compression pointer cut short");
      std::size_t target = (static_cast<std::size_t>(len & 0x3F) << 8) | buffer[pos + 1];
      if (target >= buffer.size()) {
        throw Error(Errc::PointerOutOfRange, "pointer to " + std::to_string(target));
      }
      if (!next) next = pos + 2;
      pos = target;
      continue;
    }
    if ((len & 0xC0) != 0) throw Error(Errc::InvalidName, "unsupported label type");
    if (len == 0) {
      if (!next) next = pos + 1;
      break;
    }
    if (pos + 1 + len > buffer.size()) throw Error(Errc::TruncatedBuffer, "label runs past end of buffer");
    encoded += 1 + len;
    if (encoded > kMaxNameLength) throw Error(Errc::NameTooLong, "decoded name exceeds 255 octets");
    labels.emplace_back(reinterpret_cast<const char*>(buffer.data() + pos + 1), len);
    pos += 1 + len;
  }

  DecodedName out;
  out.name = DomainName::from_labels(std::move(labels));
  out.next_offset = *next;
  return out;
}

// --- messages -----------------------------------------------------------------

Octets encode_message(const DnsMessage& m) {
  Octets out;
  out.reserve(512);
  auto counts = m.counts();
  if (m.questions.size() > 0xFFFF || m.answers.size() > 0xFFFF || m.authority.size() > 0xFFFF ||
      m.additional.size() + (m.edns ? 1 : 0) > 0xFFFF) {
    throw Error(Errc::MessageTooLarge, "section count exceeds 65535");
  }
  put16(out, m.header.id);
  put16(out, pack_flags(m.header.flags));
  put16(out, counts.questions);
  put16(out, counts.answers);
  put16(out, counts.authority);
  put16(out, counts.additional);
  for (const auto& q : m.questions) {
    append_name(out, q.name);
    put16(out, static_cast<std::uint16_t>(q.qtype));
    put16(out, q.qclass);
  }
  auto check_size = [&out] {
    if (out.size() > kMaxMessageSize) {
      throw Error(Errc::MessageTooLarge, "message reaches " + std::to_string(out.size()) + " octets");
    }
  };
  for (const auto* section : {&m.answers, &m.authority, &m.additional}) {
    for (const auto& rr : *section) {
      append_record(out, rr);
      check_size();
    }
  }
  if (m.edns) append_record(out, m.edns->to_record());
  check_size();
  return out;
}

DnsMessage decode_message(OctetView bytes, DecodeDiagnostics* diag) {
  Reader in(bytes, 0);
  in.need(kHeaderSize, "header");
  DnsMessage m;
  m.header.id = in.u16("header");
  m.header.flags = unpack_flags(in.u16("header"));
  if (diag != nullptr && m.header.flags.z != 0) diag->nonzero_z = true;
  SectionCounts counts;
  counts.questions = in.u16("header");
  counts.answers = in.u16("header");
  counts.authority = in.u16("header");
  counts.additional = in.u16("header");

  m.questions.reserve(counts.questions);
  for (std::uint16_t i = 0; i < counts.questions; ++i) {
    Question q;
    q.name = in.name();
    q.qtype = static_cast<RRType>(in.u16("question type"));
    q.qclass = in.u16("question class");
    m.questions.push_back(std::move(q));
  }

  auto read_section = [&](std::uint16_t count, std::vector<ResourceRecord>& into, const char* section) {
    for (std::uint16_t i = 0; i < count; ++i) {
      auto rr = read_record(in, bytes, diag);
      if (rr.rtype == RRType::OPT) {
        throw Error(Errc::OptInWrongSection, std::string("OPT record in ") + section + " section");
      }
      into.push_back(std::move(rr));
    }
  };
  read_section(counts.answers, m.answers, "answer");
  read_section(counts.authority, m.authority, "authority");

  for (std::uint16_t i = 0; i < counts.additional; ++i) {
    auto rr = read_record(in, bytes, diag);
    if (rr.rtype == RRType::OPT) {
      if (m.edns) throw Error(Errc::MultipleOpt, "more than one OPT record");
      if (diag != nullptr && !rr.name.is_root()) diag->notes.push_back("OPT owner name is not the root");
      m.edns = EdnsOpt::from_record(rr);
    } else {
      m.additional.push_back(std::move(rr));
    }
  }
  if (diag != nullptr) diag->trailing_octets = in.remaining();
  return m;
}

}  // namespace ednslab
