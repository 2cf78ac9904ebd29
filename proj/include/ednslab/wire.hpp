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

/**
 * DNS message wire format.
 *
 *  +---------------------+
 *  | Header              |  12 octets
 *  +---------------------+
 *  | Question            |
 *  +---------------------+
 *  | Answer              |
 *  +---------------------+
 *  | Authority           |
 *  +---------------------+
 *  | Additional          |  carries at most one OPT pseudo-RR
 *  +---------------------+
 *
 *  Header flags word:
 *  +--+--+--+--+--+--+--+--+--+--+--+--+--+--+--+--+
 *  |QR|   Opcode  |AA|TC|RD|RA|   Z    |   RCODE   |
 *  +--+--+--+--+--+--+--+--+--+--+--+--+--+--+--+--+
 *
 * The encoder never emits compression pointers. The decoder follows them.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ednslab {

using Octets = std::vector<std::uint8_t>;
using OctetView = std::span<const std::uint8_t>;

inline constexpr std::size_t kHeaderSize = 12;
inline constexpr std::size_t kMaxMessageSize = 65535;
inline constexpr std::size_t kMaxLabelLength = 63;
inline constexpr std::size_t kMaxNameLength = 255;
inline constexpr std::size_t kMaxCharacterString = 255;
inline constexpr std::uint16_t kClassIN = 1;

// Any 16-bit value is representable; the named ones are those the lab speaks.
enum class RRType : std::uint16_t {
  A = 1,
  NS = 2,
  TXT = 16,
  AAAA = 28,
  OPT = 41,
  DNSKEY = 48,
};

std::string rrtype_name(RRType type);
/// Accepts mnemonics ("TXT", case-insensitive) and the generic "TYPE123" form.
std::optional<RRType> parse_rrtype(std::string_view text);

namespace rcode {
inline constexpr std::uint8_t kNoError = 0;
inline constexpr std::uint8_t kFormErr = 1;
inline constexpr std::uint8_t kServFail = 2;
inline constexpr std::uint8_t kNXDomain = 3;
inline constexpr std::uint8_t kNotImp = 4;
inline constexpr std::uint8_t kRefused = 5;
}  // namespace rcode

/// A sequence of labels. Case is preserved; equality is case-insensitive.
class DomainName {
 public:
  DomainName() = default;  // root

  /// Throws Error{LabelTooLong | NameTooLong | InvalidName}.
  static DomainName from_labels(std::vector<std::string> labels);
  /// Dotted text form; a trailing dot is optional and "." is the root.
  static DomainName parse(std::string_view text);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool is_root() const noexcept { return labels_.empty(); }
  /// Encoded length including length octets and the terminal zero.
  std::size_t wire_length() const noexcept;
  /// Lowercased dotted form, used as an ordering and lookup key.
  std::string canonical() const;
  /// Dotted form without trailing dot; "." for the root.
  std::string to_string() const;

  friend bool operator==(const DomainName& a, const DomainName& b) noexcept;
  friend bool operator<(const DomainName& a, const DomainName& b) { return a.canonical() < b.canonical(); }

 private:
  std::vector<std::string> labels_;
};

struct HeaderFlags {
  bool qr = false;
  std::uint8_t opcode = 0;  // 4 bits
  bool aa = false;
  bool tc = false;
  bool rd = false;
  bool ra = false;
  std::uint8_t z = 0;  // 3 bits; kept on decode, always packed as zero
  std::uint8_t rcode = 0;  // 4 bits

  bool operator==(const HeaderFlags&) const = default;
};

std::uint16_t pack_flags(const HeaderFlags& flags) noexcept;
HeaderFlags unpack_flags(std::uint16_t word) noexcept;

struct Header {
  std::uint16_t id = 0;
  HeaderFlags flags;

  bool operator==(const Header&) const = default;
};

struct SectionCounts {
  std::uint16_t questions = 0;
  std::uint16_t answers = 0;
  std::uint16_t authority = 0;
  std::uint16_t additional = 0;

  bool operator==(const SectionCounts&) const = default;
};

struct Question {
  DomainName name;
  RRType qtype = RRType::A;
  std::uint16_t qclass = kClassIN;

  bool operator==(const Question&) const = default;
};

struct ResourceRecord {
  DomainName name;
  RRType rtype = RRType::A;
  std::uint16_t rclass = kClassIN;
  std::uint32_t ttl = 0;
  Octets rdata;  // uncompressed wire form

  bool operator==(const ResourceRecord&) const = default;

  static ResourceRecord txt(DomainName name, std::uint32_t ttl, const std::vector<std::string>& strings);
  static ResourceRecord ns(DomainName name, std::uint32_t ttl, const DomainName& target);
  static ResourceRecord a(DomainName name, std::uint32_t ttl, std::array<std::uint8_t, 4> address);
  static ResourceRecord dnskey(DomainName name, std::uint32_t ttl, std::uint16_t flags, std::uint8_t protocol,
                               std::uint8_t algorithm, OctetView public_key);

  // Decoded views. Each throws Error{InvalidRdata} when rtype or rdata do not fit.
  std::vector<std::string> txt_strings() const;
  DomainName ns_target() const;
  std::array<std::uint8_t, 4> a_address() const;
};

/// EDNS(0) parameters. On the wire: owner root, TYPE 41, CLASS = UDP payload
/// size, TTL = extended_rcode(31..24) | version(23..16) | DO(15) | zero(14..0).
struct EdnsOpt {
  std::uint16_t udp_payload_size = 4096;
  std::uint8_t version = 0;
  bool do_bit = false;
  std::uint8_t extended_rcode = 0;
  Octets options;

  bool operator==(const EdnsOpt&) const = default;

  ResourceRecord to_record() const;
  static EdnsOpt from_record(const ResourceRecord& rr);
};

struct DnsMessage {
  Header header;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authority;
  std::vector<ResourceRecord> additional;  // never contains the OPT record
  std::optional<EdnsOpt> edns;

  bool operator==(const DnsMessage&) const = default;

  /// Counts as they appear on the wire; the OPT record counts as additional.
  SectionCounts counts() const noexcept;
};

Octets encode_name(const DomainName& name);
void append_name(Octets& out, const DomainName& name);

struct DecodedName {
  DomainName name;
  std::size_t next_offset = 0;  // just past the in-place encoding
};

/// Follows compression pointers. Throws Error{PointerLoop | PointerOutOfRange |
/// TruncatedBuffer | NameTooLong | InvalidName}.
DecodedName decode_name(OctetView buffer, std::size_t offset);

/// Throws Error{MessageTooLarge} past 65535 octets.
Octets encode_message(const DnsMessage& message);

/// Non-fatal findings collected while decoding.
struct DecodeDiagnostics {
  bool nonzero_z = false;
  std::size_t trailing_octets = 0;
  std::vector<std::string> notes;  // e.g. UnsupportedClass
};

/// Throws Error{TruncatedBuffer | PointerLoop | PointerOutOfRange | NameTooLong |
/// InvalidName | MultipleOpt | OptInWrongSection}.
DnsMessage decode_message(OctetView bytes, DecodeDiagnostics* diagnostics = nullptr);

}  // namespace ednslab
