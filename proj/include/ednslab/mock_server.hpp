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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ednslab/endpoint.hpp"
#include "ednslab/transport.hpp"
#include "ednslab/wire.hpp"
#include "ednslab/zone.hpp"

namespace ednslab {

/// How the mock treats EDNS over UDP. TCP always gets the full answer.
enum class ServerPolicy {
  FullEdns,         // honor the advertised size, echo OPT
  IgnoreEdns512,    // ignore OPT, truncate above 512, no OPT in reply
  EchoOptTruncate,  // echo OPT, still truncate above 512
  DropEdnsQuery,    // no reply at all to OPT-bearing queries
  FormerrOnEdns,    // FORMERR to OPT-bearing queries
};

/// "FULL_EDNS", "IGNORE_EDNS_512", "ECHO_OPT_TRUNCATE", "DROP_EDNS_QUERY", "FORMERR_ON_EDNS".
std::string policy_name(ServerPolicy policy);
std::optional<ServerPolicy> parse_policy(std::string_view text);

inline constexpr std::size_t kLegacyUdpLimit = 512;
inline constexpr std::uint16_t kEchoedUdpSize = 4096;

/// Largest UDP response the policy allows for this query.
std::size_t effective_udp_limit(const DnsMessage& query, ServerPolicy policy);

/// The mock's answer, or nullopt for silence. Pure and deterministic.
std::optional<DnsMessage> respond(const DnsMessage& query, const ZoneConfig& zone, ServerPolicy policy,
                                  TransportKind transport);

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t udp_port = 5300;  // 0 picks a free port
  std::uint16_t tcp_port = 5300;  // 0 follows the UDP port when possible
};

/// Loopback authoritative server answering over UDP and TCP on worker threads.
/// Stops and joins on destruction.
class MockServer {
 public:
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::uint16_t udp_port() const noexcept;
  std::uint16_t tcp_port() const noexcept;
  /// Host plus the UDP port.
  Endpoint endpoint() const;
  const ZoneConfig& zone() const noexcept;
  ServerPolicy policy() const noexcept;

  std::size_t udp_queries() const noexcept;
  std::size_t tcp_queries() const noexcept;

  /// Idempotent. After it returns no further queries are answered.
  void stop();

  struct Impl;

 private:
  friend std::unique_ptr<MockServer> serve(ZoneConfig zone, ServerPolicy policy, const ServeOptions& options);
  explicit MockServer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Throws Error{BindFailure}.
std::unique_ptr<MockServer> serve(ZoneConfig zone, ServerPolicy policy, const ServeOptions& options = {});

}  // namespace ednslab
