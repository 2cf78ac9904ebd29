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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ednslab/endpoint.hpp"
#include "ednslab/error.hpp"
#include "ednslab/wire.hpp"

namespace ednslab {

enum class TransportKind { Udp, Tcp };

std::string transport_name(TransportKind kind);

struct ExchangeRecord {
  TransportKind transport = TransportKind::Udp;
  std::size_t request_size = 0;
  std::size_t response_size = 0;  // octets as received, length prefix excluded
  double rtt_ms = 0.0;
  DnsMessage response;
  Endpoint server;
};

enum class EventKind { UdpSent, UdpReceived, TcpConnected, TcpSent, TcpReceived, TimedOut, Retried };

std::string event_name(EventKind kind);
std::optional<EventKind> parse_event_name(std::string_view text);

struct TranscriptEvent {
  EventKind kind;
  bool tc = false;  // only meaningful for UdpReceived

  bool operator==(const TranscriptEvent&) const = default;
};

using SessionTranscript = std::vector<TranscriptEvent>;

std::string describe(const SessionTranscript& transcript);

/// Transport failure with whatever was observed before it.
class TransportError : public Error {
 public:
  TransportError(Errc code, const std::string& what, SessionTranscript transcript = {},
                 std::optional<ExchangeRecord> udp = std::nullopt, Octets raw_response = {})
      : Error(code, what), transcript_(std::move(transcript)), udp_(std::move(udp)), raw_(std::move(raw_response)) {}

  const SessionTranscript& transcript() const noexcept { return transcript_; }
  /// The truncated UDP exchange that preceded a failed TCP fallback.
  const std::optional<ExchangeRecord>& udp_record() const noexcept { return udp_; }
  /// Undecodable response bytes (DecodeError only).
  const Octets& raw_response() const noexcept { return raw_; }

 private:
  SessionTranscript transcript_;
  std::optional<ExchangeRecord> udp_;
  Octets raw_;
};

struct ExchangeOptions {
  std::chrono::milliseconds timeout{3000};
  unsigned retries = 2;
};

std::uint16_t random_transaction_id();

/// 2-octet big-endian length prefix followed by the message.
Octets frame_tcp_message(OctetView message);

/// Sends the query over UDP, with a fresh random ID on every attempt, and returns
/// the first response whose ID and question match. Events are appended to
/// `transcript` when given. Throws TransportError{Timeout | IdMismatchFlood |
/// DecodeError | MessageTooLarge}.
ExchangeRecord udp_exchange(const Endpoint& server, const DnsMessage& message, std::chrono::milliseconds timeout,
                            unsigned retries, SessionTranscript* transcript = nullptr);

/// One length-framed query/response per connection. Throws TransportError{Timeout |
/// ConnectionRefused | FramingError | DecodeError}.
ExchangeRecord tcp_exchange(const Endpoint& server, const DnsMessage& message, std::chrono::milliseconds timeout,
                            SessionTranscript* transcript = nullptr);

struct FallbackResult {
  ExchangeRecord final;
  SessionTranscript transcript;
  ExchangeRecord udp;  // the UDP exchange; equals `final` when no fallback happened
};

/// UDP first; retries the same question over TCP only when the UDP reply has TC
/// set. A UDP timeout is terminal. Errors carry the transcript so far; a failed
/// TCP leg raises TcpFallbackFailed with the truncated UDP record attached.
FallbackResult resolve_with_fallback(const Endpoint& server, const DnsMessage& message,
                                     const ExchangeOptions& options = {});

}  // namespace ednslab
