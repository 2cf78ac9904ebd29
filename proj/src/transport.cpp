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

#include "ednslab/transport.hpp"

#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>

#include <cerrno>
#include <cstring>
#include <random>

#include "socket.hpp"

namespace ednslab {

using detail::Clock;

namespace {

constexpr std::size_t kReceiveBuffer = 65535;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void note(SessionTranscript* transcript, EventKind kind, bool tc = false) {
  if (transcript != nullptr) transcript->push_back({kind, tc});
}

SessionTranscript snapshot(const SessionTranscript* transcript) {
  return transcript != nullptr ? *transcript : SessionTranscript{};
}

bool questions_match(const DnsMessage& query, const DnsMessage& response) {
  // FORMERR and similar replies may omit the question section entirely.
  return response.questions.empty() || response.questions == query.questions;
}

// Sends everything or throws; the socket is non-blocking.
void send_all(int fd, OctetView data, Clock::time_point deadline, const SessionTranscript* transcript) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n > 0) {
      sent += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
      if (!detail::wait_for(fd, POLLOUT, deadline)) {
        throw TransportError(Errc::Timeout, "TCP send timed out", snapshot(transcript));
      }
      continue;
    }
    throw TransportError(Errc::SocketError, std::string("send(): ") + std::strerror(errno), snapshot(transcript));
  }
}

// Reads exactly `want` octets. Returns fewer only on orderly EOF.
std::size_t recv_exact(int fd, std::uint8_t* into, std::size_t want, Clock::time_point deadline,
                       const SessionTranscript* transcript) {
  std::size_t got = 0;
  while (got < want) {
    ssize_t n = ::recv(fd, into + got, want - got, 0);
    if (n > 0) {
      got += static_cast<std::size_t>(n);
      continue;
    }
    if (n == 0) return got;
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
      if (!detail::wait_for(fd, POLLIN, deadline)) {
        throw TransportError(Errc::Timeout, "TCP receive timed out", snapshot(transcript));
      }
      continue;
    }
    if (errno == ECONNRESET) return got;
    throw TransportError(Errc::SocketError, std::string("recv(): ") + std::strerror(errno), snapshot(transcript));
  }
  return got;
}

}  // namespace

std::string transport_name(TransportKind kind) { return kind == TransportKind::Udp ? "UDP" : "TCP"; }

std::string event_name(EventKind kind) {
  switch (kind) {
    case EventKind::UdpSent: return "UdpSent";
    case EventKind::UdpReceived: return "UdpReceived";
    case EventKind::TcpConnected: return "TcpConnected";
    case EventKind::TcpSent: return "TcpSent";
    case EventKind::TcpReceived: return "TcpReceived";
    case EventKind::TimedOut: return "TimedOut";
    case EventKind::Retried: return "Retried";
  }
  return "?";
}

std::optional<EventKind> parse_event_name(std::string_view text) {
  for (EventKind k : {EventKind::UdpSent, EventKind::UdpReceived, EventKind::TcpConnected, EventKind::TcpSent,
                      EventKind::TcpReceived, EventKind::TimedOut, EventKind::Retried}) {
    if (text == event_name(k)) return k;
  }
  return std::nullopt;
}

std::string describe(const SessionTranscript& transcript) {
  std::string out = "[";
  for (const auto& ev : transcript) {
    if (out.size() > 1) out += ", ";
    out += event_name(ev.kind);
    if (ev.kind == EventKind::UdpReceived) out += ev.tc ? "(tc=1)" : "(tc=0)";
  }
  return out + "]";
}

std::uint16_t random_transaction_id() {
  thread_local std::mt19937 rng{std::random_device{}()};
  return static_cast<std::uint16_t>(std::uniform_int_distribution<unsigned>(0, 0xFFFF)(rng));
}

Octets frame_tcp_message(OctetView message) {
  if (message.size() > kMaxMessageSize) throw Error(Errc::MessageTooLarge, "cannot frame more than 65535 octets");
  Octets out;
  out.reserve(message.size() + 2);
  out.push_back(static_cast<std::uint8_t>(message.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(message.size()));
  out.insert(out.end(), message.begin(), message.end());
  return out;
}

ExchangeRecord udp_exchange(const Endpoint& server, const DnsMessage& message, std::chrono::milliseconds timeout,
                            unsigned retries, SessionTranscript* transcript) {
  auto server_addr = detail::to_sockaddr(server);
  auto sock = detail::open_socket(server_addr.family(), SOCK_DGRAM);
  detail::set_nonblocking(sock.fd());

  DnsMessage attempt = message;
  Octets buffer(kReceiveBuffer);
  bool saw_mismatch = false;

  for (unsigned round = 0; round <= retries; ++round) {
    if (round > 0) note(transcript, EventKind::Retried);
    attempt.header.id = random_transaction_id();
    Octets wire = encode_message(attempt);

    auto started = Clock::now();
    auto deadline = started + timeout;
    ssize_t sent = ::sendto(sock.fd(), wire.data(), wire.size(), 0, server_addr.get(), server_addr.length);
    if (sent < 0) {
      throw TransportError(Errc::SocketError, std::string("sendto(): ") + std::strerror(errno),
                           snapshot(transcript));
    }
    note(transcript, EventKind::UdpSent);

    while (detail::wait_for(sock.fd(), POLLIN, deadline)) {
      detail::SockAddr from;
      from.length = sizeof from.storage;
      ssize_t n = ::recvfrom(sock.fd(), buffer.data(), buffer.size(), 0, from.get(), &from.length);
      if (n < 0) continue;  // EAGAIN, or an ICMP error surfaced on the socket
      if (!detail::same_address(from, server_addr) || n < 2) continue;
      std::uint16_t id = static_cast<std::uint16_t>((buffer[0] << 8) | buffer[1]);
      if (id != attempt.header.id) {
        saw_mismatch = true;
        continue;
      }
      OctetView datagram(buffer.data(), static_cast<std::size_t>(n));
      DnsMessage response;
      try {
        response = decode_message(datagram);
      } catch (const Error& e) {
        throw TransportError(Errc::DecodeError, e.what(), snapshot(transcript), std::nullopt,
                             Octets(datagram.begin(), datagram.end()));
      }
      if (!questions_match(attempt, response)) {
        saw_mismatch = true;
        continue;
      }
      note(transcript, EventKind::UdpReceived, response.header.flags.tc);
      return {TransportKind::Udp, wire.size(), datagram.size(), elapsed_ms(started), std::move(response), server};
    }
    note(transcript, EventKind::TimedOut);
  }

  if (saw_mismatch) {
    throw TransportError(Errc::IdMismatchFlood, "only non-matching responses from " + server.to_string(),
                         snapshot(transcript));
  }
  throw TransportError(Errc::Timeout, "no UDP response from " + server.to_string(), snapshot(transcript));
}

ExchangeRecord tcp_exchange(const Endpoint& server, const DnsMessage& message, std::chrono::milliseconds timeout,
                            SessionTranscript* transcript) {
  auto server_addr = detail::to_sockaddr(server);
  DnsMessage query = message;
  query.header.id = random_transaction_id();
  Octets wire = encode_message(query);
  Octets framed = frame_tcp_message(wire);

  auto started = Clock::now();
  auto deadline = started + timeout;
  auto sock = detail::open_socket(server_addr.family(), SOCK_STREAM);
  detail::set_nonblocking(sock.fd());

  auto timed_out = [&](const std::string& what) {
    note(transcript, EventKind::TimedOut);
    return TransportError(Errc::Timeout, what, snapshot(transcript));
  };

  if (::connect(sock.fd(), server_addr.get(), server_addr.length) < 0) {
    if (errno == ECONNREFUSED) {
      throw TransportError(Errc::ConnectionRefused, server.to_string(), snapshot(transcript));
    }
    if (errno != EINPROGRESS) {
      throw TransportError(Errc::SocketError, std::string("connect(): ") + std::strerror(errno),
                           snapshot(transcript));
    }
    if (!detail::wait_for(sock.fd(), POLLOUT, deadline)) throw timed_out("TCP connect timed out");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err == ECONNREFUSED) {
      throw TransportError(Errc::ConnectionRefused, server.to_string(), snapshot(transcript));
    }
    if (err != 0) {
      throw TransportError(Errc::SocketError, std::string("connect(): ") + std::strerror(err), snapshot(transcript));
    }
  }
  note(transcript, EventKind::TcpConnected);

  try {
    send_all(sock.fd(), framed, deadline, transcript);
    note(transcript, EventKind::TcpSent);

    std::uint8_t prefix[2];
    if (recv_exact(sock.fd(), prefix, 2, deadline, transcript) != 2) {
      throw TransportError(Errc::FramingError, "connection closed before length prefix", snapshot(transcript));
    }
    std::size_t declared = (static_cast<std::size_t>(prefix[0]) << 8) | prefix[1];
    Octets body(declared);
    std::size_t got = recv_exact(sock.fd(), body.data(), declared, deadline, transcript);
    if (got != declared) {
      throw TransportError(Errc::FramingError,
                           "declared " + std::to_string(declared) + " octets, received " + std::to_string(got),
                           snapshot(transcript));
    }

    DnsMessage response;
    try {
      response = decode_message(body);
    } catch (const Error& e) {
      throw TransportError(Errc::DecodeError, e.what(), snapshot(transcript), std::nullopt, body);
    }
    if (response.header.id != query.header.id || !questions_match(query, response)) {
      throw TransportError(Errc::DecodeError, "TCP response does not match the query", snapshot(transcript),
                           std::nullopt, body);
    }
    note(transcript, EventKind::TcpReceived);
    return {TransportKind::Tcp, wire.size(), body.size(), elapsed_ms(started), std::move(response), server};
  } catch (const TransportError& e) {
    if (e.code() == Errc::Timeout) note(transcript, EventKind::TimedOut);
    if (e.code() == Errc::Timeout && transcript != nullptr) {
      throw TransportError(Errc::Timeout, e.detail(), *transcript);
    }
    throw;
  }
}

FallbackResult resolve_with_fallback(const Endpoint& server, const DnsMessage& message,
                                     const ExchangeOptions& options) {
  SessionTranscript transcript;
  ExchangeRecord udp;
  try {
    udp = udp_exchange(server, message, options.timeout, options.retries, &transcript);
  } catch (const TransportError& e) {
    throw TransportError(e.code(), e.detail(), transcript, std::nullopt, e.raw_response());
  }
  if (!udp.response.header.flags.tc) {
    ExchangeRecord final = udp;
    return {std::move(final), std::move(transcript), std::move(udp)};
  }
  try {
    ExchangeRecord tcp = tcp_exchange(server, message, options.timeout, &transcript);
    return {std::move(tcp), std::move(transcript), std::move(udp)};
  } catch (const TransportError& e) {
    throw TransportError(Errc::TcpFallbackFailed, e.what(), transcript, udp, e.raw_response());
  }
}

}  // namespace ednslab
