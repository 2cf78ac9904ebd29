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

#include "ednslab/mock_server.hpp"

#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <list>
#include <mutex>
#include <thread>

#include "ednslab/error.hpp"
#include "socket.hpp"

namespace ednslab {

using detail::Clock;

namespace {

constexpr auto kPollSlice = std::chrono::milliseconds(50);
constexpr auto kTcpIdle = std::chrono::seconds(2);

bool has_opt(const DnsMessage& query) { return query.edns.has_value(); }

DnsMessage reply_skeleton(const DnsMessage& query) {
  DnsMessage reply;
  reply.header.id = query.header.id;
  reply.header.flags.qr = true;
  reply.header.flags.opcode = query.header.flags.opcode;
  reply.header.flags.aa = true;
  reply.header.flags.rd = query.header.flags.rd;
  reply.header.flags.ra = false;
  reply.questions = query.questions;
  return reply;
}

DnsMessage error_reply(const DnsMessage& query, std::uint8_t code) {
  DnsMessage reply = reply_skeleton(query);
  reply.header.flags.rcode = code;
  return reply;
}

}  // namespace

std::string policy_name(ServerPolicy policy) {
  switch (policy) {
    case ServerPolicy::FullEdns: return "FULL_EDNS";
    case ServerPolicy::IgnoreEdns512: return "IGNORE_EDNS_512";
    case ServerPolicy::EchoOptTruncate: return "ECHO_OPT_TRUNCATE";
    case ServerPolicy::DropEdnsQuery: return "DROP_EDNS_QUERY";
    case ServerPolicy::FormerrOnEdns: return "FORMERR_ON_EDNS";
  }
  return "?";
}

std::optional<ServerPolicy> parse_policy(std::string_view text) {
  for (auto p : {ServerPolicy::FullEdns, ServerPolicy::IgnoreEdns512, ServerPolicy::EchoOptTruncate,
                 ServerPolicy::DropEdnsQuery, ServerPolicy::FormerrOnEdns}) {
    if (text == policy_name(p)) return p;
  }
  return std::nullopt;
}

std::size_t effective_udp_limit(const DnsMessage& query, ServerPolicy policy) {
  if (policy == ServerPolicy::FullEdns && has_opt(query)) {
    // Advertised sizes below 512 are treated as 512.
    return std::max<std::size_t>(kLegacyUdpLimit, std::min<std::size_t>(query.edns->udp_payload_size, kMaxMessageSize));
  }
  return kLegacyUdpLimit;
}

std::optional<DnsMessage> respond(const DnsMessage& query, const ZoneConfig& zone, ServerPolicy policy,
                                  TransportKind transport) {
  const bool udp = transport == TransportKind::Udp;
  if (udp && has_opt(query)) {
    if (policy == ServerPolicy::DropEdnsQuery) return std::nullopt;
    if (policy == ServerPolicy::FormerrOnEdns) return error_reply(query, rcode::kFormErr);
  }
  if (query.questions.size() != 1) return error_reply(query, rcode::kFormErr);
  if (query.header.flags.opcode != 0) return error_reply(query, rcode::kNotImp);

  const Question& q = query.questions.front();
  if (q.qtype == RRType::OPT) return error_reply(query, rcode::kFormErr);
  if (q.qclass != kClassIN) return error_reply(query, rcode::kRefused);

  DnsMessage reply = reply_skeleton(query);
  if (has_opt(query) && (policy == ServerPolicy::FullEdns || policy == ServerPolicy::EchoOptTruncate)) {
    EdnsOpt echo;
    echo.udp_payload_size = kEchoedUdpSize;
    echo.do_bit = query.edns->do_bit;
    reply.edns = echo;
  }
  if (!zone.has_name(q.name)) {
    reply.header.flags.rcode = rcode::kNXDomain;
  } else {
    reply.answers = zone.lookup(q.name, q.qtype);
  }

  if (!udp) return reply;
  if (encode_message(reply).size() > effective_udp_limit(query, policy)) {
    reply.header.flags.tc = true;
    reply.answers.clear();
    reply.authority.clear();
    reply.additional.clear();
  }
  return reply;
}

// --- serving ------------------------------------------------------------------

struct MockServer::Impl {
  ZoneConfig zone;
  ServerPolicy policy;
  std::string host;
  detail::Socket udp;
  detail::Socket tcp;
  std::uint16_t udp_port = 0;
  std::uint16_t tcp_port = 0;
  std::atomic<bool> stopping{false};
  std::atomic<std::size_t> udp_count{0};
  std::atomic<std::size_t> tcp_count{0};
  std::thread udp_thread;
  std::thread tcp_thread;
  std::mutex conn_mutex;
  std::list<std::thread> connections;
  std::once_flag stop_once;

  // Empty means stay silent.
  Octets answer(OctetView request, TransportKind transport) const {
    DnsMessage query;
    try {
      query = decode_message(request);
    } catch (const Error&) {
      if (request.size() < 2) return {};
      DnsMessage formerr;
      formerr.header.id = static_cast<std::uint16_t>((request[0] << 8) | request[1]);
      formerr.header.flags.qr = true;
      formerr.header.flags.rcode = rcode::kFormErr;
      return encode_message(formerr);
    }
    if (query.header.flags.qr) return {};
    auto reply = respond(query, zone, policy, transport);
    if (!reply) return {};
    try {
      return encode_message(*reply);
    } catch (const Error&) {
      return encode_message(error_reply(query, rcode::kServFail));
    }
  }

  void run_udp() {
    Octets buffer(kMaxMessageSize);
    while (!stopping.load()) {
      if (!detail::wait_for(udp.fd(), POLLIN, Clock::now() + kPollSlice)) continue;
      detail::SockAddr from;
      from.length = sizeof from.storage;
      ssize_t n = ::recvfrom(udp.fd(), buffer.data(), buffer.size(), 0, from.get(), &from.length);
      if (n <= 0 || stopping.load()) continue;
      udp_count.fetch_add(1);
      Octets out = answer(OctetView(buffer.data(), static_cast<std::size_t>(n)), TransportKind::Udp);
      if (!out.empty()) ::sendto(udp.fd(), out.data(), out.size(), 0, from.get(), from.length);
    }
  }

  void run_tcp() {
    while (!stopping.load()) {
      if (!detail::wait_for(tcp.fd(), POLLIN, Clock::now() + kPollSlice)) continue;
      int fd = ::accept4(tcp.fd(), nullptr, nullptr, SOCK_CLOEXEC | SOCK_NONBLOCK);
      if (fd < 0) continue;
      std::lock_guard lock(conn_mutex);
      connections.emplace_back([this, conn = detail::Socket(fd)]() mutable { serve_connection(std::move(conn)); });
    }
  }

  // Receives up to `want` octets before the idle deadline or shutdown.
  bool read_exact(int fd, std::uint8_t* into, std::size_t want) {
    std::size_t got = 0;
    auto deadline = Clock::now() + kTcpIdle;
    while (got < want) {
      if (stopping.load() || Clock::now() >= deadline) return false;
      if (!detail::wait_for(fd, POLLIN, std::min(deadline, Clock::now() + kPollSlice))) continue;
      ssize_t n = ::recv(fd, into + got, want - got, 0);
      if (n == 0) return false;
      if (n < 0) {
        if (errno == EAGAIN || errno == EINTR) continue;
        return false;
      }
      got += static_cast<std::size_t>(n);
    }
    return true;
  }

  bool write_all(int fd, OctetView data) {
    std::size_t sent = 0;
    auto deadline = Clock::now() + kTcpIdle;
    while (sent < data.size()) {
      if (stopping.load()) return false;
      ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n > 0) {
        sent += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EINTR)) {
        if (!detail::wait_for(fd, POLLOUT, deadline)) return false;
      } else {
        return false;
      }
    }
    return true;
  }

  void serve_connection(detail::Socket conn) {
    while (!stopping.load()) {
      std::uint8_t prefix[2];
      if (!read_exact(conn.fd(), prefix, 2)) return;
      std::size_t length = (static_cast<std::size_t>(prefix[0]) << 8) | prefix[1];
      Octets request(length);
      if (!read_exact(conn.fd(), request.data(), length)) return;
      tcp_count.fetch_add(1);
      Octets out = answer(request, TransportKind::Tcp);
      if (out.empty()) return;
      if (!write_all(conn.fd(), frame_tcp_message(out))) return;
    }
  }

  void stop() {
    std::call_once(stop_once, [this] {
      stopping.store(true);
      if (udp_thread.joinable()) udp_thread.join();
      if (tcp_thread.joinable()) tcp_thread.join();
      std::list<std::thread> pending;
      {
        std::lock_guard lock(conn_mutex);
        pending.swap(connections);
      }
      for (auto& t : pending) t.join();
      udp.reset();
      tcp.reset();
    });
  }
};

namespace {

detail::Socket bind_socket(const std::string& host, std::uint16_t port, int type) {
  auto addr = detail::to_sockaddr({host, port});
  auto sock = detail::open_socket(addr.family(), type);
  if (type == SOCK_STREAM) {
    int one = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  }
  if (::bind(sock.fd(), addr.get(), addr.length) < 0) {
    throw Error(Errc::BindFailure, (type == SOCK_STREAM ? "TCP " : "UDP ") + Endpoint{host, port}.to_string() + ": " +
                                       std::strerror(errno));
  }
  if (type == SOCK_STREAM && ::listen(sock.fd(), 128) < 0) {
    throw Error(Errc::BindFailure, std::string("listen(): ") + std::strerror(errno));
  }
  detail::set_nonblocking(sock.fd());
  return sock;
}

std::uint16_t bound_port(const detail::Socket& sock) {
  detail::SockAddr addr;
  addr.length = sizeof addr.storage;
  ::getsockname(sock.fd(), addr.get(), &addr.length);
  return detail::from_sockaddr(addr).port;
}

}  // namespace

MockServer::MockServer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

MockServer::~MockServer() { stop(); }

void MockServer::stop() { impl_->stop(); }

std::uint16_t MockServer::udp_port() const noexcept { return impl_->udp_port; }
std::uint16_t MockServer::tcp_port() const noexcept { return impl_->tcp_port; }
Endpoint MockServer::endpoint() const { return {impl_->host, impl_->udp_port}; }
const ZoneConfig& MockServer::zone() const noexcept { return impl_->zone; }
ServerPolicy MockServer::policy() const noexcept { return impl_->policy; }
std::size_t MockServer::udp_queries() const noexcept { return impl_->udp_count.load(); }
std::size_t MockServer::tcp_queries() const noexcept { return impl_->tcp_count.load(); }

std::unique_ptr<MockServer> serve(ZoneConfig zone, ServerPolicy policy, const ServeOptions& options) {
  zone.validate();
  auto impl = std::make_unique<MockServer::Impl>();
  impl->zone = std::move(zone);
  impl->policy = policy;
  impl->host = options.host;

  if (options.udp_port == 0 && options.tcp_port == 0) {
    // Ephemeral: look for a port free on both protocols.
    for (int attempt = 0; attempt < 32 && !impl->tcp.valid(); ++attempt) {
      impl->udp = bind_socket(options.host, 0, SOCK_DGRAM);
      try {
        impl->tcp = bind_socket(options.host, bound_port(impl->udp), SOCK_STREAM);
      } catch (const Error&) {
        impl->udp.reset();
      }
    }
    if (!impl->tcp.valid()) throw Error(Errc::BindFailure, "no port free for both UDP and TCP on " + options.host);
  } else {
    impl->udp = bind_socket(options.host, options.udp_port, SOCK_DGRAM);
    std::uint16_t tcp_port = options.tcp_port == 0 ? bound_port(impl->udp) : options.tcp_port;
    impl->tcp = bind_socket(options.host, tcp_port, SOCK_STREAM);
  }
  impl->udp_port = bound_port(impl->udp);
  impl->tcp_port = bound_port(impl->tcp);

  auto* raw = impl.get();
  raw->udp_thread = std::thread([raw] { raw->run_udp(); });
  raw->tcp_thread = std::thread([raw] { raw->run_tcp(); });
  return std::unique_ptr<MockServer>(new MockServer(std::move(impl)));
}

}  // namespace ednslab
