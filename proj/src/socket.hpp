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

// Internal POSIX socket helpers shared by the transport and the mock server.

#pragma once

#include <sys/socket.h>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "ednslab/endpoint.hpp"

namespace ednslab::detail {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset() noexcept;

 private:
  int fd_ = -1;
};

struct SockAddr {
  sockaddr_storage storage{};
  socklen_t length = 0;

  const sockaddr* get() const { return reinterpret_cast<const sockaddr*>(&storage); }
  sockaddr* get() { return reinterpret_cast<sockaddr*>(&storage); }
  int family() const { return storage.ss_family; }
};

/// Throws Error{InvalidAddress}.
SockAddr to_sockaddr(const Endpoint& endpoint);
Endpoint from_sockaddr(const SockAddr& addr);
bool same_address(const SockAddr& a, const SockAddr& b);

/// Throws Error{SocketError}.
Socket open_socket(int family, int type);
void set_nonblocking(int fd);

using Clock = std::chrono::steady_clock;

/// Milliseconds left until `deadline`, clamped at zero.
int remaining_ms(Clock::time_point deadline);

/// Waits for `events` on fd. Returns false on timeout.
bool wait_for(int fd, short events, Clock::time_point deadline);

}  // namespace ednslab::detail
