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
#include <string>
#include <string_view>

namespace ednslab {

inline constexpr std::uint16_t kDnsPort = 53;

/// Numeric host plus port. Hosts are opaque IPv4/IPv6 literals.
struct Endpoint {
  std::string host;
  std::uint16_t port = kDnsPort;

  bool operator==(const Endpoint&) const = default;

  /// "192.0.2.1", "192.0.2.1:5300", "::1", "[::1]:5300".
  /// Throws Error{InvalidAddress}.
  static Endpoint parse(std::string_view text, std::uint16_t default_port = kDnsPort);
  std::string to_string() const;
};

}  // namespace ednslab
