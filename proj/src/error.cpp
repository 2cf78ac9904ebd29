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

#include "ednslab/error.hpp"

namespace ednslab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::LabelTooLong: return "LabelTooLong";
    case Errc::NameTooLong: return "NameTooLong";
    case Errc::InvalidName: return "InvalidName";
    case Errc::InvalidRdata: return "InvalidRdata";
    case Errc::PointerLoop: return "PointerLoop";
    case Errc::PointerOutOfRange: return "PointerOutOfRange";
    case Errc::TruncatedBuffer: return "TruncatedBuffer";
    case Errc::MessageTooLarge: return "MessageTooLarge";
    case Errc::MultipleOpt: return "MultipleOpt";
    case Errc::OptInWrongSection: return "OptInWrongSection";
    case Errc::QueryTypeUnsupportedByProfile: return "QueryTypeUnsupportedByProfile";
    case Errc::Timeout: return "Timeout";
    case Errc::IdMismatchFlood: return "IdMismatchFlood";
    case Errc::DecodeError: return "DecodeError";
    case Errc::ConnectionRefused: return "ConnectionRefused";
    case Errc::FramingError: return "FramingError";
    case Errc::TcpFallbackFailed: return "TcpFallbackFailed";
    case Errc::InvalidAddress: return "InvalidAddress";
    case Errc::SocketError: return "SocketError";
    case Errc::NoNsRecords: return "NoNsRecords";
    case Errc::ResolverUnreachable: return "ResolverUnreachable";
    case Errc::TargetTooSmall: return "TargetTooSmall";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ZoneParseError: return "ZoneParseError";
    case Errc::InvalidZone: return "InvalidZone";
    case Errc::MixedProfiles: return "MixedProfiles";
    case Errc::ReportParseError: return "ReportParseError";
  }
  return "Unknown";
}

}  // namespace ednslab
