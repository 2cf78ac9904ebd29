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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ednslab/probe.hpp"

namespace ednslab {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kRiskSeverity = "Medium to Low";

struct ReportRow {
  DomainName domain;
  std::size_t ns_count = 0;
  std::map<std::string, DomainVerdict> verdicts;  // by profile name

  bool operator==(const ReportRow&) const = default;
};

struct RiskNote {
  std::string severity;
  std::string rationale;

  bool operator==(const RiskNote&) const = default;
};

struct ComplianceReport {
  std::vector<std::string> profiles;  // column order
  std::vector<ReportRow> rows;        // input order
  std::vector<DomainResult> details;
  std::optional<RiskNote> risk_note;  // present iff any row has a No

  bool operator==(const ComplianceReport&) const = default;
};

/// Throws Error{MixedProfiles} when the results disagree on the profile set.
ComplianceReport build_report(const std::vector<DomainResult>& results);

enum class ReportFormat { Table, Structured, Csv };

/// Table: header plus one line per row, risk note not included.
/// Structured: JSON document described in docs/report-schema.md.
/// CSV: header plus one line per row.
std::string render(const ComplianceReport& report, ReportFormat format);
/// The risk annotation as printable text, empty when there is none.
std::string render_risk_note(const ComplianceReport& report);

/// Inverse of render(..., Structured). Throws Error{ReportParseError}.
ComplianceReport parse_structured_report(std::string_view text);

/// "nslookup-like" -> "nslookup".
std::string client_label(std::string_view profile_name);

}  // namespace ednslab
