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

#include "ednslab/report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "ednslab/error.hpp"

namespace ednslab {

using json = nlohmann::json;

namespace {

std::string risk_rationale(std::size_t failing, std::size_t total) {
  std::ostringstream out;
  out << failing << " of " << total << (total == 1 ? " domain" : " domains")
      << " did not deliver large answers over UDP for at least one client. "
         "Where firewall policy admits DNS over UDP only, answers above 512 octets from these "
         "servers or clients cannot complete over TCP, so name resolution fails: an unintended "
         "denial of service. Permitting TCP/53 restricted to trusted resolvers mitigates it.";
  return out.str();
}

// --- structured form ----------------------------------------------------------

json rrtype_json(RRType t) { return rrtype_name(t); }

RRType rrtype_from(const json& j) {
  auto t = parse_rrtype(j.get<std::string>());
  if (!t) throw Error(Errc::ReportParseError, "unknown record type " + j.dump());
  return *t;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json endpoint_json(const Endpoint& e) { return {{"host", e.host}, {"port", e.port}}; }
Endpoint endpoint_from(const json& j) { return {j.at("host").get<std::string>(), j.at("port").get<std::uint16_t>()}; }

json profile_json(const ClientProfile& p) {
  json qtypes = json::array();
  for (auto t : p.allowed_qtypes) qtypes.push_back(rrtype_json(t));
  return {{"name", p.name},           {"sends_edns", p.sends_edns}, {"advertised_udp_size", p.advertised_udp_size},
          {"do_bit", p.do_bit},       {"allowed_qtypes", qtypes},   {"rd", p.rd}};
}

ClientProfile profile_from(const json& j) {
  ClientProfile p;
  p.name = j.at("name").get<std::string>();
  p.sends_edns = j.at("sends_edns").get<bool>();
  p.advertised_udp_size = j.at("advertised_udp_size").get<std::uint16_t>();
  p.do_bit = j.at("do_bit").get<bool>();
  for (const auto& t : j.at("allowed_qtypes")) p.allowed_qtypes.push_back(rrtype_from(t));
  p.rd = j.at("rd").get<bool>();
  return p;
}

json transcript_json(const SessionTranscript& t) {
  json out = json::array();
  for (const auto& ev : t) {
    json e = {{"event", event_name(ev.kind)}};
    if (ev.kind == EventKind::UdpReceived) e["tc"] = ev.tc;
    out.push_back(e);
  }
  return out;
}

SessionTranscript transcript_from(const json& j) {
  SessionTranscript out;
  for (const auto& e : j) {
    auto kind = parse_event_name(e.at("event").get<std::string>());
    if (!kind) throw Error(Errc::ReportParseError, "unknown transcript event " + e.dump());
    out.push_back({*kind, e.value("tc", false)});
  }
  return out;
}

json observation_json(const ProbeObservation& o) {
  return {{"profile", profile_json(o.profile)},
          {"server", endpoint_json(o.server)},
          {"qtype", rrtype_json(o.qtype)},
          {"udp_response_size", optional_json(o.udp_response_size)},
          {"tc_seen", o.tc_seen},
          {"opt_in_response", o.opt_in_response},
          {"rcode", o.rcode},
          {"tcp_fallback_used", o.tcp_fallback_used},
          {"tcp_succeeded", optional_json(o.tcp_succeeded)},
          {"plain_retry_answered", optional_json(o.plain_retry_answered)},
          {"transcript", transcript_json(o.transcript)},
          {"error", o.error}};
}

ProbeObservation observation_from(const json& j) {
  ProbeObservation o;
  o.profile = profile_from(j.at("profile"));
  o.server = endpoint_from(j.at("server"));
  o.qtype = rrtype_from(j.at("qtype"));
  o.udp_response_size = optional_from<std::size_t>(j.at("udp_response_size"));
  o.tc_seen = j.at("tc_seen").get<bool>();
  o.opt_in_response = j.at("opt_in_response").get<bool>();
  o.rcode = j.at("rcode").get<std::uint8_t>();
  o.tcp_fallback_used = j.at("tcp_fallback_used").get<bool>();
  o.tcp_succeeded = optional_from<bool>(j.at("tcp_succeeded"));
  o.plain_retry_answered = optional_from<bool>(j.at("plain_retry_answered"));
  o.transcript = transcript_from(j.at("transcript"));
  o.error = j.at("error").get<std::string>();
  return o;
}

Verdict verdict_from(const json& j) {
  auto v = parse_verdict(j.get<std::string>());
  if (!v) throw Error(Errc::ReportParseError, "unknown verdict " + j.dump());
  return *v;
}

DomainVerdict domain_verdict_from(const json& j) {
  auto v = parse_domain_verdict(j.get<std::string>());
  if (!v) throw Error(Errc::ReportParseError, "unknown domain verdict " + j.dump());
  return *v;
}

json domain_verdicts_json(const std::map<std::string, DomainVerdict>& m) {
  json out = json::object();
  for (const auto& [profile, v] : m) out[profile] = domain_verdict_name(v);
  return out;
}

std::map<std::string, DomainVerdict> domain_verdicts_from(const json& j) {
  std::map<std::string, DomainVerdict> out;
  for (const auto& [profile, v] : j.items()) out[profile] = domain_verdict_from(v);
  return out;
}

json detail_json(const DomainResult& d) {
  json servers = json::array();
  for (const auto& s : d.servers) {
    json probes = json::array();
    for (const auto& p : s.probes) {
      probes.push_back({{"profile", p.profile},
                        {"qtype", rrtype_json(p.qtype)},
                        {"verdict", verdict_name(p.verdict.verdict)},
                        {"cause", p.verdict.cause},
                        {"observation", observation_json(p.observation)}});
    }
    json by_profile = json::object();
    for (const auto& [profile, v] : s.by_profile) by_profile[profile] = verdict_name(v);
    servers.push_back({{"name", s.server.name.to_string()},
                       {"address", endpoint_json(s.server.address)},
                       {"verdicts", by_profile},
                       {"probes", probes}});
  }
  return {{"domain", d.domain.to_string()},
          {"ns_count", d.ns_count},
          {"profiles", d.profiles},
          {"verdicts", domain_verdicts_json(d.verdicts)},
          {"servers", servers}};
}

DomainResult detail_from(const json& j) {
  DomainResult d;
  d.domain = DomainName::parse(j.at("domain").get<std::string>());
  d.ns_count = j.at("ns_count").get<std::size_t>();
  d.profiles = j.at("profiles").get<std::vector<std::string>>();
  d.verdicts = domain_verdicts_from(j.at("verdicts"));
  for (const auto& sj : j.at("servers")) {
    ServerResult s;
    s.server.name = DomainName::parse(sj.at("name").get<std::string>());
    s.server.address = endpoint_from(sj.at("address"));
    for (const auto& [profile, v] : sj.at("verdicts").items()) s.by_profile[profile] = verdict_from(v);
    for (const auto& pj : sj.at("probes")) {
      ProbeResult p;
      p.profile = pj.at("profile").get<std::string>();
      p.qtype = rrtype_from(pj.at("qtype"));
      p.verdict = {verdict_from(pj.at("verdict")), pj.at("cause").get<std::string>()};
      p.observation = observation_from(pj.at("observation"));
      s.probes.push_back(std::move(p));
    }
    d.servers.push_back(std::move(s));
  }
  return d;
}

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_column(const std::string& profile) {
  std::string out = "verdict_" + profile;
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

std::string verdict_cell(const ReportRow& row, const std::string& profile) {
  auto it = row.verdicts.find(profile);
  return it == row.verdicts.end() ? "" : domain_verdict_name(it->second);
}

std::string render_table(const ComplianceReport& report) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Domain", "Number of DNS servers per domain"};
  for (const auto& p : report.profiles) header.push_back("EDNS(0) compliance " + client_label(p));
  cells.push_back(header);
  for (const auto& row : report.rows) {
    std::vector<std::string> line{row.domain.to_string(), std::to_string(row.ns_count)};
    for (const auto& p : report.profiles) line.push_back(verdict_cell(row, p));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    out += text + "\n";
  }
  return out;
}

}  // namespace

std::string client_label(std::string_view profile_name) {
  constexpr std::string_view suffix = "-like";
  if (profile_name.size() > suffix.size() && profile_name.substr(profile_name.size() - suffix.size()) == suffix) {
    profile_name.remove_suffix(suffix.size());
  }
  return std::string(profile_name);
}

ComplianceReport build_report(const std::vector<DomainResult>& results) {
  ComplianceReport report;
  if (results.empty()) return report;
  report.profiles = results.front().profiles;
  std::size_t failing = 0;
  for (const auto& r : results) {
    if (r.profiles != report.profiles) {
      throw Error(Errc::MixedProfiles, r.domain.to_string() + " was probed with a different profile set");
    }
    report.rows.push_back({r.domain, r.ns_count, r.verdicts});
    report.details.push_back(r);
    bool any_no = std::any_of(r.verdicts.begin(), r.verdicts.end(),
                              [](const auto& kv) { return kv.second == DomainVerdict::No; });
    if (any_no) ++failing;
  }
  if (failing > 0) report.risk_note = RiskNote{std::string(kRiskSeverity), risk_rationale(failing, results.size())};
  return report;
}

std::string render(const ComplianceReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table:
      return render_table(report);
    case ReportFormat::Csv: {
      std::string out = "domain,ns_count";
      for (const auto& p : report.profiles) out += "," + csv_column(p);
      out += "\n";
      for (const auto& row : report.rows) {
        out += csv_quote(row.domain.to_string()) + "," + std::to_string(row.ns_count);
        for (const auto& p : report.profiles) out += "," + verdict_cell(row, p);
        out += "\n";
      }
      return out;
    }
    case ReportFormat::Structured: {
      json rows = json::array();
      for (const auto& row : report.rows) {
        rows.push_back({{"domain", row.domain.to_string()},
                        {"ns_count", row.ns_count},
                        {"verdicts", domain_verdicts_json(row.verdicts)}});
      }
      json details = json::array();
      for (const auto& d : report.details) details.push_back(detail_json(d));
      json risk = nullptr;
      if (report.risk_note) risk = {{"severity", report.risk_note->severity}, {"rationale", report.risk_note->rationale}};
      json doc = {{"schema_version", kReportSchemaVersion},
                  {"profiles", report.profiles},
                  {"rows", rows},
                  {"risk_note", risk},
                  {"details", details}};
      return doc.dump(2) + "\n";
    }
  }
  return {};
}

std::string render_risk_note(const ComplianceReport& report) {
  if (!report.risk_note) return {};
  return "Risk: " + report.risk_note->severity + "\n" + report.risk_note->rationale + "\n";
}

ComplianceReport parse_structured_report(std::string_view text) {
  try {
    json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error(Errc::ReportParseError, "unsupported schema_version " + doc.at("schema_version").dump());
    }
    ComplianceReport report;
    report.profiles = doc.at("profiles").get<std::vector<std::string>>();
    for (const auto& rj : doc.at("rows")) {
      report.rows.push_back({DomainName::parse(rj.at("domain").get<std::string>()), rj.at("ns_count").get<std::size_t>(),
                             domain_verdicts_from(rj.at("verdicts"))});
    }
    const json& risk = doc.at("risk_note");
    if (!risk.is_null()) {
      report.risk_note = RiskNote{risk.at("severity").get<std::string>(), risk.at("rationale").get<std::string>()};
    }
    for (const auto& dj : doc.at("details")) report.details.push_back(detail_from(dj));
    return report;
  } catch (const json::exception& e) {
    throw Error(Errc::ReportParseError, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ReportParseError) throw;
    throw Error(Errc::ReportParseError, e.what());
  }
}

}  // namespace ednslab
