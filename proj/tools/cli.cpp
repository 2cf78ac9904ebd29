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

#include "cli.hpp"

#include <csignal>
#include <ctime>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "ednslab/error.hpp"
#include "ednslab/lab.hpp"
#include "ednslab/mock_server.hpp"
#include "ednslab/probe.hpp"
#include "ednslab/report.hpp"
#include "ednslab/zone.hpp"

namespace ednslab::cli {

namespace {

struct CliConfig {
  std::vector<std::string> domains;
  std::string resolver;
  std::vector<std::string> profiles{"nslookup-like", "dig-like"};
  std::vector<std::string> qtypes{"TXT", "DNSKEY"};
  std::uint16_t edns_size = kDefaultEdnsSize;
  unsigned timeout_ms = 3000;
  unsigned retries = 2;
  std::size_t parallelism = 8;
  std::optional<std::uint16_t> server_port;
  std::string format = "table";
  std::string json_path;
  std::string csv_path;
  // serve
  std::string zone_path;
  std::string policy = "FULL_EDNS";
  std::string address = "127.0.0.1";
  std::uint16_t port = 5300;
  std::optional<std::uint16_t> udp_port;
  std::optional<std::uint16_t> tcp_port;
  unsigned duration_ms = 0;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw Error(Errc::SocketError, "cannot write " + path);
  file << text;
}

ProbeSettings settings_from(const CliConfig& cfg) {
  ProbeSettings s;
  s.exchange.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  s.exchange.retries = cfg.retries;
  s.server_port = cfg.server_port;
  s.parallelism = cfg.parallelism;
  return s;
}

int exit_code_for(const ComplianceReport& report) {
  for (const auto& row : report.rows) {
    for (const auto& [profile, verdict] : row.verdicts) {
      if (verdict == DomainVerdict::No) return kExitNonCompliant;
    }
  }
  return kExitCompliant;
}

void emit_report(const ComplianceReport& report, const CliConfig& cfg, std::ostream& out) {
  if (cfg.format == "json") {
    out << render(report, ReportFormat::Structured);
  } else if (cfg.format == "csv") {
    out << render(report, ReportFormat::Csv);
  } else {
    out << render(report, ReportFormat::Table);
    if (auto note = render_risk_note(report); !note.empty()) out << "\n" << note;
  }
  if (!cfg.json_path.empty()) write_file(cfg.json_path, render(report, ReportFormat::Structured));
  if (!cfg.csv_path.empty()) write_file(cfg.csv_path, render(report, ReportFormat::Csv));
}

int run_probe(const CliConfig& cfg, std::ostream& out) {
  auto resolver = Endpoint::parse(cfg.resolver);
  std::vector<ClientProfile> profiles;
  for (const auto& name : cfg.profiles) {
    auto p = builtin_profile(name, cfg.edns_size);
    if (!p) throw CLI::ValidationError("--profile", "unknown profile '" + name + "'");
    profiles.push_back(*p);
  }
  std::vector<RRType> qtypes;
  for (const auto& name : cfg.qtypes) {
    auto t = parse_rrtype(name);
    if (!t) throw CLI::ValidationError("--qtype", "unknown record type '" + name + "'");
    qtypes.push_back(*t);
  }
  std::vector<DomainResult> results;
  for (const auto& d : cfg.domains) {
    results.push_back(probe_domain(DomainName::parse(d), resolver, profiles, qtypes, settings_from(cfg)));
  }
  auto report = build_report(results);
  emit_report(report, cfg, out);
  return exit_code_for(report);
}

int run_enumerate(const CliConfig& cfg, std::ostream& out) {
  auto servers = enumerate_ns(DomainName::parse(cfg.domains.at(0)), Endpoint::parse(cfg.resolver), settings_from(cfg));
  for (const auto& ns : servers) out << ns.name.to_string() << "\t" << ns.address.to_string() << "\n";
  out << servers.size() << " name servers\n";
  return kExitCompliant;
}

int run_serve(const CliConfig& cfg, std::ostream& out) {
  auto policy = parse_policy(cfg.policy);
  if (!policy) throw CLI::ValidationError("--policy", "unknown policy '" + cfg.policy + "'");
  auto zone = load_zone_file(cfg.zone_path);

  // Worker threads inherit the mask, so only sigtimedwait below sees these.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  ServeOptions options{cfg.address, cfg.udp_port.value_or(cfg.port), cfg.tcp_port.value_or(cfg.port)};
  std::unique_ptr<MockServer> server;
  try {
    server = serve(zone, *policy, options);
  } catch (...) {
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    throw;
  }
  out << "serving " << zone.origin.to_string() << " with " << policy_name(*policy) << " on " << cfg.address
      << " udp/" << server->udp_port() << " tcp/" << server->tcp_port() << std::endl;

  if (cfg.duration_ms > 0) {
    timespec wait{static_cast<time_t>(cfg.duration_ms / 1000), static_cast<long>(cfg.duration_ms % 1000) * 1000000L};
    sigtimedwait(&signals, nullptr, &wait);
  } else {
    int sig = 0;
    sigwait(&signals, &sig);
  }
  server->stop();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  out << "answered " << server->udp_queries() << " UDP and " << server->tcp_queries() << " TCP queries" << std::endl;
  return kExitCompliant;
}

int run_selftest(const CliConfig& cfg, std::ostream& out) {
  auto settings = settings_from(cfg);
  auto outcome = run_table_selftest(settings);
  out << render(outcome.report, ReportFormat::Table);
  if (auto note = render_risk_note(outcome.report); !note.empty()) out << "\n" << note;
  if (!cfg.json_path.empty()) write_file(cfg.json_path, render(outcome.report, ReportFormat::Structured));
  for (const auto& m : outcome.mismatches) out << "mismatch: " << m << "\n";
  out << (outcome.passed() ? "selftest PASS" : "selftest FAIL") << "\n";
  return outcome.passed() ? kExitCompliant : kExitNonCompliant;
}

void add_exchange_flags(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--timeout", cfg.timeout_ms, "Per-attempt timeout in milliseconds")->capture_default_str();
  cmd->add_option("--retries", cfg.retries, "UDP retries after the first attempt")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"EDNS(0) compliance lab: probe name servers, run policy mocks, self-test on loopback", "ednslab"};
  app.require_subcommand(1);

  auto* probe = app.add_subcommand("probe", "Probe every name server of the given domains");
  probe->add_option("domains", cfg.domains, "Domains to probe")->required();
  probe->add_option("--resolver", cfg.resolver, "Resolver used for NS/A lookups, host[:port]")->required();
  probe->add_option("--profile", cfg.profiles, "Client profile: dig-like, nslookup-like (repeatable)")
      ->capture_default_str();
  probe->add_option("--qtype", cfg.qtypes, "Record type to query (repeatable)")->capture_default_str();
  probe->add_option("--edns-size", cfg.edns_size, "UDP size advertised by dig-like")->capture_default_str();
  add_exchange_flags(probe, cfg);
  probe->add_option("--parallelism", cfg.parallelism, "Probes in flight")->capture_default_str()->check(CLI::PositiveNumber);
  probe->add_option("--server-port", cfg.server_port, "Port of the name servers (default: resolver's port)");
  probe->add_option("--format", cfg.format, "Standard output format")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->capture_default_str();
  probe->add_option("--json", cfg.json_path, "Write the structured report here");
  probe->add_option("--csv", cfg.csv_path, "Write the CSV rows here");

  auto* enumerate = app.add_subcommand("enumerate", "List a domain's name servers");
  enumerate->add_option("domain", cfg.domains, "Domain")->required()->expected(1);
  enumerate->add_option("--resolver", cfg.resolver, "Resolver, host[:port]")->required();
  enumerate->add_option("--server-port", cfg.server_port, "Port reported for the name servers");
  add_exchange_flags(enumerate, cfg);

  auto* serve_cmd = app.add_subcommand("serve", "Run a mock authoritative server until interrupted");
  serve_cmd->add_option("--zone", cfg.zone_path, "Zone file (JSON)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--policy", cfg.policy, "FULL_EDNS, IGNORE_EDNS_512, ECHO_OPT_TRUNCATE, DROP_EDNS_QUERY, FORMERR_ON_EDNS")
      ->capture_default_str();
  serve_cmd->add_option("--address", cfg.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", cfg.port, "UDP and TCP port")->capture_default_str();
  serve_cmd->add_option("--udp-port", cfg.udp_port, "Override the UDP port");
  serve_cmd->add_option("--tcp-port", cfg.tcp_port, "Override the TCP port");
  serve_cmd->add_option("--duration-ms", cfg.duration_ms, "Stop after this long (0: until SIGINT/SIGTERM)")
      ->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Probe the built-in two-domain fixture on loopback and check its rows");
  add_exchange_flags(selftest, cfg);
  selftest->add_option("--parallelism", cfg.parallelism, "Probes in flight")->capture_default_str()->check(CLI::PositiveNumber);
  selftest->add_option("--json", cfg.json_path, "Write the structured report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (probe->parsed()) return run_probe(cfg, out);
    if (enumerate->parsed()) return run_enumerate(cfg, out);
    if (serve_cmd->parsed()) return run_serve(cfg, out);
    if (selftest->parsed()) return run_selftest(cfg, out);
  } catch (const CLI::Error& e) {
    err << "ednslab: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "ednslab: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ednslab::cli
