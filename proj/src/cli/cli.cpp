// Copyright 2026 The EBF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ebf/cli/cli.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ebf/channel/keylog.hpp"
#include "json.hpp"

namespace ebf::cli {
namespace {

using nlohmann::json;
using orchestrator::CampaignConfig;

// Line of the first occurrence of "key" in the text, for diagnostics.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ParseError(key, line_of_key(text_, key.substr(key.rfind('.') + 1)),
                     "config key '" + key + "': " + why);
  }

  const json& object(const json& j, const std::string& key,
                     std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(key, "expected an object");
    for (const auto& [k, _] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || k == a;
      if (!known) fail(key.empty() ? k : key + "." + k, "unknown key");
    }
    return j;
  }

  std::uint64_t positive_uint(const json& j, const std::string& key) const {
    if (!j.is_number_unsigned()) fail(key, "expected a non-negative integer");
    const auto v = j.get<std::uint64_t>();
    if (v == 0) fail(key, "must be positive");
    return v;
  }
  std::uint64_t uint(const json& j, const std::string& key) const {
    if (!j.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }
  double positive_number(const json& j, const std::string& key) const {
    if (!j.is_number()) fail(key, "expected a number");
    const double v = j.get<double>();
    if (!(v > 0)) fail(key, "must be positive");
    return v;
  }
  std::string string(const json& j, const std::string& key) const {
    if (!j.is_string()) fail(key, "expected a string");
    return j.get<std::string>();
  }

 private:
  const std::string& text_;
};

target::TransportKind transport_from(const ConfigReader& r, const std::string& s) {
  if (s == "memory") return target::TransportKind::kInMemory;
  if (s == "tcp") return target::TransportKind::kTcp;
  if (s == "subprocess") return target::TransportKind::kSubprocess;
  r.fail("transport", "expected memory, tcp or subprocess");
}

std::string fmt_duration(double seconds) {
  const auto s = static_cast<long long>(seconds);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lldh %02lldm %02llds", s / 3600, (s / 60) % 60, s % 60);
  return buf;
}

bool is_terminal(std::ostream& os) {
  if (&os == &std::cerr) return ::isatty(STDERR_FILENO) != 0;
  if (&os == &std::cout) return ::isatty(STDOUT_FILENO) != 0;
  return false;
}

class ProgressPrinter {
 public:
  ProgressPrinter(std::ostream& os, bool quiet) : os_(os), quiet_(quiet), tty_(is_terminal(os)) {}

  void operator()(const fuzz::FuzzStats& s) {
    if (quiet_) return;
    const std::string text = render_stats(s, tty_);
    if (tty_) {
      if (lines_ > 0) os_ << "\x1b[" << lines_ << "A";
      lines_ = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
      os_ << text << std::flush;
    } else {
      os_ << text << "\n" << std::flush;
    }
  }

 private:
  std::ostream& os_;
  bool quiet_;
  bool tty_;
  std::size_t lines_ = 0;
};

fuzz::FuzzStats stats_of(const orchestrator::CampaignReport& r) {
  fuzz::FuzzStats s;
  s.execs = r.fuzz.execs;
  s.elapsed_seconds = r.timings.fuzz_seconds;
  s.execs_per_sec = r.fuzz.execs_per_sec;
  s.corpus_size = r.fuzz.corpus_size;
  s.coverage_buckets = r.fuzz.coverage_buckets;
  s.coverage_edges = r.fuzz.coverage_edges;
  s.post_decryption_probes = r.fuzz.post_decryption_probes;
  s.findings = r.findings.size();
  s.last_new_coverage_exec = r.fuzz.last_new_coverage_exec;
  s.saturation = r.fuzz.saturation;
  return s;
}

void finish_report(orchestrator::CampaignReport& r) {
  std::vector<orchestrator::Finding> all = r.bmc.findings;
  all.insert(all.end(), r.fuzz.findings.begin(), r.fuzz.findings.end());
  std::stable_sort(all.begin(), all.end(), orchestrator::finding_less);
  std::set<std::string> seen;
  for (auto& f : all) {
    if (seen.insert(f.kind + "@" + f.site).second) r.findings.push_back(std::move(f));
  }
}

int campaign_exit(const orchestrator::CampaignReport& r) {
  if (r.status != "ok") return kExitInternal;
  return r.findings.empty() ? kExitClean : kExitFindings;
}

}  // namespace

CampaignConfig load_config_text(const std::string& text, CampaignConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + at, '\n'));
    throw ParseError("", line, "config is not valid JSON (line " + std::to_string(line) + ")");
  }
  const ConfigReader r(text);
  r.object(j, "", {"target", "bmc", "fuzz", "paths", "transport", "seed_source"});

  if (j.contains("target")) {
    const json& t = r.object(j["target"], "target", {"name", "bugs", "hang_threshold_ms"});
    if (t.contains("name")) base.target_name = r.string(t["name"], "target.name");
    if (t.contains("bugs")) {
      const auto bugs = target::BugSet::parse(r.string(t["bugs"], "target.bugs"));
      if (!bugs) r.fail("target.bugs", "unknown bug name");
      base.target.bugs = *bugs;
    }
    if (t.contains("hang_threshold_ms")) {
      const auto v = r.positive_uint(t["hang_threshold_ms"], "target.hang_threshold_ms");
      if (v > 3'600'000) r.fail("target.hang_threshold_ms", "too large");
      base.target.hang_threshold_ms = static_cast<std::uint32_t>(v);
    }
  }
  if (j.contains("bmc")) {
    const json& b = r.object(j["bmc"], "bmc", {"depth", "budget_seconds", "max_paths"});
    if (b.contains("depth")) base.bmc.depth = r.positive_uint(b["depth"], "bmc.depth");
    if (b.contains("budget_seconds")) {
      base.bmc.budget_seconds = r.positive_number(b["budget_seconds"], "bmc.budget_seconds");
    }
    if (b.contains("max_paths")) base.bmc.max_paths = r.positive_uint(b["max_paths"], "bmc.max_paths");
  }
  if (j.contains("fuzz")) {
    const json& f = r.object(j["fuzz"], "fuzz", {"budget_seconds", "max_execs", "seed", "mode"});
    if (f.contains("budget_seconds")) {
      base.fuzz.budget_seconds = r.positive_number(f["budget_seconds"], "fuzz.budget_seconds");
    }
    if (f.contains("max_execs")) base.fuzz.max_execs = r.positive_uint(f["max_execs"], "fuzz.max_execs");
    if (f.contains("seed")) base.fuzz.seed = r.uint(f["seed"], "fuzz.seed");
    if (f.contains("mode")) {
      const auto m = fuzz::mode_from_name(r.string(f["mode"], "fuzz.mode"));
      if (!m) r.fail("fuzz.mode", "expected aware or blind");
      base.fuzz.mode = *m;
    }
  }
  if (j.contains("paths")) {
    const json& p = r.object(j["paths"], "paths", {"out_dir", "corpus_dir", "keylog", "report"});
    if (p.contains("out_dir")) base.paths.out_dir = r.string(p["out_dir"], "paths.out_dir");
    if (p.contains("corpus_dir")) base.paths.corpus_dir = r.string(p["corpus_dir"], "paths.corpus_dir");
    if (p.contains("keylog")) base.paths.keylog = r.string(p["keylog"], "paths.keylog");
    if (p.contains("report")) base.paths.report = r.string(p["report"], "paths.report");
  }
  if (j.contains("transport")) base.transport = transport_from(r, r.string(j["transport"], "transport"));
  if (j.contains("seed_source")) {
    const std::string s = r.string(j["seed_source"], "seed_source");
    if (s == "bmc") {
      base.seed_source = orchestrator::SeedSource::kBmc;
    } else if (s == "random") {
      base.seed_source = orchestrator::SeedSource::kRandom;
    } else {
      r.fail("seed_source", "expected bmc or random");
    }
  }
  return base;
}

CampaignConfig load_config(const std::filesystem::path& path, CampaignConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str(), std::move(base));
}

CliConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Encryption-aware BMC-seeded fuzzing of an MQTT broker", "ebf"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  struct {
    std::optional<std::string> target, bugs, mode, seed_source;
    std::optional<std::size_t> depth;
    std::optional<double> bmc_budget, fuzz_budget;
    std::optional<std::uint64_t> max_execs, seed;
    std::optional<std::string> out, config, corpus, keylog, workdir;
    bool tcp = false, subprocess = false, quiet = false;
  } f;
  std::string input;

  auto add_campaign = [&](CLI::App* sub) {
    sub->add_option("--target", f.target, "Target name (refbroker)");
    sub->add_option("--bugs", f.bugs, "Seeded defects: V1,V2,V3,V4, all or none");
    sub->add_option("--bmc-depth", f.depth, "Decision bound k")->check(CLI::PositiveNumber);
    sub->add_option("--bmc-budget", f.bmc_budget, "BMC seconds")->check(CLI::PositiveNumber);
    sub->add_option("--fuzz-budget", f.fuzz_budget, "Fuzz seconds")->check(CLI::PositiveNumber);
    sub->add_option("--max-execs", f.max_execs, "Fuzz execution cap")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--mode", f.mode, "Interposer mode")->check(CLI::IsMember({"aware", "blind"}));
    sub->add_option("--seed-source", f.seed_source, "Seeds for the fuzzer")
        ->check(CLI::IsMember({"bmc", "random"}));
    auto* tcp = sub->add_flag("--tcp", f.tcp, "Serve the broker on a loopback socket");
    auto* sp = sub->add_flag("--subprocess", f.subprocess, "Fork a broker process per connection");
    tcp->excludes(sp);
    sub->add_option("--out", f.out, "Report path (default <workdir>/report.json)");
    sub->add_option("--workdir", f.workdir, "Directory for corpus, key log and findings");
    sub->add_option("--config", f.config, "JSON config file; flags take precedence");
    sub->add_flag("--quiet", f.quiet, "No progress output");
  };

  auto* run = app.add_subcommand("run", "BMC phase, then the fuzz phase");
  add_campaign(run);
  auto* bmc = app.add_subcommand("bmc", "BMC phase only: findings and seed corpus");
  add_campaign(bmc);
  bmc->add_option("--corpus", f.corpus, "Seed corpus directory to write");
  auto* fz = app.add_subcommand("fuzz", "Fuzz phase from an existing corpus");
  add_campaign(fz);
  fz->add_option("--corpus", f.corpus, "Seed corpus directory")->required();
  fz->add_option("--keylog", f.keylog, "Key log the broker writes and the fuzzer reads");
  auto* report = app.add_subcommand("report", "Summarize a campaign report");
  report->add_option("report", input, "report.json")->required();
  auto* replay = app.add_subcommand("replay", "Replay a crash-<id>.bin reproducer");
  replay->add_option("reproducer", input, "crash-<id>.bin")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliConfig out;
  if (run->parsed()) out.subcommand = Subcommand::kRun;
  if (bmc->parsed()) out.subcommand = Subcommand::kBmc;
  if (fz->parsed()) out.subcommand = Subcommand::kFuzz;
  if (report->parsed()) out.subcommand = Subcommand::kReport;
  if (replay->parsed()) out.subcommand = Subcommand::kReplay;
  out.input = input;
  out.quiet = f.quiet;

  CampaignConfig& c = out.campaign;
  if (f.config) {
    out.config_file = *f.config;
    c = load_config(*f.config, c);
  }
  if (f.target) {
    if (*f.target != "refbroker") throw UsageError("--target: unknown target '" + *f.target + "'");
    c.target_name = *f.target;
  }
  if (f.bugs) {
    const auto bugs = target::BugSet::parse(*f.bugs);
    if (!bugs) throw UsageError("--bugs: cannot parse '" + *f.bugs + "'");
    c.target.bugs = *bugs;
  }
  if (f.depth) c.bmc.depth = *f.depth;
  if (f.bmc_budget) c.bmc.budget_seconds = *f.bmc_budget;
  if (f.fuzz_budget) c.fuzz.budget_seconds = *f.fuzz_budget;
  if (f.max_execs) c.fuzz.max_execs = *f.max_execs;
  if (f.seed) c.fuzz.seed = *f.seed;
  if (f.mode) c.fuzz.mode = *fuzz::mode_from_name(*f.mode);
  if (f.seed_source) {
    c.seed_source = *f.seed_source == "bmc" ? orchestrator::SeedSource::kBmc
                                            : orchestrator::SeedSource::kRandom;
  }
  if (f.tcp) c.transport = target::TransportKind::kTcp;
  if (f.subprocess) c.transport = target::TransportKind::kSubprocess;
  if (f.workdir) c.paths.out_dir = *f.workdir;
  if (f.out) c.paths.report = *f.out;
  if (f.corpus) c.paths.corpus_dir = *f.corpus;
  if (f.keylog) c.paths.keylog = *f.keylog;
  return out;
}

std::string render_stats(const fuzz::FuzzStats& s, bool terminal) {
  char buf[512];
  if (!terminal) {
    std::snprintf(buf, sizeof buf,
                  "ebf-stats elapsed=%.2f execs=%llu execs_per_sec=%.0f corpus=%zu buckets=%zu "
                  "edges=%zu post_decryption=%zu findings=%zu saturation=%.4f",
                  s.elapsed_seconds, static_cast<unsigned long long>(s.execs), s.execs_per_sec,
                  s.corpus_size, s.coverage_buckets, s.coverage_edges, s.post_decryption_probes,
                  s.findings, s.saturation);
    return buf;
  }
  std::string out;
  auto row = [&](const char* k1, const std::string& v1, const char* k2, const std::string& v2) {
    std::snprintf(buf, sizeof buf, "| %-10s: %-14s %-11s: %-12s |\n", k1, v1.c_str(), k2,
                  v2.c_str());
    out += buf;
  };
  auto num = [](unsigned long long v) { return std::to_string(v); };
  out += "+---------------------- ebf fuzz ----------------------+\n";
  row("run time", fmt_duration(s.elapsed_seconds), "execs/sec",
      num(static_cast<unsigned long long>(s.execs_per_sec)));
  row("execs", num(s.execs), "corpus", num(s.corpus_size));
  row("buckets", num(s.coverage_buckets), "edges", num(s.coverage_edges));
  char sat[16];
  std::snprintf(sat, sizeof sat, "%.3f", s.saturation);
  row("findings", num(s.findings), "saturation", sat);
  out += "+------------------------------------------------------+\n";
  return out;
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Subcommand sub = Subcommand::kRun;
  try {
    const CliConfig cfg = parse_args(args);
    sub = cfg.subcommand;
    const CampaignConfig& c = cfg.campaign;

    switch (cfg.subcommand) {
      case Subcommand::kReport: {
        const auto r = orchestrator::read_report(cfg.input);
        out << orchestrator::summarize_report(r);
        return r.findings.empty() ? kExitClean : kExitFindings;
      }
      case Subcommand::kReplay: {
        const auto r = orchestrator::replay_artifact(cfg.input);
        out << "expected " << r.expected_kind << ", got " << r.verdict.to_string() << "\n";
        out << (r.reproduced ? "reproduced" : "not reproduced") << "\n";
        return r.reproduced ? kExitFindings : kExitClean;
      }
      case Subcommand::kRun: {
        ProgressPrinter progress(err, cfg.quiet);
        const auto r = orchestrator::run_campaign(
            c, [&](const fuzz::FuzzStats& s) { progress(s); });
        // The last record carries the report's deduplicated finding count.
        progress(stats_of(r));
        out << orchestrator::summarize_report(r);
        out << "report: " << c.report_path().string() << "\n";
        return campaign_exit(r);
      }
      case Subcommand::kBmc: {
        c.validate();
        orchestrator::CampaignReport r;
        r.config = c.echo();
        auto bmc = orchestrator::run_bmc_phase(c);
        r.bmc = std::move(bmc.section);
        r.timings.bmc_seconds = bmc.seconds;
        r.timings.total_seconds = bmc.seconds;
        finish_report(r);
        orchestrator::write_report(r, c.report_path());
        out << orchestrator::summarize_report(r);
        out << "corpus: " << c.corpus_dir().string() << "\n";
        return campaign_exit(r);
      }
      case Subcommand::kFuzz: {
        c.validate();
        const bmc::SeedCorpus corpus = bmc::load_corpus(c.corpus_dir());
        if (corpus.entries.empty()) {
          err << "ebf: warning: corpus " << c.corpus_dir().string()
              << " is empty; fuzzing from server frames only\n";
        }
        orchestrator::CampaignReport r;
        r.config = c.echo();
        ProgressPrinter progress(err, cfg.quiet);
        auto fz = orchestrator::run_fuzz_phase(c, corpus,
                                               [&](const fuzz::FuzzStats& s) { progress(s); });
        r.fuzz = std::move(fz.section);
        r.timings.fuzz_seconds = fz.seconds;
        r.timings.total_seconds = fz.seconds;
        finish_report(r);
        orchestrator::write_report(r, c.report_path());
        progress(stats_of(r));
        out << orchestrator::summarize_report(r);
        return campaign_exit(r);
      }
    }
    return kExitInternal;
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitClean;
  } catch (const UsageError& e) {
    err << "ebf: " << e.what() << "\nRun 'ebf --help' for usage.\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "ebf: " << e.what() << "\n";
    return kExitUsage;
  } catch (const orchestrator::ConfigError& e) {
    err << "ebf: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bmc::SeedError& e) {
    err << "ebf: corpus: " << e.what() << "\n";
    return kExitUsage;
  } catch (const channel::KeyLogError& e) {
    err << "ebf: key log: " << e.what() << "\n";
    return kExitUsage;
  } catch (const orchestrator::ReportError& e) {
    err << "ebf: " << e.what() << "\n";
    // Unreadable inputs are the caller's problem; failed writes are ours.
    return sub == Subcommand::kReport || sub == Subcommand::kReplay ? kExitUsage : kExitInternal;
  } catch (const std::exception& e) {
    err << "ebf: internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (...) {
    err << "ebf: internal error\n";
    return kExitInternal;
  }
}

}  // namespace ebf::cli
