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

#include "ebf/orchestrator/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ebf/channel/keylog.hpp"
#include "ebf/common/digest.hpp"
#include "ebf/common/rng.hpp"
#include "ebf/orchestrator/harness.hpp"
#include "ebf/target/sites.hpp"
#include "json.hpp"

namespace ebf::orchestrator {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string finding_direction(channel::Direction d) {
  return d == channel::Direction::kClientToServer ? "client_to_server" : "server_to_client";
}

std::optional<channel::Direction> finding_direction_from(std::string_view s) {
  if (s == "client_to_server") return channel::Direction::kClientToServer;
  if (s == "server_to_client") return channel::Direction::kServerToClient;
  return std::nullopt;
}

std::string probe_label(std::uint16_t id) {
  if (id == target::kEntryProbe) return "entry";
  if (auto s = target::probe_site(id)) {
    return std::string(target::site_name(s->first)) + "#" + std::to_string(s->second);
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "probe:%04x", id);
  return buf;
}

// Removes what a previous campaign emitted into the corpus directory, and
// nothing else.
void clear_emitted_seeds(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  fs::remove(dir / "manifest.json", ec);
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("bmc-", 0) == 0 && e.path().extension() == ".bin") fs::remove(e.path(), ec);
  }
}

// Replays injections through a session of its own, so validation never
// disturbs the fuzzing session's sequence numbers.
class Replayer {
 public:
  Replayer(const target::TargetConfig& config, fs::path keylog, std::uint64_t nonce_seed)
      : config_(config), keylog_(std::move(keylog)), nonce_seed_(nonce_seed) {}
  ~Replayer() {
    harness_.reset();
    std::error_code ec;
    fs::remove(keylog_, ec);
  }
  Replayer(const Replayer&) = delete;
  Replayer& operator=(const Replayer&) = delete;

  target::Verdict run(const fuzz::Injection& inj, fuzz::Mode mode) {
    if (!harness_) {
      std::error_code ec;
      if (keylog_.has_parent_path()) fs::create_directories(keylog_.parent_path(), ec);
      fs::remove(keylog_, ec);
      target::EndpointOptions opts;
      opts.keylog = keylog_;
      opts.nonce_seed = nonce_seed_;
      harness_ = std::make_unique<SessionHarness>(config_, target::TransportKind::kInMemory, opts);
    }
    return harness_->execute(inj, mode, nullptr);
  }

 private:
  target::TargetConfig config_;
  fs::path keylog_;
  std::uint64_t nonce_seed_;
  std::unique_ptr<SessionHarness> harness_;
};

constexpr std::uint64_t kReplayNonceSalt = 0x5EED0FF5E7ULL;

struct ArtifactMeta {
  std::string verdict;
  fuzz::Mode mode = fuzz::Mode::kAware;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> op_log;
};

void write_artifact(const fs::path& dir, Finding& f, const ArtifactMeta& meta,
                    const target::TargetConfig& target) {
  const fs::path bin = dir / ("crash-" + f.id + ".bin");
  write_file_atomic(bin, std::string(f.reproducer.begin(), f.reproducer.end()));
  json side{{"id", f.id},
            {"kind", f.kind},
            {"phase", std::string(phase_name(f.phase))},
            {"site", f.site},
            {"verdict", meta.verdict},
            {"session_prefix", f.prefix},
            {"direction", f.direction},
            {"mode", std::string(fuzz::mode_name(meta.mode))},
            {"rng_seed", meta.rng_seed},
            {"op_log", meta.op_log},
            {"bugs", target.bugs.to_string()},
            {"hang_threshold_ms", target.hang_threshold_ms}};
  write_file_atomic(fs::path(bin).replace_extension(".json"), side.dump(2) + "\n");
  f.reproducer_file = bin.string();
}

std::string sig_of(const Finding& f) { return f.kind + "@" + f.site; }

}  // namespace

std::string_view seed_source_name(SeedSource s) { return s == SeedSource::kBmc ? "bmc" : "random"; }

std::string_view transport_name(target::TransportKind t) {
  switch (t) {
    case target::TransportKind::kInMemory: return "memory";
    case target::TransportKind::kTcp: return "tcp";
    case target::TransportKind::kSubprocess: return "subprocess";
  }
  return "?";
}

fs::path CampaignConfig::corpus_dir() const {
  return paths.corpus_dir.empty() ? paths.out_dir / "corpus" : paths.corpus_dir;
}
fs::path CampaignConfig::keylog_path() const {
  return paths.keylog.empty() ? paths.out_dir / "session.keylog" : paths.keylog;
}
fs::path CampaignConfig::report_path() const {
  return paths.report.empty() ? paths.out_dir / "report.json" : paths.report;
}
fs::path CampaignConfig::findings_dir() const { return paths.out_dir / "findings"; }

void CampaignConfig::validate() const {
  if (target_name != "refbroker") throw ConfigError("unknown target '" + target_name + "'");
  if (bmc.depth == 0) throw ConfigError("bmc.depth must be positive");
  if (!(bmc.budget_seconds > 0)) throw ConfigError("bmc.budget_seconds must be positive");
  if (bmc.max_paths == 0) throw ConfigError("bmc.max_paths must be positive");
  if (!(fuzz.budget_seconds > 0)) throw ConfigError("fuzz.budget_seconds must be positive");
  if (fuzz.max_execs == 0) throw ConfigError("fuzz.max_execs must be positive");
  if (target.hang_threshold_ms == 0) throw ConfigError("hang_threshold_ms must be positive");
  if (paths.out_dir.empty()) throw ConfigError("output directory is empty");
}

ConfigEcho CampaignConfig::echo() const {
  ConfigEcho e;
  e.target = target_name;
  e.bugs = target.bugs.to_string();
  e.bmc_depth = bmc.depth;
  e.bmc_budget_seconds = bmc.budget_seconds;
  e.fuzz_budget_seconds = fuzz.budget_seconds;
  e.max_execs = fuzz.max_execs;
  e.seed = fuzz.seed;
  e.mode = std::string(fuzz::mode_name(fuzz.mode));
  e.transport = std::string(transport_name(transport));
  e.seed_source = std::string(seed_source_name(seed_source));
  return e;
}

std::vector<SeedTemplate> seed_templates() {
  using bmc::SymbolicPacket;
  using fuzz::Prefix;
  std::vector<SeedTemplate> out;
  auto add = [&](std::string name, ByteView frame, std::initializer_list<std::size_t> positions,
                 Prefix prefix) {
    if (prefix != Prefix::kNone) name = std::string(fuzz::prefix_name(prefix)) + "." + name;
    SeedTemplate t{SymbolicPacket::from_concrete(std::move(name), frame), prefix};
    for (auto pos : positions) t.packet.make_symbolic(pos);
    out.push_back(std::move(t));
  };

  // Header byte, low byte of the protocol-name length, its first letter and
  // the protocol level.
  const auto connect = mqtt::encode_packet(mqtt::Connect{"MQTT", 60, "ebf"});
  add("connect", connect, {0, 3, 4, 10}, Prefix::kNone);

  mqtt::Publish pub;
  pub.topic = "a/b";
  pub.payload = to_bytes("x");
  pub.qos = 1;
  pub.packet_id = 1;
  const auto publish = mqtt::encode_packet(pub);
  // Topic length: reaches the copy into the fixed topic buffer.
  add("publish.topic", publish, {2, 3}, Prefix::kNone);
  add("publish.header", publish, {0}, Prefix::kNone);

  const auto subscribe = mqtt::encode_packet(mqtt::Subscribe{1, {{"a/#", 0}}});
  add("subscribe", subscribe, {subscribe.size() - 2, subscribe.size() - 1}, Prefix::kNone);

  const auto ping = mqtt::encode_packet(mqtt::Pingreq{});
  add("pingreq", ping, {0, 1}, Prefix::kNone);

  const auto disconnect = mqtt::encode_packet(mqtt::Disconnect{});
  add("disconnect", disconnect, {0}, Prefix::kNone);

  out.push_back(SeedTemplate{SymbolicPacket::fully_symbolic("short", 1, 3), Prefix::kNone});

  // The same frames against the states the fuzzer's session prefixes build.
  add("publish.header", publish, {0}, Prefix::kConnect);
  add("disconnect", disconnect, {0}, Prefix::kConnect);
  add("subscribe", subscribe, {subscribe.size() - 2, subscribe.size() - 1}, Prefix::kConnect);
  add("publish.header", publish, {0}, Prefix::kConnectSubscribe);
  add("publish.topic", publish, {4, 6}, Prefix::kConnectSubscribe);
  return out;
}

target::BrokerState prefix_state(fuzz::Prefix prefix, const target::TargetConfig& config) {
  target::BrokerState s;
  for (const auto& p : prefix_script(prefix)) {
    const auto r = target::handle_frame(s, mqtt::encode_packet(p), config);
    if (r.verdict.kind != target::VerdictKind::kOk) {
      throw std::logic_error("session prefix rejected: " + r.verdict.to_string());
    }
  }
  return s;
}

BmcPhaseResult run_bmc_phase(const CampaignConfig& config) {
  const auto t0 = Clock::now();
  BmcPhaseResult result;
  result.section.ran = true;

  const std::set<bmc::TrapKind> properties = {
      bmc::TrapKind::kAbsentHandleRelease, bmc::TrapKind::kIndexOutOfBounds,
      bmc::TrapKind::kResourceLeak, bmc::TrapKind::kAssertionViolation};
  const bmc::SiteNamer namer = [](bmc::SiteId s) { return std::string(target::site_name(s)); };

  clear_emitted_seeds(config.corpus_dir());
  std::set<std::string> seen_signatures;
  std::vector<Finding> findings;
  const auto templates = seed_templates();
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& tpl = templates[i].packet;
    const fuzz::Prefix prefix = templates[i].prefix;
    const bmc::Program program =
        target::export_parser_model(config.target, prefix_state(prefix, config.target));
    // Each template gets an equal share of what is left.
    const double left = config.bmc.budget_seconds - seconds_since(t0);
    bmc::ExploreConfig ec;
    ec.depth = config.bmc.depth;
    ec.max_paths = config.bmc.max_paths;
    ec.budget_seconds = std::max(0.001, left / static_cast<double>(templates.size() - i));
    const bmc::ExploreResult er = bmc::explore_paths(program, tpl, ec);
    result.section.paths += er.paths.size();
    result.section.truncated = result.section.truncated || er.truncated;
    result.section.depth_bounded = result.section.depth_bounded || er.depth_bounded;

    for (const auto& pc : er.paths) {
      if (!pc.trap) continue;
      const bmc::SafetyReport sr = bmc::check_safety(program, pc, tpl, properties, namer);
      for (const auto& sf : sr.findings) {
        Finding f;
        f.kind = std::string(bmc::trap_kind_name(sf.kind));
        f.phase = Phase::kBmc;
        f.site = std::string(target::site_name(sf.site));
        if (!seen_signatures.insert(sig_of(f)).second) continue;
        f.reproducer = sf.witness;
        f.prefix = std::string(fuzz::prefix_name(prefix));
        f.direction = finding_direction(channel::Direction::kClientToServer);
        f.first_seen = tpl.name + "." + pc.path_id;
        f.detail = "counterexample of depth " + std::to_string(pc.depth) + " from template " +
                   tpl.name;
        for (const auto& step : sf.trace) {
          f.trace.push_back(step.state.empty() ? step.label : step.label + " {" + step.state + "}");
        }
        f.id = finding_id(f.kind, f.prefix, f.direction, f.reproducer);
        findings.push_back(std::move(f));
      }
    }
    result.corpus = bmc::emit_seeds(er.paths, tpl, config.corpus_dir());
  }
  result.section.seeds = result.corpus.entries.size();

  // Concrete replay: the prefix, then the witness, on a fresh connection.
  Replayer replayer(config.target, config.paths.out_dir / "replay.keylog",
                    config.fuzz.seed ^ kReplayNonceSalt);
  std::set<std::string> validated_signatures;
  for (auto& f : findings) {
    const target::Verdict v =
        replayer.run(fuzz::Injection{*fuzz::prefix_from_name(f.prefix),
                                     channel::Direction::kClientToServer, f.reproducer, {}},
                     fuzz::Mode::kAware);
    f.validated = v.anomaly_class() == f.kind;
    if (!f.validated) continue;
    // Leaks are attributed to the ledger site, as the live target reports them.
    if (!v.site.empty()) f.site = v.site;
    if (!validated_signatures.insert(sig_of(f)).second) continue;
    write_artifact(config.findings_dir(), f, ArtifactMeta{v.to_string(), fuzz::Mode::kAware, 0, {}},
                   config.target);
    result.section.findings.push_back(std::move(f));
  }
  std::sort(result.section.findings.begin(), result.section.findings.end(), finding_less);
  result.seconds = seconds_since(t0);
  return result;
}

std::vector<mqtt::RawFrame> harvest_server_frames() {
  mqtt::Publish q0;
  q0.topic = "a/b";
  q0.payload = to_bytes("hello");
  mqtt::Publish q1 = q0;
  q1.qos = 1;
  q1.packet_id = 2;
  const std::vector<mqtt::Packet> script = {
      mqtt::Connect{"MQTT", 60, "ebf-harvest"}, mqtt::Subscribe{1, {{"a/#", 1}}}, q0, q1,
      mqtt::Pingreq{}, mqtt::Disconnect{}};
  const target::SessionResult sr = target::run_session(script, target::TargetConfig{});
  std::vector<mqtt::RawFrame> out;
  for (const auto& e : sr.transcript) {
    if (e.direction == channel::Direction::kServerToClient) out.push_back(e.frame);
  }
  return out;
}

fuzz::SeedQueue convert_seeds(const bmc::SeedCorpus& corpus,
                              const std::vector<mqtt::RawFrame>& server_frames) {
  std::vector<const bmc::SeedEntry*> ordered;
  for (const auto& e : corpus.entries) ordered.push_back(&e);
  // BMC seeds by depth, then anything else the corpus directory held.
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    const bool ab = a->provenance == Provenance::kBmc;
    const bool bb = b->provenance == Provenance::kBmc;
    if (ab != bb) return ab;
    return ab && a->depth < b->depth;
  });

  fuzz::SeedQueue queue;
  std::set<Bytes> seen;
  auto push = [&](const Bytes& bytes, Provenance p, std::size_t depth, std::string origin) {
    if (bytes.empty() || bytes.size() > kMaxInputSize) return;
    if (!seen.insert(bytes).second) return;
    fuzz::Seed s;
    s.bytes = bytes;
    s.provenance = p;
    s.depth = depth;
    s.origin = std::move(origin);
    queue.add(std::move(s));
  };
  for (const auto* e : ordered) {
    push(e->bytes, e->provenance, e->depth, e->path_id.empty() ? e->file : e->path_id);
  }
  for (std::size_t i = 0; i < server_frames.size(); ++i) {
    push(server_frames[i], Provenance::kServerGenerated, 0, "server#" + std::to_string(i));
  }
  return queue;
}

bmc::SeedCorpus random_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  bmc::SeedCorpus corpus;
  for (std::size_t i = 0; i < count; ++i) {
    bmc::SeedEntry e;
    e.path_id = "random#" + std::to_string(i);
    e.provenance = Provenance::kRandom;
    e.bytes.resize(rng.between(2, 32));
    for (auto& b : e.bytes) b = static_cast<std::uint8_t>(rng.below(256));
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

FuzzPhaseResult run_fuzz_phase(const CampaignConfig& config, const bmc::SeedCorpus& corpus,
                               const fuzz::ProgressFn& progress) {
  const auto t0 = Clock::now();
  FuzzPhaseResult result;
  result.section.ran = true;

  fuzz::SeedQueue queue = convert_seeds(corpus, harvest_server_frames());

  // One key log per campaign.
  const fs::path keylog = config.keylog_path();
  std::error_code ec;
  if (keylog.has_parent_path()) fs::create_directories(keylog.parent_path(), ec);
  fs::remove(keylog, ec);
  target::EndpointOptions opts;
  opts.keylog = keylog;
  opts.nonce_seed = config.fuzz.seed;
  SessionHarness harness(config.target, config.transport, opts);

  fuzz::FuzzConfig fc;
  fc.budget_seconds = config.fuzz.budget_seconds;
  fc.max_execs = config.fuzz.max_execs;
  fc.rng_seed = config.fuzz.seed;
  fc.mode = config.fuzz.mode;
  result.raw = fuzz::run_fuzz(std::move(queue), harness, fc, progress);

  const auto& st = result.raw.stats;
  result.section.execs = st.execs;
  result.section.execs_per_sec = st.execs_per_sec;
  result.section.corpus_size = st.corpus_size;
  result.section.coverage_buckets = st.coverage_buckets;
  result.section.coverage_edges = st.coverage_edges;
  result.section.post_decryption_probes = st.post_decryption_probes;
  result.section.saturation = st.saturation;
  result.section.last_new_coverage_exec = st.last_new_coverage_exec;

  Replayer replayer(config.target, config.paths.out_dir / "replay.keylog",
                    config.fuzz.seed ^ kReplayNonceSalt);
  for (const auto& ff : result.raw.findings) {
    Finding f;
    f.kind = ff.verdict.anomaly_class();
    f.phase = Phase::kFuzz;
    f.site = ff.verdict.site;
    f.detail = ff.verdict.to_string();
    f.reproducer = ff.reproducer.frame;
    f.prefix = std::string(fuzz::prefix_name(ff.reproducer.prefix));
    f.direction = finding_direction(ff.reproducer.direction);
    f.first_seen = std::to_string(ff.first_seen);
    if (!ff.verdict.probe_trace.empty()) {
      for (auto id : ff.verdict.probe_trace) f.trace.push_back(probe_label(id));
    } else {
      f.trace = ff.op_log;
    }
    f.id = finding_id(f.kind, f.prefix, f.direction, f.reproducer);
    f.validated = replayer.run(ff.reproducer, ff.mode).anomaly_class() == f.kind;
    if (!f.validated) continue;
    write_artifact(config.findings_dir(), f,
                   ArtifactMeta{ff.verdict.to_string(), ff.mode, config.fuzz.seed, ff.op_log},
                   config.target);
    result.section.findings.push_back(std::move(f));
  }
  std::sort(result.section.findings.begin(), result.section.findings.end(), finding_less);
  result.seconds = seconds_since(t0);
  return result;
}

CampaignReport run_campaign(const CampaignConfig& config, const fuzz::ProgressFn& progress) {
  config.validate();
  const auto t0 = Clock::now();
  CampaignReport report;
  report.config = config.echo();

  bmc::SeedCorpus corpus;
  if (config.seed_source == SeedSource::kBmc) {
    BmcPhaseResult bmc = run_bmc_phase(config);
    report.bmc = std::move(bmc.section);
    report.timings.bmc_seconds = bmc.seconds;
    corpus = std::move(bmc.corpus);
  } else {
    clear_emitted_seeds(config.corpus_dir());
    corpus = random_corpus(32, config.fuzz.seed);
  }

  try {
    FuzzPhaseResult fz = run_fuzz_phase(config, corpus, progress);
    report.fuzz = std::move(fz.section);
    report.timings.fuzz_seconds = fz.seconds;
  } catch (const channel::KeyLogError&) {
    throw;
  } catch (const HarnessError& e) {
    report.status = "error";
    report.error = std::string("target setup failed: ") + e.what();
  } catch (const target::TransportError& e) {
    report.status = "error";
    report.error = std::string("target setup failed: ") + e.what();
  } catch (const channel::HandshakeError& e) {
    report.status = "error";
    report.error = std::string("target setup failed: ") + e.what();
  }

  std::vector<Finding> all = report.bmc.findings;
  all.insert(all.end(), report.fuzz.findings.begin(), report.fuzz.findings.end());
  std::stable_sort(all.begin(), all.end(), finding_less);
  std::set<std::string> seen;
  for (auto& f : all) {
    if (seen.insert(sig_of(f)).second) report.findings.push_back(std::move(f));
  }
  report.timings.total_seconds = seconds_since(t0);
  write_report(report, config.report_path());
  return report;
}

ReplayResult replay_artifact(const fs::path& bin) {
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ReportError("cannot read " + bin.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const fs::path sidecar = fs::path(bin).replace_extension(".json");
  std::ifstream sin(sidecar);
  if (!sin) throw ReportError("missing sidecar " + sidecar.string());

  ReplayResult out;
  target::TargetConfig target;
  fuzz::Injection inj;
  fuzz::Mode mode = fuzz::Mode::kAware;
  try {
    const json j = json::parse(sin);
    out.expected_kind = j.at("kind").get<std::string>();
    const auto bugs = target::BugSet::parse(j.at("bugs").get<std::string>());
    if (!bugs) throw ReportError("sidecar has an unknown bug set");
    target.bugs = *bugs;
    target.hang_threshold_ms = j.value("hang_threshold_ms", target.hang_threshold_ms);
    const auto prefix = fuzz::prefix_from_name(j.at("session_prefix").get<std::string>());
    const auto dir = finding_direction_from(j.at("direction").get<std::string>());
    const auto m = fuzz::mode_from_name(j.at("mode").get<std::string>());
    if (!prefix || !dir || !m) throw ReportError("sidecar has an unknown prefix, direction or mode");
    inj.prefix = *prefix;
    inj.direction = *dir;
    mode = *m;
  } catch (const json::exception& e) {
    throw ReportError("malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  // Blind findings depend on wire ops that do not survive as bytes.
  if (mode == fuzz::Mode::kBlind) throw ReportError("blind-mode artifacts cannot be replayed");
  inj.frame = bytes;

  const fs::path keylog =
      fs::temp_directory_path() / ("ebf-replay-" + short_digest(bytes) + ".keylog");
  Replayer replayer(target, keylog, kReplayNonceSalt);
  out.verdict = replayer.run(inj, mode);
  out.reproduced = out.verdict.anomaly_class() == out.expected_kind;
  return out;
}

}  // namespace ebf::orchestrator
