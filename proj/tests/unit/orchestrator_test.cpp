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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ebf/channel/keylog.hpp"
#include "ebf/common/digest.hpp"
#include "ebf/orchestrator/campaign.hpp"
#include "ebf/orchestrator/harness.hpp"
#include "ebf/orchestrator/report.hpp"
#include "json.hpp"

namespace ebf::orchestrator {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ebf-orch-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bmc::SeedEntry bmc_seed(Bytes b, std::size_t depth, std::string id) {
  bmc::SeedEntry e;
  e.bytes = std::move(b);
  e.depth = depth;
  e.path_id = id;
  e.file = "bmc-" + id + ".bin";
  return e;
}

CampaignConfig small_campaign(const std::string& tag, const std::string& bugs) {
  CampaignConfig c;
  c.target.bugs = *target::BugSet::parse(bugs);
  c.bmc.budget_seconds = 10;
  c.fuzz.budget_seconds = 60;
  c.fuzz.max_execs = 8000;
  c.fuzz.seed = 5;
  c.paths.out_dir = scratch(tag);
  return c;
}

// --- seeds ----------------------------------------------------------------

TEST(ConvertSeeds, DeduplicatesAcrossSources) {
  bmc::SeedCorpus corpus;
  corpus.entries = {bmc_seed({0xC0, 0x00}, 2, "p"), bmc_seed({0x10, 0x00}, 1, "q"),
                    bmc_seed({0xE0, 0x00}, 3, "r")};
  const std::vector<mqtt::RawFrame> server = {{0xD0, 0x00}, {0xE0, 0x00}};
  const auto q = convert_seeds(corpus, server);
  ASSERT_EQ(q.size(), 4u);
  EXPECT_EQ(q[0].bytes, (Bytes{0x10, 0x00}));
  EXPECT_EQ(q[1].bytes, (Bytes{0xC0, 0x00}));
  EXPECT_EQ(q[2].bytes, (Bytes{0xE0, 0x00}));
  EXPECT_EQ(q[2].provenance, Provenance::kBmc);
  EXPECT_EQ(q[3].bytes, (Bytes{0xD0, 0x00}));
  EXPECT_EQ(q[3].provenance, Provenance::kServerGenerated);
}

TEST(ConvertSeeds, ShallowBeforeDeep) {
  bmc::SeedCorpus corpus;
  corpus.entries = {bmc_seed({5}, 5, "deep"), bmc_seed({1}, 1, "shallow")};
  const auto q = convert_seeds(corpus, {});
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].depth, 1u);
  EXPECT_EQ(q[1].depth, 5u);
}

TEST(ConvertSeeds, EmptyCorpusLeavesServerFrames) {
  const auto q = convert_seeds({}, {{0xD0, 0x00}, {0x20, 0x02, 0x00, 0x00}});
  ASSERT_EQ(q.size(), 2u);
  for (const auto& s : q.seeds()) EXPECT_EQ(s.provenance, Provenance::kServerGenerated);
}

TEST(Harvest, ServerFramesAreTheBrokersReplies) {
  const auto frames = harvest_server_frames();
  std::set<mqtt::PacketType> types;
  for (const auto& f : frames) {
    const auto p = mqtt::decode_packet(f);
    ASSERT_TRUE(p.ok()) << to_hex(f);
    types.insert(mqtt::type_of(*p));
  }
  EXPECT_TRUE(types.count(mqtt::PacketType::kConnack));
  EXPECT_TRUE(types.count(mqtt::PacketType::kSuback));
  EXPECT_TRUE(types.count(mqtt::PacketType::kPuback));
  EXPECT_TRUE(types.count(mqtt::PacketType::kPingresp));
}

TEST(RandomCorpus, SeededAndTagged) {
  const auto a = random_corpus(32, 7);
  const auto b = random_corpus(32, 7);
  ASSERT_EQ(a.entries.size(), 32u);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].bytes, b.entries[i].bytes);
    EXPECT_EQ(a.entries[i].provenance, Provenance::kRandom);
    EXPECT_GE(a.entries[i].bytes.size(), 2u);
    EXPECT_LE(a.entries[i].bytes.size(), 32u);
  }
  EXPECT_NE(random_corpus(32, 8).entries[0].bytes, a.entries[0].bytes);
}

TEST(Prefixes, StateAfterPrefix) {
  const target::TargetConfig cfg;
  EXPECT_EQ(prefix_state(fuzz::Prefix::kNone, cfg).phase, target::Phase::kFresh);
  EXPECT_EQ(prefix_state(fuzz::Prefix::kConnect, cfg).phase, target::Phase::kConnected);
  const auto sub = prefix_state(fuzz::Prefix::kConnectSubscribe, cfg);
  EXPECT_EQ(sub.phase, target::Phase::kSubscribed);
  EXPECT_EQ(sub.subscriptions, std::vector<std::string>{"a/#"});
  EXPECT_EQ(prefix_script(fuzz::Prefix::kNone).size(), 0u);
  EXPECT_EQ(prefix_script(fuzz::Prefix::kConnectSubscribe).size(), 2u);
}

// --- verdicts -------------------------------------------------------------

TEST(Classify, Examples) {
  target::RawOutcome raw;
  raw.trap = bmc::Trap{bmc::TrapKind::kAssertionViolation, 3};
  auto v = target::classify_verdict(raw);
  EXPECT_EQ(v.kind, target::VerdictKind::kCrash);
  EXPECT_EQ(v.crash, bmc::TrapKind::kAssertionViolation);

  target::RawOutcome slow;
  slow.elapsed_ms = 600;
  slow.hang_threshold_ms = 500;
  EXPECT_EQ(target::classify_verdict(slow).kind, target::VerdictKind::kHang);
  slow.elapsed_ms = 400;
  EXPECT_EQ(target::classify_verdict(slow).kind, target::VerdictKind::kOk);

  target::AllocLedger ledger;
  for (int i = 0; i < 3; ++i) ledger.acquire("session_record");
  for (int i = 0; i < 2; ++i) ledger.release("session_record");
  target::RawOutcome leak;
  leak.leak = ledger.imbalance();
  v = target::classify_verdict(leak);
  EXPECT_EQ(v.kind, target::VerdictKind::kLeakDetected);
  EXPECT_EQ(v.net, 1);
  EXPECT_EQ(v.site, "session_record");

  target::RawOutcome bad;
  bad.response_violation = "PINGREQ answered with CONNACK";
  EXPECT_EQ(target::classify_verdict(bad).kind, target::VerdictKind::kProtocolViolation);

  target::RawOutcome rej;
  rej.reject_class = "decode";
  EXPECT_EQ(target::classify_verdict(rej).kind, target::VerdictKind::kGracefulReject);
}

TEST(Classify, SessionPrecedence) {
  target::Verdict acc;
  target::merge_verdict(acc, target::Verdict::reject("x"));
  EXPECT_EQ(acc.kind, target::VerdictKind::kGracefulReject);
  target::Verdict crash;
  crash.kind = target::VerdictKind::kCrash;
  crash.crash = bmc::TrapKind::kIndexOutOfBounds;
  target::merge_verdict(acc, crash);
  EXPECT_EQ(acc.kind, target::VerdictKind::kCrash);
  target::Verdict hang;
  hang.kind = target::VerdictKind::kHang;
  target::merge_verdict(acc, hang);
  EXPECT_EQ(acc.kind, target::VerdictKind::kCrash);
}

// --- report ---------------------------------------------------------------

Finding sample_finding(Phase phase, std::string first_seen) {
  Finding f;
  f.kind = "AbsentHandleRelease";
  f.phase = phase;
  f.site = "broker.disconnect.release_handle";
  f.reproducer = {0xE0, 0x00};
  f.id = finding_id(f.kind, f.prefix, f.direction, f.reproducer);
  f.trace = {"decode.type[8] @0", "release message handle"};
  f.first_seen = std::move(first_seen);
  f.validated = true;
  return f;
}

TEST(Report, FindingIdIsShortDigest) {
  const auto id = finding_id("Hang", "none", "client_to_server", Bytes{1, 2});
  EXPECT_EQ(id.size(), 16u);
  EXPECT_EQ(id, finding_id("Hang", "none", "client_to_server", Bytes{1, 2}));
  EXPECT_NE(id, finding_id("Hang", "connect", "client_to_server", Bytes{1, 2}));
}

TEST(Report, RoundTrip) {
  CampaignReport r;
  r.config.bugs = "V1,V4";
  r.config.seed = 9;
  r.timings = {0.5, 1.25, 1.75};
  r.bmc.ran = true;
  r.bmc.paths = 120;
  r.bmc.seeds = 30;
  r.bmc.findings = {sample_finding(Phase::kBmc, "disconnect.L.2")};
  r.fuzz.ran = true;
  r.fuzz.execs = 1000;
  r.fuzz.execs_per_sec = 12345.5;
  r.fuzz.saturation = 0.25;
  r.fuzz.findings = {sample_finding(Phase::kFuzz, "17")};
  r.findings = {r.bmc.findings[0], r.fuzz.findings[0]};
  const auto path = scratch("report") / "report.json";
  write_report(r, path);
  EXPECT_EQ(read_report(path), r);
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  for (const auto& e : fs::directory_iterator(path.parent_path())) {
    EXPECT_EQ(e.path().filename(), "report.json") << "temp file left behind";
  }
}

TEST(Report, EmptyFindingsArePresent) {
  const auto j = nlohmann::json::parse(report_to_json(CampaignReport{}));
  ASSERT_TRUE(j.contains("findings"));
  EXPECT_TRUE(j["findings"].is_array());
  EXPECT_TRUE(j["findings"].empty());
}

TEST(Report, MalformedInput) {
  EXPECT_THROW(report_from_json("{"), ReportError);
  EXPECT_THROW(report_from_json("[]"), ReportError);
  EXPECT_THROW(read_report(scratch("none") / "missing.json"), ReportError);
  const auto blocker = scratch("blocked") / "file";
  { std::ofstream(blocker) << "x"; }
  EXPECT_THROW(write_report(CampaignReport{}, blocker / "report.json"), ReportError);
}

TEST(Report, BmcFindingsSortFirst) {
  std::vector<Finding> v = {sample_finding(Phase::kFuzz, "10"), sample_finding(Phase::kFuzz, "9"),
                            sample_finding(Phase::kBmc, "b"), sample_finding(Phase::kBmc, "a")};
  std::sort(v.begin(), v.end(), finding_less);
  EXPECT_EQ(v[0].first_seen, "a");
  EXPECT_EQ(v[1].first_seen, "b");
  EXPECT_EQ(v[2].first_seen, "9");
  EXPECT_EQ(v[3].first_seen, "10");
}

TEST(Report, SummaryMentionsFindings) {
  CampaignReport r;
  r.findings = {sample_finding(Phase::kBmc, "x")};
  const auto s = summarize_report(r);
  EXPECT_NE(s.find("AbsentHandleRelease"), std::string::npos);
}

// --- config ---------------------------------------------------------------

TEST(Config, Validation) {
  CampaignConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.target_name = "mosquitto";
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.bmc.depth = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.fuzz.budget_seconds = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.fuzz.max_execs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, DefaultPathsLiveUnderOutDir) {
  CampaignConfig c;
  c.paths.out_dir = "/tmp/x";
  EXPECT_EQ(c.corpus_dir(), fs::path("/tmp/x/corpus"));
  EXPECT_EQ(c.keylog_path(), fs::path("/tmp/x/session.keylog"));
  EXPECT_EQ(c.report_path(), fs::path("/tmp/x/report.json"));
  c.paths.report = "/elsewhere/r.json";
  EXPECT_EQ(c.report_path(), fs::path("/elsewhere/r.json"));
}

// --- campaigns ------------------------------------------------------------

TEST(Campaign, V1FoundByBmcAndValidated) {
  const auto cfg = small_campaign("v1", "V1");
  const auto r = run_campaign(cfg);
  EXPECT_EQ(r.status, "ok");
  ASSERT_FALSE(r.bmc.findings.empty());
  const auto& f = r.bmc.findings.front();
  EXPECT_EQ(f.kind, "AbsentHandleRelease");
  EXPECT_EQ(f.phase, Phase::kBmc);
  EXPECT_TRUE(f.validated);
  ASSERT_FALSE(f.trace.empty());
  EXPECT_EQ(f.trace.back().rfind("broker.disconnect.release_handle", 0), 0u) << f.trace.back();
  ASSERT_FALSE(r.findings.empty());
  EXPECT_EQ(r.findings.front().phase, Phase::kBmc);
  // One entry per signature.
  std::set<std::string> sigs;
  for (const auto& x : r.findings) EXPECT_TRUE(sigs.insert(x.kind + "@" + x.site).second);
  // The report on disk is what was returned.
  EXPECT_EQ(read_report(cfg.report_path()), r);
  // Every artifact replays to its kind.
  std::size_t artifacts = 0;
  for (const auto& e : fs::directory_iterator(cfg.findings_dir())) {
    if (e.path().extension() != ".bin") continue;
    const auto rep = replay_artifact(e.path());
    EXPECT_TRUE(rep.reproduced) << e.path();
    EXPECT_EQ(rep.verdict.anomaly_class(), rep.expected_kind);
    ++artifacts;
  }
  EXPECT_EQ(artifacts, r.findings.size());
}

TEST(Campaign, NoBugsNoFindings) {
  const auto r = run_campaign(small_campaign("clean", "none"));
  EXPECT_EQ(r.status, "ok");
  EXPECT_TRUE(r.findings.empty());
  EXPECT_TRUE(r.bmc.findings.empty());
  EXPECT_TRUE(r.fuzz.findings.empty());
  EXPECT_GT(r.fuzz.execs, 0u);
  EXPECT_GT(r.bmc.seeds, 0u);
}

CampaignReport without_timing(CampaignReport r) {
  r.timings = {};
  r.fuzz.execs_per_sec = 0;
  return r;
}

TEST(Campaign, SameSeedSameReport) {
  // The identical config twice, output directory included, since artifact
  // paths are part of the report.
  const auto cfg = small_campaign("det", "all");
  const auto a = run_campaign(cfg);
  const auto b = run_campaign(cfg);
  EXPECT_EQ(report_to_json(without_timing(a)), report_to_json(without_timing(b)));
  EXPECT_EQ(a.fuzz.execs, cfg.fuzz.max_execs);
}

TEST(Campaign, AllFindingsValidated) {
  const auto r = run_campaign(small_campaign("valid", "all"));
  ASSERT_FALSE(r.findings.empty());
  for (const auto& f : r.findings) {
    EXPECT_TRUE(f.validated) << f.kind;
    EXPECT_EQ(f.id, finding_id(f.kind, f.prefix, f.direction, f.reproducer));
  }
}

TEST(Campaign, RandomSeedSourceRuns) {
  auto cfg = small_campaign("random", "V1");
  cfg.seed_source = SeedSource::kRandom;
  const auto r = run_campaign(cfg);
  EXPECT_EQ(r.config.seed_source, "random");
  EXPECT_FALSE(r.bmc.ran);
  EXPECT_GT(r.fuzz.execs, 0u);
}

TEST(Campaign, UnusableKeyLogAborts) {
  auto cfg = small_campaign("keylog", "V1");
  const auto blocker = fs::path(cfg.paths.out_dir) / "plain-file";
  { std::ofstream(blocker) << "x"; }
  cfg.paths.keylog = blocker / "session.keylog";
  EXPECT_THROW(run_campaign(cfg), channel::KeyLogError);
}

}  // namespace
}  // namespace ebf::orchestrator
