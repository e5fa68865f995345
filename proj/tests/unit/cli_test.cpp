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
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "ebf/cli/cli.hpp"
#include "ebf/orchestrator/report.hpp"

namespace ebf::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ebf-cli-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_main(args, out, err);
  return {code, out.str(), err.str()};
}

// Small campaign flags so whole runs take well under a second.
std::vector<std::string> quick(std::vector<std::string> args, const fs::path& dir) {
  for (const char* a : {"--bmc-budget", "5", "--fuzz-budget", "30", "--max-execs", "3000",
                        "--workdir"}) {
    args.emplace_back(a);
  }
  args.push_back(dir.string());
  return args;
}

TEST(ParseArgs, RunWithSeed) {
  const auto c = parse_args({"run", "--target", "refbroker", "--seed", "42"});
  EXPECT_EQ(c.subcommand, Subcommand::kRun);
  EXPECT_EQ(c.campaign.fuzz.seed, 42u);
  EXPECT_EQ(c.campaign.target_name, "refbroker");
}

TEST(ParseArgs, UnknownFlagIsNamed) {
  try {
    parse_args({"run", "--bogus"});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--bogus"), std::string::npos) << e.what();
  }
}

TEST(ParseArgs, ReplayNeedsAReproducer) {
  EXPECT_THROW(parse_args({"replay"}), UsageError);
  EXPECT_EQ(parse_args({"replay", "crash-0.bin"}).input, fs::path("crash-0.bin"));
}

TEST(ParseArgs, FuzzNeedsACorpus) {
  EXPECT_THROW(parse_args({"fuzz"}), UsageError);
  const auto c = parse_args({"fuzz", "--corpus", "c", "--keylog", "k.log"});
  EXPECT_EQ(c.campaign.corpus_dir(), fs::path("c"));
  EXPECT_EQ(c.campaign.keylog_path(), fs::path("k.log"));
}

TEST(ParseArgs, AllCampaignFlags) {
  const auto c = parse_args({"run", "--bugs", "V2,V4", "--bmc-depth", "5", "--bmc-budget", "2.5",
                             "--fuzz-budget", "7", "--max-execs", "100", "--mode", "blind", "--tcp",
                             "--out", "r.json"});
  EXPECT_EQ(c.campaign.target.bugs.to_string(), "V2,V4");
  EXPECT_EQ(c.campaign.bmc.depth, 5u);
  EXPECT_DOUBLE_EQ(c.campaign.bmc.budget_seconds, 2.5);
  EXPECT_DOUBLE_EQ(c.campaign.fuzz.budget_seconds, 7);
  EXPECT_EQ(c.campaign.fuzz.max_execs, 100u);
  EXPECT_EQ(c.campaign.fuzz.mode, fuzz::Mode::kBlind);
  EXPECT_EQ(c.campaign.transport, target::TransportKind::kTcp);
  EXPECT_EQ(c.campaign.report_path(), fs::path("r.json"));
}

TEST(ParseArgs, BadValues) {
  EXPECT_THROW(parse_args({"run", "--mode", "sideways"}), UsageError);
  EXPECT_THROW(parse_args({"run", "--bugs", "V9"}), UsageError);
  EXPECT_THROW(parse_args({"run", "--bmc-depth", "0"}), UsageError);
  EXPECT_THROW(parse_args({"run", "--target", "mosquitto"}), UsageError);
  EXPECT_THROW(parse_args({"run", "--tcp", "--subprocess"}), UsageError);
  EXPECT_THROW(parse_args({}), UsageError);
  EXPECT_THROW(parse_args({"launch"}), UsageError);
}

TEST(LoadConfig, EmptyObjectKeepsDefaults) {
  const auto c = load_config_text("{}");
  const orchestrator::CampaignConfig d;
  EXPECT_EQ(c.echo(), d.echo());
}

TEST(LoadConfig, FlagsWinOverFile) {
  const auto dir = scratch("precedence");
  const auto file = write_text(dir / "c.json", R"({"fuzz": {"seed": 7, "max_execs": 11}})");
  const auto from_file = parse_args({"run", "--config", file.string()});
  EXPECT_EQ(from_file.campaign.fuzz.seed, 7u);
  const auto c = parse_args({"run", "--config", file.string(), "--seed", "9"});
  EXPECT_EQ(c.campaign.fuzz.seed, 9u);
  EXPECT_EQ(c.campaign.fuzz.max_execs, 11u);
  EXPECT_EQ(c.config_file, file);
}

TEST(LoadConfig, NegativeDepthRejected) {
  try {
    load_config_text(R"({"bmc": {"depth": -1}})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "bmc.depth");
  }
}

TEST(LoadConfig, UnknownKeysAndBadJson) {
  try {
    load_config_text("{\n  \"fuzz\": {\"speed\": 3}\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "fuzz.speed");
  }
  try {
    load_config_text("{\n\"bmc\": {\n  \"depth\": ,\n}}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_config_text(R"({"fuzz": {"mode": "loud"}})"), ParseError);
  EXPECT_THROW(load_config_text(R"({"target": {"bugs": "V7"}})"), ParseError);
  EXPECT_THROW(load_config_text("[]"), ParseError);
  EXPECT_THROW(load_config(scratch("nofile") / "missing.json"), ParseError);
}

TEST(LoadConfig, EveryKey) {
  const auto c = load_config_text(R"({
    "target": {"name": "refbroker", "bugs": "V3", "hang_threshold_ms": 250},
    "bmc": {"depth": 4, "budget_seconds": 1.5, "max_paths": 99},
    "fuzz": {"budget_seconds": 2, "max_execs": 50, "seed": 3, "mode": "blind"},
    "paths": {"out_dir": "o", "corpus_dir": "c", "keylog": "k", "report": "r.json"},
    "transport": "subprocess",
    "seed_source": "random"})");
  EXPECT_EQ(c.target.bugs.to_string(), "V3");
  EXPECT_EQ(c.target.hang_threshold_ms, 250u);
  EXPECT_EQ(c.bmc.depth, 4u);
  EXPECT_EQ(c.bmc.max_paths, 99u);
  EXPECT_EQ(c.fuzz.max_execs, 50u);
  EXPECT_EQ(c.fuzz.mode, fuzz::Mode::kBlind);
  EXPECT_EQ(c.paths.out_dir, fs::path("o"));
  EXPECT_EQ(c.keylog_path(), fs::path("k"));
  EXPECT_EQ(c.transport, target::TransportKind::kSubprocess);
  EXPECT_EQ(c.seed_source, orchestrator::SeedSource::kRandom);
}

TEST(RenderStats, ZeroSnapshotPanel) {
  const std::string panel = render_stats(fuzz::FuzzStats{}, true);
  std::istringstream lines(panel);
  std::string line;
  std::size_t width = 0, n = 0;
  while (std::getline(lines, line)) {
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width) << line;
    ++n;
  }
  EXPECT_GE(n, 5u);
  for (const char* key : {"run time", "execs", "execs/sec", "corpus", "buckets", "findings"}) {
    EXPECT_NE(panel.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(panel.find_first_of("123456789"), std::string::npos) << panel;
}

TEST(RenderStats, NonTerminalIsOneRecord) {
  fuzz::FuzzStats s;
  s.execs = 12;
  s.findings = 2;
  const std::string rec = render_stats(s, false);
  EXPECT_EQ(rec.find('\n'), std::string::npos);
  EXPECT_EQ(rec.rfind("ebf-stats ", 0), 0u);
  EXPECT_NE(rec.find("execs=12 "), std::string::npos);
  EXPECT_NE(rec.find("findings=2 "), std::string::npos);
}

TEST(ExitCodes, UsageErrors) {
  EXPECT_EQ(run({"run", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"replay"}).code, kExitUsage);
  const auto dir = scratch("usage");
  const auto bad = write_text(dir / "bad.json", R"({"bmc": {"depth": -1}})");
  const auto r = run({"run", "--config", bad.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("bmc.depth"), std::string::npos) << r.err;
  EXPECT_EQ(run({"report", (dir / "missing.json").string()}).code, kExitUsage);
  EXPECT_EQ(run({"fuzz", "--corpus", (dir / "absent").string()}).code, kExitUsage);
}

TEST(ExitCodes, HelpIsClean) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, kExitClean);
  EXPECT_NE(r.out.find("run"), std::string::npos);
}

TEST(ExitCodes, CleanTargetExitsZero) {
  const auto dir = scratch("clean");
  const auto r = run(quick({"run", "--bugs", "none", "--quiet"}, dir));
  EXPECT_EQ(r.code, kExitClean) << r.err;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_EQ(run({"report", (dir / "report.json").string()}).code, kExitClean);
}

// Findings exit 1, the last progress record agrees with the report, and a
// reproducer replays to exit 1 as well.
TEST(ExitCodes, FindingsExitOneAndReplay) {
  const auto dir = scratch("findings");
  const auto r = run(quick({"run", "--bugs", "V1"}, dir));
  ASSERT_EQ(r.code, kExitFindings) << r.err;
  const auto report = orchestrator::read_report(dir / "report.json");
  ASSERT_FALSE(report.findings.empty());

  const std::regex rec("ebf-stats .* findings=([0-9]+) ");
  std::smatch m;
  std::string last;
  std::istringstream lines(r.err);
  for (std::string line; std::getline(lines, line);) {
    if (std::regex_search(line, m, rec)) last = m[1];
  }
  EXPECT_EQ(last, std::to_string(report.findings.size())) << r.err;

  EXPECT_EQ(run({"report", (dir / "report.json").string()}).code, kExitFindings);
  const auto& f = report.findings.front();
  ASSERT_FALSE(f.reproducer_file.empty());
  const auto replay = run({"replay", f.reproducer_file});
  EXPECT_EQ(replay.code, kExitFindings) << replay.out << replay.err;
  EXPECT_NE(replay.out.find("reproduced"), std::string::npos);
}

TEST(ExitCodes, BmcThenFuzzSubcommands) {
  const auto dir = scratch("split");
  const auto corpus = dir / "corpus";
  const auto b = run(quick({"bmc", "--bugs", "none", "--corpus", corpus.string(), "--quiet"}, dir));
  EXPECT_EQ(b.code, kExitClean) << b.err;
  ASSERT_TRUE(fs::exists(corpus / "manifest.json"));
  const auto f = run(quick({"fuzz", "--bugs", "V1", "--corpus", corpus.string(), "--keylog",
                            (dir / "k.keylog").string(), "--quiet"},
                           dir));
  EXPECT_EQ(f.code, kExitFindings) << f.err;
  EXPECT_TRUE(fs::exists(dir / "k.keylog"));
}

TEST(ExitCodes, CorruptReportIsUsage) {
  const auto dir = scratch("corrupt");
  const auto file = write_text(dir / "report.json", "{\"version\": ");
  EXPECT_EQ(run({"report", file.string()}).code, kExitUsage);
}

}  // namespace
}  // namespace ebf::cli
