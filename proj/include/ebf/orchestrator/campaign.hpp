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

#ifndef EBF_ORCHESTRATOR_CAMPAIGN_HPP_
#define EBF_ORCHESTRATOR_CAMPAIGN_HPP_

// The two-phase pipeline: bounded exploration of the broker's parser model
// (findings plus seed packets), then the coverage-guided fuzzer against a
// live secure session seeded with those packets and the broker's own
// responses.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/bmc/engine.hpp"
#include "ebf/fuzz/fuzzer.hpp"
#include "ebf/orchestrator/report.hpp"
#include "ebf/target/broker.hpp"
#include "ebf/target/session.hpp"

namespace ebf::orchestrator {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SeedSource {
  kBmc,
  // Baseline for the seeding comparison: random frames instead of BMC output.
  kRandom,
};
std::string_view seed_source_name(SeedSource s);
std::string_view transport_name(target::TransportKind t);

struct CampaignConfig {
  std::string target_name = "refbroker";
  target::TargetConfig target;
  struct {
    std::size_t depth = 8;
    double budget_seconds = 60;
    std::size_t max_paths = 200000;
  } bmc;
  struct {
    double budget_seconds = 300;
    std::uint64_t max_execs = 1'500'000;
    std::uint64_t seed = 1;
    fuzz::Mode mode = fuzz::Mode::kAware;
  } fuzz;
  struct {
    std::filesystem::path out_dir = "ebf-out";
    // Empty means a default under out_dir.
    std::filesystem::path corpus_dir;
    std::filesystem::path keylog;
    std::filesystem::path report;
  } paths;
  target::TransportKind transport = target::TransportKind::kInMemory;
  SeedSource seed_source = SeedSource::kBmc;

  std::filesystem::path corpus_dir() const;
  std::filesystem::path keylog_path() const;
  std::filesystem::path report_path() const;
  std::filesystem::path findings_dir() const;

  // Throws ConfigError.
  void validate() const;
  ConfigEcho echo() const;
};

// A symbolic packet and the session prefix that sets up the broker state it
// is explored from.
struct SeedTemplate {
  bmc::SymbolicPacket packet;
  fuzz::Prefix prefix = fuzz::Prefix::kNone;
};

std::vector<SeedTemplate> seed_templates();

// Broker state after the prefix's frames were handled.
target::BrokerState prefix_state(fuzz::Prefix prefix, const target::TargetConfig& config);

struct BmcPhaseResult {
  BmcSection section;
  bmc::SeedCorpus corpus;
  double seconds = 0;
};

// explore_paths, check_safety and emit_seeds over every template, sharing
// the time budget. Findings are deduplicated by kind and site and replayed.
BmcPhaseResult run_bmc_phase(const CampaignConfig& config);

// Responses of a bugs-off broker to a legitimate session.
std::vector<mqtt::RawFrame> harvest_server_frames();

// Corpus seeds ordered by path depth, then the server frames as
// ServerGenerated seeds; byte-identical duplicates dropped.
fuzz::SeedQueue convert_seeds(const bmc::SeedCorpus& corpus,
                              const std::vector<mqtt::RawFrame>& server_frames);

// Random-seed baseline corpus.
bmc::SeedCorpus random_corpus(std::size_t count, std::uint64_t seed);

struct FuzzPhaseResult {
  FuzzSection section;
  fuzz::FuzzResult raw;
  double seconds = 0;
};

// Starts the secure session (the broker writes the key log, truncated
// first), fuzzes, replays every finding and writes crash artifacts.
// Throws channel::KeyLogError, HarnessError, target::TransportError.
FuzzPhaseResult run_fuzz_phase(const CampaignConfig& config, const bmc::SeedCorpus& corpus,
                               const fuzz::ProgressFn& progress = {});

// Both phases and the report, which is also written to report_path().
CampaignReport run_campaign(const CampaignConfig& config, const fuzz::ProgressFn& progress = {});

struct ReplayResult {
  std::string expected_kind;
  target::Verdict verdict;
  bool reproduced = false;
};

// Replays crash-<id>.bin using its .json sidecar. Throws ReportError.
ReplayResult replay_artifact(const std::filesystem::path& bin);

}  // namespace ebf::orchestrator

#endif  // EBF_ORCHESTRATOR_CAMPAIGN_HPP_
