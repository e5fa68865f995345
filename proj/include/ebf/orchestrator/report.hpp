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

#ifndef EBF_ORCHESTRATOR_REPORT_HPP_
#define EBF_ORCHESTRATOR_REPORT_HPP_

// Campaign results and their JSON form (schemas/report.schema.json).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/common/bytes.hpp"

namespace ebf::orchestrator {

inline constexpr int kReportVersion = 1;

enum class Phase { kBmc, kFuzz };
std::string_view phase_name(Phase p);  // "BMC", "Fuzz"

struct Finding {
  // short_digest(kind | prefix | direction | reproducer)
  std::string id;
  // Anomaly class: a trap kind, "ResourceLeak", "Hang" or "ProtocolViolation".
  std::string kind;
  Phase phase = Phase::kBmc;
  std::string site;
  std::string detail;
  Bytes reproducer;
  std::string prefix = "none";
  std::string direction = "client_to_server";
  std::string reproducer_file;
  // BMC: counterexample steps. Fuzz: probe trace, or the op log when the
  // verdict has none.
  std::vector<std::string> trace;
  // Exec index (fuzz) or path id (BMC).
  std::string first_seen;
  // The reproducer was replayed and produced the same kind.
  bool validated = false;

  bool operator==(const Finding&) const = default;
};

std::string finding_id(const std::string& kind, const std::string& prefix,
                       const std::string& direction, ByteView reproducer);

// Sort key: BMC before Fuzz; then path id order for BMC and exec index for
// fuzz findings.
bool finding_less(const Finding& a, const Finding& b);

struct ConfigEcho {
  std::string target = "refbroker";
  std::string bugs;
  std::size_t bmc_depth = 8;
  double bmc_budget_seconds = 60;
  double fuzz_budget_seconds = 300;
  std::uint64_t max_execs = 0;
  std::uint64_t seed = 0;
  std::string mode = "aware";
  std::string transport = "memory";
  std::string seed_source = "bmc";
  bool operator==(const ConfigEcho&) const = default;
};

struct BmcSection {
  bool ran = false;
  std::size_t paths = 0;
  bool truncated = false;
  bool depth_bounded = false;
  std::size_t seeds = 0;
  std::vector<Finding> findings;
  bool operator==(const BmcSection&) const = default;
};

struct FuzzSection {
  bool ran = false;
  std::uint64_t execs = 0;
  double execs_per_sec = 0;
  std::size_t corpus_size = 0;
  std::size_t coverage_buckets = 0;
  std::size_t coverage_edges = 0;
  std::size_t post_decryption_probes = 0;
  double saturation = 0;
  std::uint64_t last_new_coverage_exec = 0;
  std::vector<Finding> findings;
  bool operator==(const FuzzSection&) const = default;
};

struct Timings {
  double bmc_seconds = 0;
  double fuzz_seconds = 0;
  double total_seconds = 0;
  bool operator==(const Timings&) const = default;
};

struct CampaignReport {
  int version = kReportVersion;
  // "ok", or "error" for a partial report after a setup failure.
  std::string status = "ok";
  std::string error;
  ConfigEcho config;
  Timings timings;
  BmcSection bmc;
  FuzzSection fuzz;
  // Both phases, one entry per anomaly signature, sorted by finding_less.
  std::vector<Finding> findings;

  bool operator==(const CampaignReport&) const = default;
};

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string report_to_json(const CampaignReport& r, int indent = 2);
// Throws ReportError on malformed input.
CampaignReport report_from_json(const std::string& text);

// Temp file in the same directory, then rename. Throws ReportError.
void write_report(const CampaignReport& r, const std::filesystem::path& path);
CampaignReport read_report(const std::filesystem::path& path);

// Human summary for `ebf report`.
std::string summarize_report(const CampaignReport& r);

// Writes `data` to `path` atomically. Throws ReportError.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);

}  // namespace ebf::orchestrator

#endif  // EBF_ORCHESTRATOR_REPORT_HPP_
