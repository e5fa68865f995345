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

#ifndef EBF_CLI_CLI_HPP_
#define EBF_CLI_CLI_HPP_

// The `ebf` front end. Exit codes: 0 completed with no findings, 1 completed
// with findings (or a replay reproduced), 2 usage or configuration error,
// 3 internal error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/fuzz/fuzzer.hpp"
#include "ebf/orchestrator/campaign.hpp"

namespace ebf::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

enum class Subcommand { kRun, kBmc, kFuzz, kReport, kReplay };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config file problem. line is 0 when the error is not tied to a position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string key, std::size_t line, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  std::size_t line() const { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

struct CliConfig {
  Subcommand subcommand = Subcommand::kRun;
  orchestrator::CampaignConfig campaign;
  std::optional<std::filesystem::path> config_file;
  // `report` and `replay` take a file argument.
  std::filesystem::path input;
  bool quiet = false;
};

// argv without the program name. Flags override the config file, which
// overrides the defaults. Throws UsageError (naming the offending flag) and
// ParseError.
CliConfig parse_args(const std::vector<std::string>& args);

// Applies a JSON config file on top of base. Unknown keys are rejected.
// Throws ParseError.
orchestrator::CampaignConfig load_config(const std::filesystem::path& path,
                                         orchestrator::CampaignConfig base = {});
orchestrator::CampaignConfig load_config_text(const std::string& text,
                                              orchestrator::CampaignConfig base = {});

// Fixed-width status panel for terminals, or a single-line key=value
// record otherwise.
std::string render_stats(const fuzz::FuzzStats& stats, bool terminal);

// Thrown by parse_args for --help; carries the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Whole front end; returns the exit code. Never throws.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebf::cli

#endif  // EBF_CLI_CLI_HPP_
