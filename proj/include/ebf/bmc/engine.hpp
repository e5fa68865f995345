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
#ifndef EBF_BMC_ENGINE_HPP_
#define EBF_BMC_ENGINE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/bmc/exec_context.hpp"
#include "ebf/bmc/symbolic.hpp"
#include "ebf/common/bytes.hpp"
#include "ebf/common/provenance.hpp"

namespace ebf::bmc {

struct ExploreConfig {
  std::size_t depth = 8;
  double budget_seconds = 60.0;
  std::size_t max_paths = 200000;
};

struct ExploreResult {
  std::vector<PathCondition> paths;
  // Budget or max_paths stopped exploration early.
  bool truncated = false;
  // Some path hit the depth bound with decisions pending.
  bool depth_bounded = false;
  std::size_t runs = 0;
};

// Breadth-first enumeration of feasible decision sequences up to
// config.depth. Each run re-executes the program from the start, forcing a
// known decision prefix and forking at the first new decision.
ExploreResult explore_paths(const Program& program, const SymbolicPacket& init,
                            const ExploreConfig& config);

// Lexicographically smallest frame satisfying pc: the shortest admissible
// length with every symbolic byte at its domain minimum. nullopt when unsat.
std::optional<Bytes> solve_condition(const PathCondition& pc,
                                     const SymbolicPacket& packet);

struct TraceStep {
  std::string label;
  std::string state;
};

struct SafetyFinding {
  TrapKind kind;
  SiteId site = 0;
  std::vector<TraceStep> trace;
  Bytes witness;
  PathCondition path;
};

// A monitor fired symbolically but the concrete replay did not reproduce.
struct NonReproducible {
  TrapKind kind;
  PathCondition path;
  Bytes witness;
};

struct SafetyReport {
  std::vector<SafetyFinding> findings;
  std::vector<NonReproducible> non_reproducible;
};

// Replays pc's witness concretely with tracing on. A trap whose kind is in
// properties becomes a finding; a symbolic trap that does not recur goes to
// non_reproducible. Throws std::logic_error if the witness leaves the path
// (that would be an engine bug).
SafetyReport check_safety(const Program& program, const PathCondition& pc,
                          const SymbolicPacket& packet,
                          const std::set<TrapKind>& properties,
                          const SiteNamer& namer = {});

class SeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeedEntry {
  std::string file;
  std::string path_id;
  std::size_t depth = 0;
  Provenance provenance = Provenance::kBmc;
  Bytes bytes;
};

struct SeedCorpus {
  std::vector<SeedEntry> entries;
};

// Writes one bmc-<path_id>.bin per distinct witness (first path wins) and
// merges the entries into out_dir/manifest.json. Names longer than the
// filesystem allows are shortened with a digest suffix.
SeedCorpus emit_seeds(const std::vector<PathCondition>& paths,
                      const SymbolicPacket& packet,
                      const std::filesystem::path& out_dir);

// Manifest I/O: JSON array of {file, path_id, depth, provenance}.
void write_manifest(const std::filesystem::path& out_dir, const SeedCorpus& corpus);
SeedCorpus load_corpus(const std::filesystem::path& dir);

}  // namespace ebf::bmc

#endif  // EBF_BMC_ENGINE_HPP_
