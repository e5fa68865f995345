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

#ifndef EBF_FUZZ_FUZZER_HPP_
#define EBF_FUZZ_FUZZER_HPP_

// The coverage-guided loop. It owns the queue, the RNG and the coverage
// maps; the Harness owns the live session and decides where an op lands
// (plaintext through the key log, or the sealed record in blind mode).

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebf/bmc/exec_context.hpp"
#include "ebf/channel/secure_channel.hpp"
#include "ebf/fuzz/coverage.hpp"
#include "ebf/fuzz/mutate.hpp"
#include "ebf/fuzz/queue.hpp"
#include "ebf/target/verdict.hpp"

namespace ebf::fuzz {

enum class Mode { kAware, kBlind };
std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view s);

// Session prefixes replayed before the injected frame.
enum class Prefix : std::uint8_t { kNone = 0, kConnect = 1, kConnectSubscribe = 2 };
inline constexpr std::size_t kPrefixCount = 3;
std::string_view prefix_name(Prefix p);
std::optional<Prefix> prefix_from_name(std::string_view s);

struct Injection {
  Prefix prefix = Prefix::kNone;
  channel::Direction direction = channel::Direction::kClientToServer;
  // Plaintext frame the sending endpoint seals.
  Bytes frame;
  // Aware: applied to the plaintext through the key log. Blind: applied to
  // the sealed record, which always ends up differing from the original.
  std::vector<MutationOp> ops;
};

class Harness {
 public:
  virtual ~Harness() = default;
  // One execution: fresh connection, prefix, injection, teardown. Probes
  // for the injected frame, its response and the teardown go to hook.
  virtual target::Verdict execute(const Injection& inj, Mode mode, bmc::ProbeHook* hook) = 0;
};

struct FuzzConfig {
  double budget_seconds = 300.0;
  std::uint64_t max_execs = 1'500'000;
  std::uint64_t rng_seed = 1;
  Mode mode = Mode::kAware;
  // Every fourth execution feeds the client instead of the broker.
  bool mutate_server_to_client = true;
};

struct FuzzStats {
  std::uint64_t execs = 0;
  double elapsed_seconds = 0;
  double execs_per_sec = 0;
  std::size_t corpus_size = 0;
  std::size_t coverage_buckets = 0;
  std::size_t coverage_edges = 0;
  // Distinct probe ids hit past the record layer.
  std::size_t post_decryption_probes = 0;
  std::size_t findings = 0;
  std::uint64_t last_new_coverage_exec = 0;
  // Share of executions since coverage last grew; 1.0 means flat.
  double saturation = 0;
};

struct FuzzFinding {
  target::Verdict verdict;
  // Aware mode: the mutated plaintext with no ops left to apply.
  Injection reproducer;
  Mode mode = Mode::kAware;
  std::uint64_t first_seen = 0;
  std::vector<std::string> op_log;
  Provenance seed_provenance = Provenance::kMutated;
  std::string seed_origin;
};

struct CoveragePoint {
  std::uint64_t execs = 0;
  std::size_t buckets = 0;
};

struct FuzzResult {
  FuzzStats stats;
  std::vector<FuzzFinding> findings;  // one per signature, in discovery order
  std::vector<CoveragePoint> trajectory;
  std::vector<Seed> corpus;
};

using ProgressFn = std::function<void(const FuzzStats&)>;

// Runs until max_execs or the time budget. Every initial seed is first run
// unmutated under each prefix. Deterministic given (queue, harness, config)
// whenever max_execs is the binding limit. Throws EmptyQueue.
FuzzResult run_fuzz(SeedQueue queue, Harness& harness, const FuzzConfig& config,
                    const ProgressFn& progress = {});

}  // namespace ebf::fuzz

#endif  // EBF_FUZZ_FUZZER_HPP_
