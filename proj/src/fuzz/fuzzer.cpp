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

#include "ebf/fuzz/fuzzer.hpp"

#include <chrono>
#include <set>
#include <unordered_set>

namespace ebf::fuzz {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kClockEvery = 64;
constexpr double kProgressInterval = 0.25;  // seconds
constexpr std::uint64_t kTrajectoryEvery = 4096;

std::string key_of(const Seed& s) {
  std::string k(s.bytes.begin(), s.bytes.end());
  for (const auto& op : s.wire_ops) k += "|" + describe_op(op);
  return k;
}

}  // namespace

std::string_view mode_name(Mode m) { return m == Mode::kAware ? "aware" : "blind"; }

std::optional<Mode> mode_from_name(std::string_view s) {
  if (s == "aware") return Mode::kAware;
  if (s == "blind") return Mode::kBlind;
  return std::nullopt;
}

std::string_view prefix_name(Prefix p) {
  switch (p) {
    case Prefix::kNone: return "none";
    case Prefix::kConnect: return "connect";
    case Prefix::kConnectSubscribe: return "connect+subscribe";
  }
  return "?";
}

std::optional<Prefix> prefix_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kPrefixCount; ++i) {
    const auto p = static_cast<Prefix>(i);
    if (prefix_name(p) == s) return p;
  }
  return std::nullopt;
}

FuzzResult run_fuzz(SeedQueue queue, Harness& harness, const FuzzConfig& config,
                    const ProgressFn& progress) {
  if (queue.empty()) throw EmptyQueue();
  Rng rng(config.rng_seed);
  CoverageMap run;
  GlobalCoverage global;
  EdgeRecorder recorder(run);
  FuzzResult result;
  std::set<std::string> signatures;
  std::unordered_set<std::string> known;
  for (const auto& s : queue.seeds()) known.insert(key_of(s));

  const auto start = Clock::now();
  auto last_progress = start;
  FuzzStats& st = result.stats;

  auto refresh = [&](Clock::time_point now) {
    st.elapsed_seconds = std::chrono::duration<double>(now - start).count();
    st.execs_per_sec = st.elapsed_seconds > 0 ? static_cast<double>(st.execs) / st.elapsed_seconds : 0;
    st.corpus_size = queue.size();
    st.coverage_buckets = global.buckets();
    st.coverage_edges = global.edges();
    st.post_decryption_probes = recorder.post_decryption_count();
    st.findings = result.findings.size();
    st.saturation = st.execs == 0 ? 0
                                  : static_cast<double>(st.execs - st.last_new_coverage_exec) /
                                        static_cast<double>(st.execs);
  };

  // Runs one injection; returns the coverage delta.
  auto execute = [&](const Injection& inj, std::size_t seed_index,
                     const std::optional<MutationOp>& op) {
    run.reset();
    recorder.restart();
    const target::Verdict v = harness.execute(inj, config.mode, &recorder);
    const std::size_t delta = record_execution(global, run);
    const std::uint64_t exec_index = st.execs++;
    if (delta > 0) st.last_new_coverage_exec = st.execs;
    const Seed& parent = queue[seed_index];

    if (v.is_anomaly() && signatures.insert(v.signature()).second) {
      FuzzFinding f;
      f.verdict = v;
      f.mode = config.mode;
      f.first_seen = exec_index;
      f.seed_provenance = parent.provenance;
      f.seed_origin = parent.origin;
      f.reproducer = inj;
      for (const auto& o : inj.ops) f.op_log.push_back(describe_op(o));
      if (config.mode == Mode::kAware && op) {
        f.reproducer.frame = mutate(inj.frame, *op);
        f.reproducer.ops.clear();
      }
      result.findings.push_back(std::move(f));
    }

    if (delta > 0 && op) {
      Seed child;
      child.provenance = Provenance::kMutated;
      child.found_new_coverage = true;
      child.origin = "parent#" + std::to_string(seed_index);
      if (config.mode == Mode::kAware) {
        child.bytes = mutate(parent.bytes, *op);
      } else {
        child.bytes = parent.bytes;
        child.wire_ops = parent.wire_ops;
        child.wire_ops.push_back(*op);
      }
      if (known.insert(key_of(child)).second) {
        queue.on_executed(seed_index, true);
        queue.add(std::move(child));
        return delta;
      }
    }
    queue.on_executed(seed_index, delta > 0);
    return delta;
  };

  auto out_of_budget = [&]() {
    if (st.execs >= config.max_execs) return true;
    if (st.execs % kClockEvery != 0) return false;
    const auto now = Clock::now();
    if (progress && std::chrono::duration<double>(now - last_progress).count() >= kProgressInterval) {
      last_progress = now;
      refresh(now);
      progress(st);
    }
    return std::chrono::duration<double>(now - start).count() >= config.budget_seconds;
  };

  auto direction_for = [&](std::uint64_t exec) {
    return config.mutate_server_to_client && exec % 4 == 3 ? channel::Direction::kServerToClient
                                                           : channel::Direction::kClientToServer;
  };

  // Dry run: each initial seed as-is under every prefix.
  const std::size_t initial = queue.size();
  for (std::size_t i = 0; i < initial && !out_of_budget(); ++i) {
    for (std::size_t p = 0; p < kPrefixCount && !out_of_budget(); ++p) {
      Injection inj;
      inj.prefix = static_cast<Prefix>(p);
      inj.direction = channel::Direction::kClientToServer;
      inj.frame = queue[i].bytes;
      inj.ops = queue[i].wire_ops;
      execute(inj, i, std::nullopt);
    }
  }

  while (!out_of_budget()) {
    if (st.execs % kTrajectoryEvery == 0) result.trajectory.push_back({st.execs, global.buckets()});
    const Selection sel = select_next_seed(queue, rng);
    const Seed& seed = queue[sel.index];
    Injection inj;
    inj.prefix = static_cast<Prefix>(st.execs % kPrefixCount);
    inj.direction = direction_for(st.execs);
    inj.frame = seed.bytes;
    if (config.mode == Mode::kBlind) inj.ops = seed.wire_ops;
    inj.ops.push_back(sel.op);
    execute(inj, sel.index, sel.op);
  }

  refresh(Clock::now());
  result.trajectory.push_back({st.execs, global.buckets()});
  result.corpus = queue.seeds();
  // Short runs may never reach the interval; always report the end state.
  if (progress) progress(st);
  return result;
}

}  // namespace ebf::fuzz
