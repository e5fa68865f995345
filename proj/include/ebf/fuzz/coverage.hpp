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

#ifndef EBF_FUZZ_COVERAGE_HPP_
#define EBF_FUZZ_COVERAGE_HPP_

// Edge coverage in the usual bitmap style: 64 Ki saturating counters per
// run, edge = cur ^ (prev >> 1), hit counts folded into eight classes.

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ebf/bmc/exec_context.hpp"

namespace ebf::fuzz {

inline constexpr std::size_t kMapSize = 65536;

// Counters for one execution. Only touched slots are cleared on reset.
class CoverageMap {
 public:
  CoverageMap() : counts_(kMapSize, 0) {}

  void hit(std::uint16_t edge) {
    std::uint8_t& c = counts_[edge];
    if (c == 0) touched_.push_back(edge);
    if (c != 0xFF) ++c;
  }
  std::uint8_t count(std::uint16_t edge) const { return counts_[edge]; }
  const std::vector<std::uint16_t>& touched() const { return touched_; }
  void reset();

 private:
  std::vector<std::uint8_t> counts_;
  std::vector<std::uint16_t> touched_;
};

// Class bit for a hit count: 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+.
// Zero for a zero count.
std::uint8_t bucket_class(std::uint8_t count);

// Union of every (edge, class) pair seen so far. Only ever grows.
class GlobalCoverage {
 public:
  GlobalCoverage() : classes_(kMapSize, 0) {}

  // Number of (edge, class) pairs.
  std::size_t buckets() const { return buckets_; }
  std::size_t edges() const { return edges_; }
  std::uint8_t classes(std::uint16_t edge) const { return classes_[edge]; }

 private:
  friend std::size_t record_execution(GlobalCoverage& global, const CoverageMap& run);
  std::vector<std::uint8_t> classes_;
  std::size_t buckets_ = 0;
  std::size_t edges_ = 0;
};

// Adds run's pairs to global and returns how many were new.
std::size_t record_execution(GlobalCoverage& global, const CoverageMap& run);

// Turns a probe stream into edges. Also remembers which probe ids fired
// in packet handling past the record layer.
class EdgeRecorder final : public bmc::ProbeHook {
 public:
  explicit EdgeRecorder(CoverageMap& map) : map_(map) {}

  void on_probe(bmc::SiteId site, std::size_t arm) override;
  void visit(std::uint16_t probe_id);
  // Starts a new trace at the entry probe.
  void restart();

  const std::bitset<kMapSize>& post_decryption_probes() const { return post_decryption_; }
  std::size_t post_decryption_count() const { return post_decryption_.count(); }

 private:
  CoverageMap& map_;
  std::uint16_t prev_ = 0;
  std::bitset<kMapSize> post_decryption_;
};

}  // namespace ebf::fuzz

#endif  // EBF_FUZZ_COVERAGE_HPP_
