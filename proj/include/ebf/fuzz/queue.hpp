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

#ifndef EBF_FUZZ_QUEUE_HPP_
#define EBF_FUZZ_QUEUE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/common/bytes.hpp"
#include "ebf/common/provenance.hpp"
#include "ebf/common/rng.hpp"
#include "ebf/fuzz/mutate.hpp"

namespace ebf::fuzz {

struct Seed {
  Bytes bytes;
  Provenance provenance = Provenance::kMutated;
  std::uint64_t exec_count = 0;
  bool found_new_coverage = false;
  // BMC path depth; 0 for other seeds.
  std::size_t depth = 0;
  // Path id, file name, or "parent#<index>".
  std::string origin;
  // Blind mode only: ops already applied to the sealed record on top of
  // sealing bytes.
  std::vector<MutationOp> wire_ops;
};

inline constexpr std::uint64_t kBaseEnergy = 16;

// kBaseEnergy, doubled for seeds that found new coverage, halved per 100
// executions, never below 1.
std::uint64_t seed_energy(const Seed& s);

class EmptyQueue : public std::runtime_error {
 public:
  EmptyQueue() : std::runtime_error("seed queue is empty") {}
};

// Seeds plus a Fenwick tree over their energies for O(log n) weighted draws.
class SeedQueue {
 public:
  // Throws std::invalid_argument for seeds over kMaxInputSize.
  std::size_t add(Seed s);
  std::size_t size() const { return seeds_.size(); }
  bool empty() const { return seeds_.empty(); }
  const Seed& operator[](std::size_t i) const { return seeds_[i]; }
  const std::vector<Seed>& seeds() const { return seeds_; }
  std::uint64_t total_energy() const { return total_; }

  // Index drawn with probability energy / total. Throws EmptyQueue.
  std::size_t pick(Rng& rng) const;
  void on_executed(std::size_t i, bool found_new_coverage);

 private:
  void set_weight(std::size_t i, std::uint64_t w);
  void rebuild(std::size_t capacity);

  std::vector<Seed> seeds_;
  std::vector<std::uint64_t> weights_;
  std::vector<std::uint64_t> tree_;  // 1-based
  std::uint64_t total_ = 0;
};

struct Selection {
  std::size_t index = 0;
  MutationOp op;
};

// Energy-weighted seed, then an op: Havoc half the time, otherwise one of
// the other eight kinds uniformly. Throws EmptyQueue.
Selection select_next_seed(const SeedQueue& queue, Rng& rng);

}  // namespace ebf::fuzz

#endif  // EBF_FUZZ_QUEUE_HPP_
