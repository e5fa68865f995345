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

#include "ebf/fuzz/queue.hpp"

#include <algorithm>

namespace ebf::fuzz {

std::uint64_t seed_energy(const Seed& s) {
  const std::uint64_t base = s.found_new_coverage ? kBaseEnergy * 2 : kBaseEnergy;
  const std::uint64_t halvings = s.exec_count / 100;
  if (halvings >= 63) return 1;
  return std::max<std::uint64_t>(1, base >> halvings);
}

std::size_t SeedQueue::add(Seed s) {
  if (s.bytes.size() > kMaxInputSize) throw std::invalid_argument("seed larger than 64 KiB");
  const std::size_t i = seeds_.size();
  if (i + 1 >= tree_.size()) rebuild(std::max<std::size_t>(16, tree_.size() * 2));
  const std::uint64_t w = seed_energy(s);
  seeds_.push_back(std::move(s));
  weights_.push_back(0);
  set_weight(i, w);
  return i;
}

void SeedQueue::rebuild(std::size_t capacity) {
  tree_.assign(capacity, 0);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += weights_[i];
  }
}

void SeedQueue::set_weight(std::size_t i, std::uint64_t w) {
  const std::uint64_t old = weights_[i];
  weights_[i] = w;
  total_ = total_ - old + w;
  for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] = tree_[j] - old + w;
}

std::size_t SeedQueue::pick(Rng& rng) const {
  if (seeds_.empty()) throw EmptyQueue();
  std::uint64_t target = rng.below(total_);
  // Descend to the first index whose prefix sum exceeds target.
  std::size_t pos = 0;
  std::size_t step = 1;
  while (step * 2 < tree_.size()) step *= 2;
  for (; step > 0; step /= 2) {
    const std::size_t next = pos + step;
    if (next < tree_.size() && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  return pos;  // 0-based index of the chosen seed
}

void SeedQueue::on_executed(std::size_t i, bool found_new_coverage) {
  Seed& s = seeds_[i];
  ++s.exec_count;
  s.found_new_coverage = s.found_new_coverage || found_new_coverage;
  const std::uint64_t w = seed_energy(s);
  if (w != weights_[i]) set_weight(i, w);
}

Selection select_next_seed(const SeedQueue& queue, Rng& rng) {
  Selection sel;
  sel.index = queue.pick(rng);
  const Bytes& bytes = queue[sel.index].bytes;
  if (rng.chance(1, 2)) {
    const auto n = static_cast<std::size_t>(2u << rng.below(4));
    sel.op = Havoc{rng.next(), n};
    return sel;
  }
  if (rng.below(8) == 7) {
    const Bytes& other = queue[static_cast<std::size_t>(rng.below(queue.size()))].bytes;
    sel.op = Splice{other, static_cast<std::size_t>(rng.below(bytes.size() + 1)),
                    static_cast<std::size_t>(rng.below(other.size() + 1))};
    return sel;
  }
  sel.op = random_simple_op(rng, bytes.size());
  return sel;
}

}  // namespace ebf::fuzz
