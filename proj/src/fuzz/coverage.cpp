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

#include "ebf/fuzz/coverage.hpp"

#include "ebf/target/sites.hpp"

namespace ebf::fuzz {

void CoverageMap::reset() {
  for (auto e : touched_) counts_[e] = 0;
  touched_.clear();
}

std::uint8_t bucket_class(std::uint8_t count) {
  if (count == 0) return 0;
  if (count <= 3) return static_cast<std::uint8_t>(1u << (count - 1));
  if (count <= 7) return 1u << 3;
  if (count <= 15) return 1u << 4;
  if (count <= 31) return 1u << 5;
  if (count <= 127) return 1u << 6;
  return 1u << 7;
}

std::size_t record_execution(GlobalCoverage& global, const CoverageMap& run) {
  std::size_t delta = 0;
  for (auto e : run.touched()) {
    const std::uint8_t bit = bucket_class(run.count(e));
    std::uint8_t& seen = global.classes_[e];
    if ((seen & bit) == 0) {
      if (seen == 0) ++global.edges_;
      seen |= bit;
      ++delta;
    }
  }
  global.buckets_ += delta;
  return delta;
}

void EdgeRecorder::on_probe(bmc::SiteId site, std::size_t arm) {
  const std::uint16_t id = target::probe_id(site, arm);
  if (target::is_post_decryption_site(site)) post_decryption_.set(id);
  visit(id);
}

void EdgeRecorder::visit(std::uint16_t probe_id) {
  map_.hit(static_cast<std::uint16_t>(probe_id ^ (prev_ >> 1)));
  prev_ = probe_id;
}

void EdgeRecorder::restart() { prev_ = target::kEntryProbe; }

}  // namespace ebf::fuzz
