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
#ifndef EBF_COMMON_PROVENANCE_HPP_
#define EBF_COMMON_PROVENANCE_HPP_

#include <optional>
#include <string_view>

namespace ebf {

// Where a seed or test case came from. kRandom marks the byte-matched
// random baseline corpus used to measure what the BMC seeds contribute.
enum class Provenance { kBmc, kMutated, kServerGenerated, kRandom };

inline std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kBmc: return "BMC";
    case Provenance::kMutated: return "Mutated";
    case Provenance::kServerGenerated: return "ServerGenerated";
    case Provenance::kRandom: return "Random";
  }
  return "?";
}

inline std::optional<Provenance> provenance_from_name(std::string_view s) {
  if (s == "BMC") return Provenance::kBmc;
  if (s == "Mutated") return Provenance::kMutated;
  if (s == "ServerGenerated") return Provenance::kServerGenerated;
  if (s == "Random") return Provenance::kRandom;
  return std::nullopt;
}

}  // namespace ebf

#endif  // EBF_COMMON_PROVENANCE_HPP_
