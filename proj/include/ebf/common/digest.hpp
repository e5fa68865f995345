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
#ifndef EBF_COMMON_DIGEST_HPP_
#define EBF_COMMON_DIGEST_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "ebf/common/bytes.hpp"

namespace ebf {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(ByteView data);

// First 8 bytes of SHA-256 as 16 lowercase hex digits. Stable across runs
// and platforms; used for finding ids and artifact names.
std::string short_digest(ByteView data);

}  // namespace ebf

#endif  // EBF_COMMON_DIGEST_HPP_
