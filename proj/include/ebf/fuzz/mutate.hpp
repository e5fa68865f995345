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

#ifndef EBF_FUZZ_MUTATE_HPP_
#define EBF_FUZZ_MUTATE_HPP_

// Mutation operators. Each is a total function on byte strings:
// out-of-range offsets make the op a no-op and growth is clamped to
// kMaxInputSize.

#include <array>
#include <cstdint>
#include <string>
#include <variant>

#include "ebf/channel/keylog.hpp"
#include "ebf/channel/secure_channel.hpp"
#include "ebf/common/bytes.hpp"
#include "ebf/common/result.hpp"
#include "ebf/common/rng.hpp"

namespace ebf::fuzz {

struct BitFlip {
  std::size_t bit = 0;  // bit 0 is the least significant bit of byte 0
};
struct ByteSet {
  std::size_t offset = 0;
  std::uint8_t value = 0;
};
struct Arith {
  std::size_t offset = 0;
  int delta = 1;  // +-1..35, wraps mod 256
};
struct InterestingValue {
  std::size_t offset = 0;
  std::uint8_t value = 0;
};
struct Truncate {
  std::size_t new_len = 0;
};
struct Extend {
  std::size_t pad_len = 0;
  std::uint8_t pad_byte = 0;
};
// Replaces the remaining-length field (bytes 1.. up to the first byte
// without a continuation bit, at most four) with new_varint.
struct LengthFieldCorrupt {
  Bytes new_varint;
};
// self[0, cut_self) ++ other[cut_other, end)
struct Splice {
  Bytes other;
  std::size_t cut_self = 0;
  std::size_t cut_other = 0;
};
// n ops drawn from Rng(rng_seed), excluding Havoc and Splice.
struct Havoc {
  std::uint64_t rng_seed = 0;
  std::size_t n = 0;
};

using MutationOp = std::variant<BitFlip, ByteSet, Arith, InterestingValue, Truncate, Extend,
                                LengthFieldCorrupt, Splice, Havoc>;

inline constexpr std::array<std::uint8_t, 4> kInterestingBytes = {0x00, 0xFF, 0x7F, 0x80};

Bytes mutate(ByteView input, const MutationOp& op);

// Short human form for op logs, e.g. "BitFlip{9}".
std::string describe_op(const MutationOp& op);

// A random non-Havoc, non-Splice op sized for an input of length len.
MutationOp random_simple_op(Rng& rng, std::size_t len);

enum class MutateError {
  kNoKeys,      // session absent from the key log
  kOpenFailed,  // the record does not authenticate under the logged key
};
std::string_view mutate_error_name(MutateError e);

// Opens record with the logged key for its direction, applies op to the
// plaintext and seals again under the same key and the record's own
// sequence number, which is the one the receiver expects next.
Result<channel::Record, MutateError> mutate_encrypted(const channel::Record& record,
                                                     const channel::KeyLog& keylog,
                                                     const MutationOp& op);

// Same, but the plaintext is replaced outright.
Result<channel::Record, MutateError> replace_encrypted(const channel::Record& record,
                                                      const channel::KeyLog& keylog,
                                                      ByteView plaintext);

}  // namespace ebf::fuzz

#endif  // EBF_FUZZ_MUTATE_HPP_
