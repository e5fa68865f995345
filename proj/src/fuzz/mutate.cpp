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

#include "ebf/fuzz/mutate.hpp"

#include <algorithm>
#include <sstream>

#include "ebf/mqtt/codec.hpp"

namespace ebf::fuzz {
namespace {

// Length values worth aiming a corrupted length field at.
constexpr std::array<std::uint32_t, 10> kInterestingLengths = {
    0, 1, 2, 127, 128, 255, 256, 257, 16383, 65535};

Bytes apply_op(Bytes b, const MutationOp& op);

struct Applier {
  Bytes& b;

  void operator()(const BitFlip& m) const {
    if (m.bit / 8 < b.size()) b[m.bit / 8] ^= static_cast<std::uint8_t>(1u << (m.bit % 8));
  }
  void operator()(const ByteSet& m) const {
    if (m.offset < b.size()) b[m.offset] = m.value;
  }
  void operator()(const Arith& m) const {
    if (m.offset < b.size()) b[m.offset] = static_cast<std::uint8_t>(b[m.offset] + m.delta);
  }
  void operator()(const InterestingValue& m) const {
    if (m.offset < b.size()) b[m.offset] = m.value;
  }
  void operator()(const Truncate& m) const {
    if (m.new_len < b.size()) b.resize(m.new_len);
  }
  void operator()(const Extend& m) const {
    const std::size_t room = kMaxInputSize - std::min(b.size(), kMaxInputSize);
    b.insert(b.end(), std::min(m.pad_len, room), m.pad_byte);
  }
  void operator()(const LengthFieldCorrupt& m) const {
    if (b.empty()) return;
    std::size_t end = 1;
    while (end < b.size() && end < 5) {
      const bool more = (b[end] & 0x80) != 0;
      ++end;
      if (!more) break;
    }
    Bytes out(b.begin(), b.begin() + 1);
    out.insert(out.end(), m.new_varint.begin(), m.new_varint.end());
    out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(end), b.end());
    if (out.size() > kMaxInputSize) out.resize(kMaxInputSize);
    b = std::move(out);
  }
  void operator()(const Splice& m) const {
    const std::size_t cut = std::min(m.cut_self, b.size());
    b.resize(cut);
    if (m.cut_other < m.other.size()) {
      b.insert(b.end(), m.other.begin() + static_cast<std::ptrdiff_t>(m.cut_other), m.other.end());
    }
    if (b.size() > kMaxInputSize) b.resize(kMaxInputSize);
  }
  void operator()(const Havoc& m) const {
    Rng rng(m.rng_seed);
    for (std::size_t i = 0; i < m.n; ++i) b = apply_op(std::move(b), random_simple_op(rng, b.size()));
  }
};

Bytes apply_op(Bytes b, const MutationOp& op) {
  std::visit(Applier{b}, op);
  return b;
}

std::size_t draw_offset(Rng& rng, std::size_t len) {
  // One slot past the end keeps the out-of-range no-op reachable.
  return static_cast<std::size_t>(rng.below(len + 1));
}

}  // namespace

Bytes mutate(ByteView input, const MutationOp& op) {
  Bytes b(input.begin(), input.begin() + static_cast<std::ptrdiff_t>(std::min(input.size(), kMaxInputSize)));
  return apply_op(std::move(b), op);
}

std::string describe_op(const MutationOp& op) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BitFlip>) {
          os << "BitFlip{" << m.bit << "}";
        } else if constexpr (std::is_same_v<T, ByteSet>) {
          os << "ByteSet{" << m.offset << "," << int(m.value) << "}";
        } else if constexpr (std::is_same_v<T, Arith>) {
          os << "Arith{" << m.offset << "," << m.delta << "}";
        } else if constexpr (std::is_same_v<T, InterestingValue>) {
          os << "InterestingValue{" << m.offset << "," << int(m.value) << "}";
        } else if constexpr (std::is_same_v<T, Truncate>) {
          os << "Truncate{" << m.new_len << "}";
        } else if constexpr (std::is_same_v<T, Extend>) {
          os << "Extend{" << m.pad_len << "," << int(m.pad_byte) << "}";
        } else if constexpr (std::is_same_v<T, LengthFieldCorrupt>) {
          os << "LengthFieldCorrupt{" << to_hex(m.new_varint) << "}";
        } else if constexpr (std::is_same_v<T, Splice>) {
          os << "Splice{" << m.cut_self << "," << m.cut_other << "," << m.other.size() << "B}";
        } else {
          os << "Havoc{" << m.rng_seed << "," << m.n << "}";
        }
      },
      op);
  return os.str();
}

MutationOp random_simple_op(Rng& rng, std::size_t len) {
  switch (rng.below(7)) {
    case 0: return BitFlip{static_cast<std::size_t>(rng.below((len + 1) * 8))};
    case 1: return ByteSet{draw_offset(rng, len), static_cast<std::uint8_t>(rng.next())};
    case 2: {
      int delta = static_cast<int>(rng.between(1, 35));
      if (rng.chance(1, 2)) delta = -delta;
      return Arith{draw_offset(rng, len), delta};
    }
    case 3:
      return InterestingValue{draw_offset(rng, len), kInterestingBytes[rng.below(kInterestingBytes.size())]};
    case 4: return Truncate{static_cast<std::size_t>(rng.below(len + 1))};
    case 5: return Extend{static_cast<std::size_t>(rng.between(1, 32)), static_cast<std::uint8_t>(rng.next())};
    default: {
      LengthFieldCorrupt m;
      if (rng.chance(1, 2)) {
        m.new_varint = mqtt::encode_remaining_length(kInterestingLengths[rng.below(kInterestingLengths.size())]);
      } else {
        m.new_varint.resize(static_cast<std::size_t>(rng.between(1, 4)));
        for (auto& v : m.new_varint) v = static_cast<std::uint8_t>(rng.next());
      }
      return m;
    }
  }
}

std::string_view mutate_error_name(MutateError e) {
  switch (e) {
    case MutateError::kNoKeys: return "NoKeys";
    case MutateError::kOpenFailed: return "OpenFailed";
  }
  return "?";
}

namespace {

template <typename F>
Result<channel::Record, MutateError> reseal(const channel::Record& record, const channel::KeyLog& keylog,
                                            F&& transform) {
  const channel::KeyLogEntry* entry = keylog.find(record.session_id);
  if (entry == nullptr) return MutateError::kNoKeys;
  if (record.direction != static_cast<std::uint8_t>(channel::Direction::kClientToServer) &&
      record.direction != static_cast<std::uint8_t>(channel::Direction::kServerToClient)) {
    return MutateError::kOpenFailed;
  }
  const auto dir = static_cast<channel::Direction>(record.direction);
  const channel::Key& key =
      dir == channel::Direction::kClientToServer ? entry->client_key : entry->server_key;
  auto plain = channel::open_at(key, record.session_id, record);
  if (!plain.ok()) return MutateError::kOpenFailed;
  const Bytes mutated = transform(*plain);
  return channel::seal_at(key, record.session_id, dir, record.seq, mutated);
}

}  // namespace

Result<channel::Record, MutateError> mutate_encrypted(const channel::Record& record,
                                                     const channel::KeyLog& keylog,
                                                     const MutationOp& op) {
  return reseal(record, keylog, [&op](const Bytes& p) { return mutate(p, op); });
}

Result<channel::Record, MutateError> replace_encrypted(const channel::Record& record,
                                                      const channel::KeyLog& keylog,
                                                      ByteView plaintext) {
  return reseal(record, keylog, [plaintext](const Bytes&) { return Bytes(plaintext.begin(), plaintext.end()); });
}

}  // namespace ebf::fuzz
