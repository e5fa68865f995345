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
#ifndef EBF_COMMON_BYTE_SET_HPP_
#define EBF_COMMON_BYTE_SET_HPP_

#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <optional>

namespace ebf {

// A subset of the 256 byte values. Used both as the domain of a symbolic
// byte and as the value set selecting one arm of a branch point.
class ByteSet {
 public:
  ByteSet() = default;

  static ByteSet all() {
    ByteSet s;
    s.bits_.set();
    return s;
  }
  static ByteSet none() { return ByteSet(); }
  static ByteSet of(std::uint8_t v) {
    ByteSet s;
    s.bits_.set(v);
    return s;
  }
  static ByteSet of(std::initializer_list<std::uint8_t> vs) {
    ByteSet s;
    for (auto v : vs) s.bits_.set(v);
    return s;
  }
  // Inclusive range; empty when lo > hi.
  static ByteSet range(int lo, int hi) {
    ByteSet s;
    for (int v = lo < 0 ? 0 : lo; v <= hi && v <= 255; ++v) s.bits_.set(v);
    return s;
  }

  void insert(std::uint8_t v) { bits_.set(v); }
  bool contains(std::uint8_t v) const { return bits_.test(v); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  // Smallest member; nullopt when empty.
  std::optional<std::uint8_t> min() const {
    const std::size_t first = bits_._Find_first();
    if (first >= 256) return std::nullopt;
    return static_cast<std::uint8_t>(first);
  }

  // Closed range [lo, hi] if the set is exactly one contiguous run.
  bool is_range(std::uint8_t* lo, std::uint8_t* hi) const;

  ByteSet operator&(const ByteSet& o) const { return ByteSet(bits_ & o.bits_); }
  ByteSet operator|(const ByteSet& o) const { return ByteSet(bits_ | o.bits_); }
  ByteSet operator~() const { return ByteSet(~bits_); }
  ByteSet& operator&=(const ByteSet& o) {
    bits_ &= o.bits_;
    return *this;
  }
  bool operator==(const ByteSet& o) const { return bits_ == o.bits_; }

 private:
  explicit ByteSet(std::bitset<256> b) : bits_(b) {}
  std::bitset<256> bits_;
};

}  // namespace ebf

#endif  // EBF_COMMON_BYTE_SET_HPP_
