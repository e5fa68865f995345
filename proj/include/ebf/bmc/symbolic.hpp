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
#ifndef EBF_BMC_SYMBOLIC_HPP_
#define EBF_BMC_SYMBOLIC_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/bmc/exec_context.hpp"
#include "ebf/common/byte_set.hpp"
#include "ebf/common/bytes.hpp"

namespace ebf::bmc {

struct SymbolicByte {
  bool symbolic = false;
  std::uint8_t value = 0;   // when concrete
  std::string var;          // when symbolic
  ByteSet domain = ByteSet::all();

  static SymbolicByte concrete(std::uint8_t v) {
    SymbolicByte b;
    b.value = v;
    return b;
  }
  static SymbolicByte make_symbolic(std::string var, ByteSet domain = ByteSet::all()) {
    SymbolicByte b;
    b.symbolic = true;
    b.var = std::move(var);
    b.domain = domain;
    return b;
  }
};

// Symbolic frame length. The frame is bytes[0, n) for some n in
// [min_len, bytes.size()].
struct LengthVar {
  std::string name = "len";
  std::size_t min_len = 0;
};

class PacketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SymbolicPacket {
  std::string name;
  std::vector<SymbolicByte> bytes;
  std::optional<LengthVar> length_var;

  static SymbolicPacket from_concrete(std::string name, ByteView frame);
  // Every position symbolic (vars b0, b1, ...) with a length variable
  // ranging over [min_len, max_len].
  static SymbolicPacket fully_symbolic(std::string name, std::size_t min_len,
                                       std::size_t max_len);

  // Replaces the byte at pos with a fresh symbolic variable "b<pos>".
  SymbolicPacket& make_symbolic(std::size_t pos, ByteSet domain = ByteSet::all());

  std::size_t max_length() const { return bytes.size(); }
  std::size_t min_length() const {
    return length_var ? length_var->min_len : bytes.size();
  }
  std::size_t symbolic_count() const;

  // Position of a variable, or nullopt.
  std::optional<std::size_t> position_of(const std::string& var) const;

  // Throws PacketError when an invariant fails: empty packet, empty domain,
  // duplicate variable name, length bounds out of range.
  void validate() const;
};

struct Constraint {
  enum class Kind { kEq, kInSet, kInRange, kLenEq, kLenLe, kLenGe };

  Kind kind = Kind::kEq;
  std::string var;
  ByteSet set;              // kInSet
  std::uint8_t lo = 0;      // kEq (lo), kInRange
  std::uint8_t hi = 0;      // kInRange
  std::size_t n = 0;        // length kinds

  static Constraint eq(std::string var, std::uint8_t v);
  static Constraint in_set(std::string var, ByteSet s);
  static Constraint in_range(std::string var, std::uint8_t lo, std::uint8_t hi);
  static Constraint len_eq(std::string var, std::size_t n);
  static Constraint len_le(std::string var, std::size_t n);
  static Constraint len_ge(std::string var, std::size_t n);
  // The tightest of eq / in_range / in_set describing s.
  static Constraint from_set(std::string var, const ByteSet& s);

  bool is_length() const {
    return kind == Kind::kLenEq || kind == Kind::kLenLe || kind == Kind::kLenGe;
  }
  // Allowed byte values for byte constraints.
  ByteSet allowed() const;
  std::string to_string() const;
};

// One recorded branch decision on a symbolic position (or on the length).
struct Decision {
  static constexpr std::size_t kLengthPos = static_cast<std::size_t>(-1);

  SiteId site = 0;
  std::size_t pos = 0;
  std::size_t arm = 0;

  bool is_length() const { return pos == kLengthPos; }
  bool operator==(const Decision&) const = default;
};

struct PathCondition {
  std::vector<Constraint> conjunction;
  std::vector<Decision> decisions;
  // "site.arm" labels joined with '-', "L.<n>" for the length; "entry" for
  // the empty path.
  std::string path_id;
  std::size_t depth = 0;
  // The path reached the depth bound with decisions still pending.
  bool cut_at_bound = false;
  // The symbolic run ended in a trap.
  std::optional<Trap> trap;
};

std::string make_path_id(const std::vector<Decision>& decisions);

}  // namespace ebf::bmc

#endif  // EBF_BMC_SYMBOLIC_HPP_
