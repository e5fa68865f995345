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
#include "ebf/bmc/symbolic.hpp"

#include <set>
#include <sstream>

#include "ebf/common/bytes.hpp"

namespace ebf::bmc {

std::vector<ByteSet> Partition::arm_sets() const {
  std::vector<ByteSet> sets(arm_count());
  for (int v = 0; v < 256; ++v) {
    const std::size_t arm = arm_of(static_cast<std::uint8_t>(v));
    if (arm >= sets.size()) throw std::logic_error("partition arm index out of range");
    sets[arm].insert(static_cast<std::uint8_t>(v));
  }
  return sets;
}

std::string_view trap_kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::kAbsentHandleRelease: return "AbsentHandleRelease";
    case TrapKind::kIndexOutOfBounds: return "IndexOutOfBounds";
    case TrapKind::kResourceLeak: return "ResourceLeak";
    case TrapKind::kAssertionViolation: return "AssertionViolation";
  }
  return "?";
}

std::optional<TrapKind> trap_kind_from_name(std::string_view s) {
  for (auto k : {TrapKind::kAbsentHandleRelease, TrapKind::kIndexOutOfBounds,
                 TrapKind::kResourceLeak, TrapKind::kAssertionViolation}) {
    if (trap_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

SymbolicPacket SymbolicPacket::from_concrete(std::string name, ByteView frame) {
  SymbolicPacket p;
  p.name = std::move(name);
  for (auto b : frame) p.bytes.push_back(SymbolicByte::concrete(b));
  return p;
}

SymbolicPacket SymbolicPacket::fully_symbolic(std::string name, std::size_t min_len,
                                              std::size_t max_len) {
  SymbolicPacket p;
  p.name = std::move(name);
  for (std::size_t i = 0; i < max_len; ++i) {
    p.bytes.push_back(SymbolicByte::make_symbolic("b" + std::to_string(i)));
  }
  if (min_len != max_len) p.length_var = LengthVar{"len", min_len};
  return p;
}

SymbolicPacket& SymbolicPacket::make_symbolic(std::size_t pos, ByteSet domain) {
  if (pos >= bytes.size()) throw PacketError("symbolic position out of range");
  bytes[pos] = SymbolicByte::make_symbolic("b" + std::to_string(pos), domain);
  return *this;
}

std::size_t SymbolicPacket::symbolic_count() const {
  std::size_t n = 0;
  for (const auto& b : bytes) n += b.symbolic ? 1 : 0;
  return n;
}

std::optional<std::size_t> SymbolicPacket::position_of(const std::string& var) const {
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i].symbolic && bytes[i].var == var) return i;
  }
  return std::nullopt;
}

void SymbolicPacket::validate() const {
  if (bytes.empty()) throw PacketError("symbolic packet needs at least one byte");
  std::set<std::string> seen;
  for (const auto& b : bytes) {
    if (!b.symbolic) continue;
    if (b.domain.empty()) throw PacketError("empty domain for " + b.var);
    if (!seen.insert(b.var).second) throw PacketError("duplicate variable " + b.var);
  }
  if (length_var) {
    if (length_var->min_len > bytes.size()) {
      throw PacketError("length lower bound exceeds packet size");
    }
    if (seen.count(length_var->name) != 0) {
      throw PacketError("length variable name clashes with a byte variable");
    }
  }
}

Constraint Constraint::eq(std::string var, std::uint8_t v) {
  Constraint c;
  c.kind = Kind::kEq;
  c.var = std::move(var);
  c.lo = v;
  return c;
}

Constraint Constraint::in_set(std::string var, ByteSet s) {
  Constraint c;
  c.kind = Kind::kInSet;
  c.var = std::move(var);
  c.set = s;
  return c;
}

Constraint Constraint::in_range(std::string var, std::uint8_t lo, std::uint8_t hi) {
  Constraint c;
  c.kind = Kind::kInRange;
  c.var = std::move(var);
  c.lo = lo;
  c.hi = hi;
  return c;
}

Constraint Constraint::len_eq(std::string var, std::size_t n) {
  Constraint c;
  c.kind = Kind::kLenEq;
  c.var = std::move(var);
  c.n = n;
  return c;
}

Constraint Constraint::len_le(std::string var, std::size_t n) {
  Constraint c = len_eq(std::move(var), n);
  c.kind = Kind::kLenLe;
  return c;
}

Constraint Constraint::len_ge(std::string var, std::size_t n) {
  Constraint c = len_eq(std::move(var), n);
  c.kind = Kind::kLenGe;
  return c;
}

Constraint Constraint::from_set(std::string var, const ByteSet& s) {
  std::uint8_t lo = 0;
  std::uint8_t hi = 0;
  if (s.size() == 1) return eq(std::move(var), *s.min());
  if (s.is_range(&lo, &hi)) return in_range(std::move(var), lo, hi);
  return in_set(std::move(var), s);
}

ByteSet Constraint::allowed() const {
  switch (kind) {
    case Kind::kEq: return ByteSet::of(lo);
    case Kind::kInSet: return set;
    case Kind::kInRange: return ByteSet::range(lo, hi);
    default: return ByteSet::all();
  }
}

std::string Constraint::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kEq:
      os << var << " == 0x" << to_hex(Bytes{lo});
      break;
    case Kind::kInRange:
      os << var << " in [0x" << to_hex(Bytes{lo}) << ", 0x" << to_hex(Bytes{hi}) << "]";
      break;
    case Kind::kInSet: {
      os << var << " in {";
      bool first = true;
      for (int v = 0; v < 256; ++v) {
        if (!set.contains(static_cast<std::uint8_t>(v))) continue;
        os << (first ? "" : ",") << "0x" << to_hex(Bytes{static_cast<std::uint8_t>(v)});
        first = false;
      }
      os << "}";
      break;
    }
    case Kind::kLenEq: os << var << " == " << n; break;
    case Kind::kLenLe: os << var << " <= " << n; break;
    case Kind::kLenGe: os << var << " >= " << n; break;
  }
  return os.str();
}

std::string make_path_id(const std::vector<Decision>& decisions) {
  if (decisions.empty()) return "entry";
  std::string id;
  for (const auto& d : decisions) {
    if (!id.empty()) id += '-';
    if (d.is_length()) {
      id += "L." + std::to_string(d.arm);
    } else {
      id += std::to_string(d.site) + "." + std::to_string(d.arm);
    }
  }
  return id;
}

}  // namespace ebf::bmc
