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
#ifndef EBF_BMC_EXEC_CONTEXT_HPP_
#define EBF_BMC_EXEC_CONTEXT_HPP_

// The decision-program interface. Packet handling code is written once
// against ExecContext and only ever inspects input bytes through branch():
// the concrete context answers from real bytes, the symbolic context forks
// over the feasible arms. value() is for data flow only; in symbolic mode it
// yields the current domain minimum, so control flow must never depend on it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebf/common/byte_set.hpp"
#include "ebf/common/bytes.hpp"

namespace ebf::bmc {

using SiteId = std::uint16_t;

// Splits the 256 byte values into arm_count() arms. Arms may be empty.
class Partition {
 public:
  virtual ~Partition() = default;
  virtual std::size_t arm_count() const = 0;
  virtual std::size_t arm_of(std::uint8_t b) const = 0;

  // One set per arm, built by classifying every byte value, so the sets and
  // arm_of() can never disagree.
  std::vector<ByteSet> arm_sets() const;
};

template <typename F>
class FnPartition final : public Partition {
 public:
  FnPartition(std::size_t arms, F f) : arms_(arms), f_(std::move(f)) {}
  std::size_t arm_count() const override { return arms_; }
  std::size_t arm_of(std::uint8_t b) const override { return f_(b); }

 private:
  std::size_t arms_;
  F f_;
};

template <typename F>
FnPartition<F> partition(std::size_t arms, F f) {
  return FnPartition<F>(arms, std::move(f));
}

enum class TrapKind {
  kAbsentHandleRelease,
  kIndexOutOfBounds,
  kResourceLeak,
  kAssertionViolation,
};

std::string_view trap_kind_name(TrapKind k);
std::optional<TrapKind> trap_kind_from_name(std::string_view s);

// Thrown by ExecContext::trap(); reified into a verdict by the caller.
struct Trap {
  TrapKind kind;
  SiteId site;
};

class ExecContext {
 public:
  virtual ~ExecContext() = default;

  // Length of the frame being handled.
  virtual std::size_t frame_length() = 0;

  // Selects the arm of p containing the byte at pos (pos < frame_length()).
  virtual std::size_t branch(SiteId site, std::size_t pos, const Partition& p) = 0;

  virtual std::uint8_t value(std::size_t pos) = 0;

  // Coverage for branches decided by concrete program state.
  virtual void probe(SiteId site, std::size_t arm) = 0;

  [[noreturn]] virtual void trap(TrapKind kind, SiteId site) {
    throw Trap{kind, site};
  }

  // Counterexample tracing. Models call step() only when tracing() is true
  // so that building state snapshots costs nothing on the fast path.
  virtual bool tracing() const { return false; }
  virtual void step(std::string_view /*label*/, std::string /*state*/) {}
};

// Receives every (site, arm) the concrete context passes through.
class ProbeHook {
 public:
  virtual ~ProbeHook() = default;
  virtual void on_probe(SiteId site, std::size_t arm) = 0;
};

// Runs a program on real bytes.
class ConcreteContext : public ExecContext {
 public:
  explicit ConcreteContext(ByteView frame, ProbeHook* hook = nullptr)
      : frame_(frame), hook_(hook) {}

  std::size_t frame_length() override { return frame_.size(); }
  std::size_t branch(SiteId site, std::size_t pos, const Partition& p) override {
    const std::size_t arm = p.arm_of(frame_[pos]);
    if (hook_ != nullptr) hook_->on_probe(site, arm);
    return arm;
  }
  std::uint8_t value(std::size_t pos) override { return frame_[pos]; }
  void probe(SiteId site, std::size_t arm) override {
    if (hook_ != nullptr) hook_->on_probe(site, arm);
  }

 private:
  ByteView frame_;
  ProbeHook* hook_;
};

// Names sites in traces and path ids; supplied by the model's owner.
using SiteNamer = std::function<std::string(SiteId)>;

using Program = std::function<void(ExecContext&)>;

}  // namespace ebf::bmc

#endif  // EBF_BMC_EXEC_CONTEXT_HPP_
