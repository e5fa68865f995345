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

#include "ebf/orchestrator/harness.hpp"

namespace ebf::orchestrator {

using channel::Direction;
using target::Verdict;
using target::VerdictKind;

std::vector<mqtt::Packet> prefix_script(fuzz::Prefix p) {
  std::vector<mqtt::Packet> out;
  if (p == fuzz::Prefix::kNone) return out;
  out.push_back(mqtt::Connect{"MQTT", 60, "ebf-fuzz"});
  if (p == fuzz::Prefix::kConnectSubscribe) out.push_back(mqtt::Subscribe{1, {{"a/#", 0}}});
  return out;
}

SessionHarness::SessionHarness(const target::TargetConfig& config, target::TransportKind transport,
                               const target::EndpointOptions& options) {
  if (!options.keylog) throw HarnessError("the interposer needs a key log path");
  transport_ = target::make_transport(transport, config, options);
  client_ = std::make_unique<target::ClientEndpoint>(*transport_, options);
  keylog_ = channel::parse_keylog(*options.keylog);
  if (keylog_.find(client_->keys().session_id) == nullptr) {
    throw HarnessError("key log " + options.keylog->string() + " has no entry for session " +
                       to_hex(client_->keys().session_id));
  }
  for (std::size_t i = 0; i < fuzz::kPrefixCount; ++i) {
    std::vector<std::pair<mqtt::Packet, mqtt::RawFrame>> frames;
    for (auto& p : prefix_script(static_cast<fuzz::Prefix>(i))) {
      mqtt::RawFrame f = mqtt::encode_packet(p);
      frames.emplace_back(std::move(p), std::move(f));
    }
    prefixes_.push_back(std::move(frames));
  }
  pingreq_ = mqtt::encode_packet(mqtt::Pingreq{});
}

Bytes SessionHarness::tamper(const Bytes& wire, const fuzz::Injection& inj, fuzz::Mode mode,
                             bool replace) {
  if (mode == fuzz::Mode::kBlind) {
    Bytes out = wire;
    for (const auto& op : inj.ops) out = fuzz::mutate(out, op);
    // A blind interposer that forwards the record untouched is not fuzzing.
    if (out == wire) out.back() ^= 0x01;
    return out;
  }
  auto record = channel::decode_record(wire);
  if (!record) throw HarnessError("endpoint produced an undecodable record");
  channel::Record r = *record;
  if (replace) {
    auto replaced = fuzz::replace_encrypted(r, keylog_, inj.frame);
    if (!replaced.ok()) throw HarnessError(std::string(fuzz::mutate_error_name(replaced.error())));
    r = *replaced;
  }
  for (const auto& op : inj.ops) {
    auto mutated = fuzz::mutate_encrypted(r, keylog_, op);
    if (!mutated.ok()) throw HarnessError(std::string(fuzz::mutate_error_name(mutated.error())));
    r = *mutated;
  }
  return channel::encode_record(r);
}

Verdict SessionHarness::execute(const fuzz::Injection& inj, fuzz::Mode mode, bmc::ProbeHook* hook) {
  client_->open_connection();
  Verdict verdict;
  for (const auto& [packet, frame] : prefixes_[static_cast<std::size_t>(inj.prefix)]) {
    target::client_sent(client_->state(), packet);
    const target::Delivery d = transport_->deliver(client_->seal(frame), nullptr);
    merge_verdict(verdict, d.verdict);
    if (d.verdict.kind == VerdictKind::kCrash) return verdict;
    if (d.response) client_->receive(*d.response, nullptr);
  }

  if (inj.direction == Direction::kClientToServer) {
    // The client believes it sent the seed frame.
    if (auto p = mqtt::decode_packet(inj.frame); p.ok()) target::client_sent(client_->state(), *p);
    const Bytes wire = tamper(client_->seal(inj.frame), inj, mode, false);
    const target::Delivery d = transport_->deliver(wire, hook);
    merge_verdict(verdict, d.verdict);
    if (d.verdict.kind == VerdictKind::kCrash) return verdict;
    if (d.response) merge_verdict(verdict, client_->receive(*d.response, hook));
  } else {
    // The client pings; the interposer swaps the broker's answer.
    target::client_sent(client_->state(), mqtt::Pingreq{});
    const target::Delivery d = transport_->deliver(client_->seal(pingreq_), nullptr);
    merge_verdict(verdict, d.verdict);
    if (d.verdict.kind == VerdictKind::kCrash) return verdict;
    if (d.response) {
      const Bytes wire = tamper(*d.response, inj, mode, true);
      merge_verdict(verdict, client_->receive(wire, hook));
    }
  }
  merge_verdict(verdict, transport_->close_connection(hook));
  return verdict;
}

}  // namespace ebf::orchestrator
