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

#ifndef EBF_ORCHESTRATOR_HARNESS_HPP_
#define EBF_ORCHESTRATOR_HARNESS_HPP_

// The interposer between the reference client and the broker. The broker
// exports its session keys to the key log; the harness reads them back from
// the file and uses them, and nothing else, to rewrite records in flight.

#include <memory>
#include <stdexcept>
#include <vector>

#include "ebf/channel/keylog.hpp"
#include "ebf/fuzz/fuzzer.hpp"
#include "ebf/target/session.hpp"

namespace ebf::orchestrator {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Packets the client sends for each prefix.
std::vector<mqtt::Packet> prefix_script(fuzz::Prefix p);

class SessionHarness final : public fuzz::Harness {
 public:
  // options.keylog must be set. Throws channel::KeyLogError when the log
  // cannot be read and HarnessError when it lacks this session.
  SessionHarness(const target::TargetConfig& config, target::TransportKind transport,
                 const target::EndpointOptions& options);

  target::Verdict execute(const fuzz::Injection& inj, fuzz::Mode mode, bmc::ProbeHook* hook) override;

  const channel::KeyLog& keylog() const { return keylog_; }
  const channel::SessionId& session_id() const { return client_->keys().session_id; }

 private:
  Bytes tamper(const Bytes& wire, const fuzz::Injection& inj, fuzz::Mode mode, bool replace);

  std::unique_ptr<target::BrokerTransport> transport_;
  std::unique_ptr<target::ClientEndpoint> client_;
  channel::KeyLog keylog_;
  std::vector<std::vector<std::pair<mqtt::Packet, mqtt::RawFrame>>> prefixes_;
  mqtt::RawFrame pingreq_;
};

}  // namespace ebf::orchestrator

#endif  // EBF_ORCHESTRATOR_HARNESS_HPP_
