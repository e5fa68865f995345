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

#include <set>

#include <gtest/gtest.h>

#include "ebf/channel/keylog.hpp"
#include "ebf/target/broker.hpp"
#include "ebf/target/session.hpp"
#include "ebf/target/sites.hpp"
#include "packet_gen.hpp"

namespace ebf::target {
namespace {

using mqtt::Packet;

struct Recorder : bmc::ProbeHook {
  std::vector<std::pair<bmc::SiteId, std::size_t>> seen;
  void on_probe(bmc::SiteId site, std::size_t arm) override { seen.emplace_back(site, arm); }
};

TargetConfig with_bugs(const std::string& bugs) {
  TargetConfig c;
  c.bugs = *BugSet::parse(bugs);
  return c;
}

mqtt::Connect connect(std::string name = "MQTT") {
  mqtt::Connect c;
  c.protocol_name = std::move(name);
  c.client_id = "unit";
  return c;
}

mqtt::Subscribe subscribe(std::string filter) { return mqtt::Subscribe{1, {{std::move(filter), 0}}}; }

mqtt::Publish publish(std::string topic, std::uint8_t qos = 0, bool dup = false,
                      bool retain = false) {
  mqtt::Publish p;
  p.topic = std::move(topic);
  p.payload = to_bytes("x");
  p.qos = qos;
  if (qos == 1) p.packet_id = 7;
  p.dup = dup;
  p.retain = retain;
  return p;
}

// Runs frames against one connection; returns the last verdict.
Verdict feed(BrokerState& st, const std::vector<Packet>& frames, const TargetConfig& cfg) {
  Verdict last;
  for (const auto& p : frames) last = handle_frame(st, mqtt::encode_packet(p), cfg).verdict;
  return last;
}

const std::vector<Packet> kV4Script = {connect(), subscribe("a/#"), publish("a/b", 1, true, true)};

TEST(BugSet, ParseAndPrint) {
  EXPECT_EQ(BugSet::parse("V1,V3")->to_string(), "V1,V3");
  EXPECT_EQ(*BugSet::parse("all"), BugSet::all());
  EXPECT_EQ(*BugSet::parse("none"), BugSet::none());
  EXPECT_EQ(*BugSet::parse(""), BugSet::none());
  EXPECT_FALSE(BugSet::parse("V5").has_value());
  EXPECT_FALSE(BugSet::parse("V1,,V2").has_value() && BugSet::parse("V1,,V2")->bits() != 3);
}

TEST(HandleFrame, PingreqGetsPingresp) {
  for (const auto& prefix : std::vector<std::vector<Packet>>{{}, {connect()}, {connect(), subscribe("a/#")}}) {
    BrokerState st;
    const TargetConfig cfg;
    feed(st, prefix, cfg);
    const auto r = handle_frame(st, Bytes{0xC0, 0x00}, cfg);
    ASSERT_TRUE(r.response.has_value());
    EXPECT_EQ(*r.response, (Bytes{0xD0, 0x00}));
    EXPECT_EQ(r.verdict.kind, VerdictKind::kOk);
  }
}

TEST(HandleFrame, ProtocolResponses) {
  BrokerState st;
  const TargetConfig cfg;
  auto r = handle_frame(st, mqtt::encode_packet(connect()), cfg);
  ASSERT_TRUE(r.response);
  EXPECT_EQ(mqtt::type_of(*mqtt::decode_packet(*r.response)), mqtt::PacketType::kConnack);
  r = handle_frame(st, mqtt::encode_packet(subscribe("a/#")), cfg);
  ASSERT_TRUE(r.response);
  EXPECT_EQ(mqtt::type_of(*mqtt::decode_packet(*r.response)), mqtt::PacketType::kSuback);
  r = handle_frame(st, mqtt::encode_packet(publish("b", 1)), cfg);
  ASSERT_TRUE(r.response);
  EXPECT_EQ(*mqtt::decode_packet(*r.response), Packet(mqtt::Puback{7}));
  r = handle_frame(st, mqtt::encode_packet(publish("b", 0)), cfg);
  EXPECT_FALSE(r.response.has_value());
  EXPECT_EQ(r.verdict.kind, VerdictKind::kOk);
}

TEST(HandleFrame, V1DisconnectWithoutHandle) {
  BrokerState st;
  const auto v = handle_frame(st, mqtt::encode_packet(mqtt::Disconnect{}), with_bugs("V1")).verdict;
  EXPECT_EQ(v.kind, VerdictKind::kCrash);
  EXPECT_EQ(v.crash, bmc::TrapKind::kAbsentHandleRelease);
  EXPECT_FALSE(v.probe_trace.empty());
}

TEST(HandleFrame, V2LongTopicWhenConnected) {
  const TargetConfig cfg = with_bugs("V2");
  BrokerState st;
  feed(st, {connect()}, cfg);
  EXPECT_EQ(st.phase, Phase::kConnected);
  const auto v = handle_frame(st, mqtt::encode_packet(publish(std::string(300, 'a'))), cfg).verdict;
  EXPECT_EQ(v.kind, VerdictKind::kCrash);
  EXPECT_EQ(v.crash, bmc::TrapKind::kIndexOutOfBounds);
  // At capacity is still fine.
  BrokerState st2;
  feed(st2, {connect()}, cfg);
  EXPECT_FALSE(handle_frame(st2, mqtt::encode_packet(publish(std::string(kTopicBufferCapacity, 'a'))), cfg)
                   .verdict.is_anomaly());
}

TEST(Session, CleanTranscript) {
  const auto r = run_session({connect(), mqtt::Pingreq{}, mqtt::Disconnect{}}, TargetConfig{});
  EXPECT_EQ(r.verdict.kind, VerdictKind::kOk);
  // CONNACK and PINGRESP come back; DISCONNECT has no reply in MQTT 3.1.1.
  ASSERT_EQ(r.transcript.size(), 5u);
  const std::vector<channel::Direction> dirs = {
      channel::Direction::kClientToServer, channel::Direction::kServerToClient,
      channel::Direction::kClientToServer, channel::Direction::kServerToClient,
      channel::Direction::kClientToServer};
  for (std::size_t i = 0; i < dirs.size(); ++i) EXPECT_EQ(r.transcript[i].direction, dirs[i]);
  EXPECT_EQ(r.transcript[3].frame, (Bytes{0xD0, 0x00}));
}

TEST(Session, EmptyScriptRejected) {
  EXPECT_THROW(run_session({}, TargetConfig{}), std::invalid_argument);
}

TEST(Session, V4DeepStatefulTrigger) {
  const auto r = run_session(kV4Script, with_bugs("V4"));
  EXPECT_EQ(r.verdict.kind, VerdictKind::kCrash);
  EXPECT_EQ(r.verdict.crash, bmc::TrapKind::kAssertionViolation);
}

TEST(Session, V4NeedsBothFlagBitsAndTheSubscription) {
  const TargetConfig cfg = with_bugs("V4");
  EXPECT_FALSE(run_session({connect(), subscribe("a/#"), publish("a/b", 1, true, false)}, cfg).verdict.is_anomaly());
  EXPECT_FALSE(run_session({connect(), subscribe("a/#"), publish("a/b", 1, false, true)}, cfg).verdict.is_anomaly());
  EXPECT_FALSE(run_session({connect(), publish("a/b", 1, true, true)}, cfg).verdict.is_anomaly());
  EXPECT_FALSE(run_session({connect(), subscribe("c/#"), publish("a/b", 1, true, true)}, cfg).verdict.is_anomaly());
}

TEST(Session, V3BadProtocolNameLeaks) {
  const auto r = run_session({connect("BAD"), mqtt::Disconnect{}}, with_bugs("V3"));
  EXPECT_EQ(r.verdict.kind, VerdictKind::kLeakDetected);
  EXPECT_EQ(r.verdict.site, kSessionRecordSite);
  EXPECT_EQ(r.verdict.anomaly_class(), "ResourceLeak");
  EXPECT_EQ(run_session({connect("BAD"), mqtt::Disconnect{}}, TargetConfig{}).verdict.kind,
            VerdictKind::kGracefulReject);
}

// Each trigger fires under its own bug, under all bugs, and never without it.
TEST(Bugs, Independence) {
  struct Trigger {
    std::string bug;
    std::vector<Packet> script;
    std::string cls;
  };
  const std::vector<Trigger> triggers = {
      {"V1", {mqtt::Disconnect{}}, "AbsentHandleRelease"},
      {"V2", {connect(), publish(std::string(300, 'a'))}, "IndexOutOfBounds"},
      // Without the DISCONNECT, which would also be V1's trigger; teardown
      // alone finds the leak.
      {"V3", {connect("BAD")}, "ResourceLeak"},
      {"V4", kV4Script, "AssertionViolation"},
  };
  const std::vector<std::string> others = {"V1", "V2", "V3", "V4"};
  for (const auto& t : triggers) {
    SCOPED_TRACE(t.bug);
    EXPECT_EQ(run_session(t.script, with_bugs(t.bug)).verdict.anomaly_class(), t.cls);
    EXPECT_EQ(run_session(t.script, with_bugs("all")).verdict.anomaly_class(), t.cls);
    std::string rest;
    for (const auto& o : others) {
      if (o == t.bug) continue;
      rest += (rest.empty() ? "" : ",") + o;
    }
    EXPECT_FALSE(run_session(t.script, with_bugs(rest)).verdict.is_anomaly());
    EXPECT_FALSE(run_session(t.script, TargetConfig{}).verdict.is_anomaly());
  }
}

TEST(Bugs, NoBugSafetyRandomFrames) {
  Rng rng(404);
  const TargetConfig cfg;
  std::size_t ok = 0;
  for (int i = 0; i < 100000; ++i) {
    BrokerState st;
    const int prefix = i % 3;
    if (prefix >= 1) handle_frame(st, mqtt::encode_packet(connect()), cfg);
    if (prefix >= 2) handle_frame(st, mqtt::encode_packet(subscribe("a/#")), cfg);
    const Bytes frame = rng.chance(1, 2) ? mqtt::encode_packet(testing::random_packet(rng))
                                         : testing::random_bytes(rng, 48);
    const auto v = handle_frame(st, frame, cfg).verdict;
    ASSERT_FALSE(v.is_anomaly()) << to_hex(frame) << " " << v.to_string();
    const auto c = close_connection(st, cfg);
    ASSERT_FALSE(c.is_anomaly()) << to_hex(frame) << " " << c.to_string();
    ASSERT_TRUE(st.ledger.balanced());
    ok += v.kind == VerdictKind::kOk;
  }
  EXPECT_GT(ok, 0u);
}

TEST(Bugs, NoBugSafetyRandomSessions) {
  Rng rng(405);
  const TargetConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    std::vector<Packet> script;
    if (rng.chance(3, 4)) script.push_back(connect());
    const auto n = rng.between(1, 5);
    for (std::int64_t k = 0; k < n; ++k) script.push_back(testing::random_packet(rng));
    EndpointOptions opts;
    opts.nonce_seed = static_cast<std::uint64_t>(i);
    const auto r = run_session(script, cfg, opts);
    ASSERT_FALSE(r.verdict.is_anomaly()) << i << " " << r.verdict.to_string();
  }
}

TEST(Ledger, BalancedWithoutV3) {
  const TargetConfig cfg = with_bugs("V1,V2,V4");
  for (const auto& script : std::vector<std::vector<Packet>>{
           {connect(), mqtt::Disconnect{}},
           {connect("BAD")},
           {connect(), subscribe("a/#"), publish("a/b", 1)},
           {connect(), connect()}}) {
    BrokerState st;
    feed(st, script, cfg);
    close_connection(st, cfg);
    EXPECT_TRUE(st.ledger.balanced());
    EXPECT_EQ(st.ledger.acquired(), st.ledger.released());
  }
}

TEST(Probes, IdsAreUniqueAndInvertible) {
  std::set<std::uint16_t> ids = {kEntryProbe};
  std::size_t total = 0;
  for (bmc::SiteId s = 0; s < kSiteCount; ++s) {
    EXPECT_EQ(site_by_name(site_name(s)), s);
    for (std::size_t a = 0; a < site_arms(s); ++a) {
      const auto id = probe_id(s, a);
      EXPECT_TRUE(ids.insert(id).second) << site_name(s) << "#" << a;
      EXPECT_EQ(probe_site(id), std::make_pair(s, a));
      ++total;
    }
  }
  EXPECT_EQ(total, probe_count());
  EXPECT_FALSE(probe_site(kEntryProbe).has_value());
}

TEST(Probes, EveryArmReportedAtMostOncePerTraversal) {
  Rng rng(3);
  const TargetConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    const Bytes frame = mqtt::encode_packet(testing::random_packet(rng));
    BrokerState st;
    Recorder rec;
    handle_frame(st, frame, cfg, &rec);
    for (const auto& [site, arm] : rec.seen) ASSERT_LT(arm, site_arms(site)) << site_name(site);
  }
}

// handle_frame plus teardown must walk exactly the model's decisions.
TEST(Model, AgreesWithHandleFrameOnProbes) {
  Rng rng(8);
  const TargetConfig cfg = with_bugs("V3");
  const auto program = export_parser_model(cfg);
  auto compare = [&](const Bytes& frame) {
    Recorder model, real;
    bmc::ConcreteContext ctx(frame, &model);
    try {
      program(ctx);
    } catch (const bmc::Trap&) {
    }
    BrokerState st;
    const auto r = handle_frame(st, frame, cfg, &real);
    if (r.verdict.kind != VerdictKind::kCrash) close_connection(st, cfg, &real);
    return model.seen == real.seen;
  };
  EXPECT_TRUE(compare(Bytes{0xC0, 0x00}));
  for (int i = 0; i < 20000; ++i) {
    const Bytes frame = rng.chance(1, 2) ? mqtt::encode_packet(testing::random_packet(rng))
                                         : testing::random_bytes(rng, 24);
    ASSERT_TRUE(compare(frame)) << to_hex(frame);
  }
}

TEST(Model, DecoderAgreesWithCodec) {
  Rng rng(9);
  const TargetConfig cfg;
  for (int i = 0; i < 100000; ++i) {
    Bytes frame = testing::random_bytes(rng, 40);
    if (i % 2 == 0) frame = mqtt::encode_packet(testing::random_packet(rng));
    if (i % 4 == 1 && !frame.empty()) frame[0] = static_cast<std::uint8_t>(frame[0] & 0xF6);
    const auto a = model_decode(frame, cfg);
    const auto b = mqtt::decode_packet(frame);
    ASSERT_EQ(a.ok(), b.ok()) << to_hex(frame);
    if (a.ok()) {
      ASSERT_EQ(*a, *b) << to_hex(frame);
    } else {
      ASSERT_EQ(a.error().kind, b.error().kind) << to_hex(frame);
    }
  }
}

class TransportTest : public ::testing::TestWithParam<TransportKind> {};

TEST_P(TransportTest, MatchesInMemoryTranscript) {
  const std::vector<Packet> script = {connect(), subscribe("a/#"), publish("a/b", 1), mqtt::Pingreq{},
                                      mqtt::Disconnect{}};
  EndpointOptions opts;
  opts.nonce_seed = 77;
  const auto mem = run_session(script, TargetConfig{}, opts, TransportKind::kInMemory);
  const auto other = run_session(script, TargetConfig{}, opts, GetParam());
  EXPECT_EQ(other.verdict.kind, VerdictKind::kOk);
  ASSERT_EQ(other.transcript.size(), mem.transcript.size());
  for (std::size_t i = 0; i < mem.transcript.size(); ++i) {
    EXPECT_EQ(other.transcript[i].direction, mem.transcript[i].direction);
    EXPECT_EQ(other.transcript[i].frame, mem.transcript[i].frame);
  }
}

TEST_P(TransportTest, CrashesAreReported) {
  const auto r = run_session({mqtt::Disconnect{}}, with_bugs("V1"), {}, GetParam());
  EXPECT_EQ(r.verdict.anomaly_class(), "AbsentHandleRelease");
  const auto leak = run_session({connect("BAD"), mqtt::Disconnect{}}, with_bugs("V3"), {}, GetParam());
  EXPECT_EQ(leak.verdict.anomaly_class(), "ResourceLeak");
}

INSTANTIATE_TEST_SUITE_P(Kinds, TransportTest,
                         ::testing::Values(TransportKind::kTcp, TransportKind::kSubprocess),
                         [](const auto& info) {
                           return info.param == TransportKind::kTcp ? "Tcp" : "Subprocess";
                         });

TEST(Session, KeyLogGetsTheSessionKeys) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("ebf-target-test-" + std::to_string(::getpid()) + ".keylog");
  std::filesystem::remove(path);
  EndpointOptions opts;
  opts.keylog = path;
  run_session({connect()}, TargetConfig{}, opts);
  run_session({connect()}, TargetConfig{}, [&] {
    auto o = opts;
    o.nonce_seed = 1;
    return o;
  }());
  const auto log = channel::parse_keylog(path);
  EXPECT_EQ(log.entries.size(), 2u);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ebf::target
