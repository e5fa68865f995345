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

// Python bindings. Bytes cross as `bytes`, reports as JSON text; the
// package wrapper turns those into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>

#include "ebf/channel/keylog.hpp"
#include "ebf/channel/secure_channel.hpp"
#include "ebf/cli/cli.hpp"
#include "ebf/mqtt/codec.hpp"
#include "ebf/orchestrator/campaign.hpp"
#include "ebf/orchestrator/report.hpp"

namespace py = pybind11;

namespace ebf {
namespace {

Bytes to_cpp(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::bytes to_py(ByteView b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed(const py::bytes& b, const char* what) {
  const Bytes v = to_cpp(b);
  if (v.size() != N) {
    throw py::value_error(std::string(what) + " must be " + std::to_string(N) + " bytes");
  }
  std::array<std::uint8_t, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

channel::Direction direction(int d) {
  if (d != 1 && d != 2) throw py::value_error("direction must be 1 (client) or 2 (server)");
  return static_cast<channel::Direction>(d);
}

std::string describe_frame(const py::bytes& frame) {
  const auto r = mqtt::decode_packet(to_cpp(frame));
  if (!r.ok()) {
    throw py::value_error(std::string(mqtt::decode_error_name(r.error().kind)) + "(" +
                          r.error().field + ")");
  }
  return mqtt::describe(r.value());
}

py::dict establish(const py::bytes& secret, const py::bytes& cn, const py::bytes& sn) {
  const auto k = channel::establish_session(to_cpp(secret),
                                            fixed<channel::kHelloNonceLen>(cn, "client_nonce"),
                                            fixed<channel::kHelloNonceLen>(sn, "server_nonce"));
  py::dict d;
  d["session_id"] = to_py(k.session_id);
  d["client_key"] = to_py(k.client_key);
  d["server_key"] = to_py(k.server_key);
  return d;
}

py::bytes seal_at(const py::bytes& key, const py::bytes& sid, int dir, std::uint64_t seq,
                  const py::bytes& plaintext) {
  return to_py(channel::encode_record(
      channel::seal_at(fixed<channel::kKeyLen>(key, "key"),
                       fixed<channel::kSessionIdLen>(sid, "session_id"), direction(dir), seq,
                       to_cpp(plaintext))));
}

py::bytes open_at(const py::bytes& key, const py::bytes& sid, const py::bytes& wire) {
  const auto rec = channel::decode_record(to_cpp(wire));
  if (!rec) throw py::value_error("MalformedRecord");
  const auto r = channel::open_at(fixed<channel::kKeyLen>(key, "key"),
                                  fixed<channel::kSessionIdLen>(sid, "session_id"), *rec);
  if (!r.ok()) throw py::value_error(std::string(channel::channel_error_name(r.error())));
  return to_py(r.value());
}

py::list parse_keylog(const std::string& text) {
  py::list out;
  for (const auto& e : channel::parse_keylog_text(text).entries) {
    py::dict d;
    d["session_id"] = to_py(e.session_id);
    d["client_key"] = to_py(e.client_key);
    d["server_key"] = to_py(e.server_key);
    d["cipher"] = e.cipher_name;
    out.append(d);
  }
  return out;
}

// config_json uses the CLI config file schema.
std::string run_campaign(const std::string& config_json) {
  const auto config = cli::load_config_text(config_json);
  orchestrator::CampaignReport r;
  {
    py::gil_scoped_release release;
    r = orchestrator::run_campaign(config);
  }
  return orchestrator::report_to_json(r);
}

py::dict replay(const std::string& path) {
  const auto r = orchestrator::replay_artifact(path);
  py::dict d;
  d["expected_kind"] = r.expected_kind;
  d["kind"] = r.verdict.anomaly_class();
  d["reproduced"] = r.reproduced;
  return d;
}

}  // namespace
}  // namespace ebf

PYBIND11_MODULE(_core, m) {
  m.doc() = "EBF: BMC-seeded, encryption-aware fuzzing of an MQTT broker";

  static py::exception<std::runtime_error> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<std::runtime_error> report_error(m, "ReportError", PyExc_ValueError);
  static py::exception<std::runtime_error> keylog_error(m, "KeyLogError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ebf::cli::ParseError& e) {
      py::set_error(config_error, e.what());
    } catch (const ebf::orchestrator::ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const ebf::orchestrator::ReportError& e) {
      py::set_error(report_error, e.what());
    } catch (const ebf::channel::KeyLogError& e) {
      py::set_error(keylog_error, e.what());
    }
  });

  m.def("encode_remaining_length",
        [](std::uint32_t n) { return ebf::to_py(ebf::mqtt::encode_remaining_length(n)); },
        py::arg("n"));
  m.def("decode_outcome_class",
        [](const py::bytes& f) { return ebf::mqtt::decode_outcome_class(ebf::to_cpp(f)); },
        py::arg("frame"), "Packet type and decode result, e.g. '12:ok'.");
  m.def("describe_frame", &ebf::describe_frame, py::arg("frame"),
        "Decodes a frame; raises ValueError naming the decode error.");

  m.def("establish_session", &ebf::establish, py::arg("secret"), py::arg("client_nonce"),
        py::arg("server_nonce"));
  m.def("seal_at", &ebf::seal_at, py::arg("key"), py::arg("session_id"), py::arg("direction"),
        py::arg("seq"), py::arg("plaintext"), "Sealed record in wire form.");
  m.def("open_at", &ebf::open_at, py::arg("key"), py::arg("session_id"), py::arg("wire"));
  m.def("parse_keylog", &ebf::parse_keylog, py::arg("text"));

  m.def("run_campaign", &ebf::run_campaign, py::arg("config_json") = "{}",
        "Runs both phases; returns the report as JSON text.");
  m.def("summarize_report",
        [](const std::string& text) {
          return ebf::orchestrator::summarize_report(ebf::orchestrator::report_from_json(text));
        },
        py::arg("report_json"));
  m.def("replay", &ebf::replay, py::arg("reproducer"));

  m.attr("__version__") = EBF_VERSION;
}
