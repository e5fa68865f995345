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

#include "ebf/orchestrator/report.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ebf/common/digest.hpp"
#include "json.hpp"

namespace ebf::orchestrator {
namespace {

using nlohmann::json;

json finding_json(const Finding& f) {
  return json{{"id", f.id},
              {"kind", f.kind},
              {"phase", std::string(phase_name(f.phase))},
              {"site", f.site},
              {"detail", f.detail},
              {"reproducer_hex", to_hex(f.reproducer)},
              {"prefix", f.prefix},
              {"direction", f.direction},
              {"reproducer_file", f.reproducer_file},
              {"trace", f.trace},
              {"first_seen", f.first_seen},
              {"validated", f.validated}};
}

Finding finding_from(const json& j) {
  Finding f;
  f.id = j.at("id").get<std::string>();
  f.kind = j.at("kind").get<std::string>();
  const auto phase = j.at("phase").get<std::string>();
  if (phase == "BMC") {
    f.phase = Phase::kBmc;
  } else if (phase == "Fuzz") {
    f.phase = Phase::kFuzz;
  } else {
    throw ReportError("unknown phase '" + phase + "'");
  }
  f.site = j.at("site").get<std::string>();
  f.detail = j.at("detail").get<std::string>();
  auto bytes = from_hex(j.at("reproducer_hex").get<std::string>());
  if (!bytes) throw ReportError("finding " + f.id + ": bad reproducer_hex");
  f.reproducer = std::move(*bytes);
  f.prefix = j.at("prefix").get<std::string>();
  f.direction = j.at("direction").get<std::string>();
  f.reproducer_file = j.at("reproducer_file").get<std::string>();
  f.trace = j.at("trace").get<std::vector<std::string>>();
  f.first_seen = j.at("first_seen").get<std::string>();
  f.validated = j.at("validated").get<bool>();
  return f;
}

json findings_json(const std::vector<Finding>& fs) {
  json a = json::array();
  for (const auto& f : fs) a.push_back(finding_json(f));
  return a;
}

std::vector<Finding> findings_from(const json& j) {
  std::vector<Finding> out;
  for (const auto& e : j) out.push_back(finding_from(e));
  return out;
}

}  // namespace

std::string_view phase_name(Phase p) { return p == Phase::kBmc ? "BMC" : "Fuzz"; }

std::string finding_id(const std::string& kind, const std::string& prefix,
                       const std::string& direction, ByteView reproducer) {
  Bytes key = to_bytes(kind + "|" + prefix + "|" + direction + "|");
  key.insert(key.end(), reproducer.begin(), reproducer.end());
  return short_digest(key);
}

bool finding_less(const Finding& a, const Finding& b) {
  if (a.phase != b.phase) return a.phase == Phase::kBmc;
  if (a.phase == Phase::kFuzz) {
    const auto na = std::stoull(a.first_seen.empty() ? "0" : a.first_seen);
    const auto nb = std::stoull(b.first_seen.empty() ? "0" : b.first_seen);
    if (na != nb) return na < nb;
  } else if (a.first_seen != b.first_seen) {
    return a.first_seen < b.first_seen;
  }
  return a.id < b.id;
}

std::string report_to_json(const CampaignReport& r, int indent) {
  json j;
  j["version"] = r.version;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  j["config"] = {{"target", r.config.target},
                 {"bugs", r.config.bugs},
                 {"bmc", {{"depth", r.config.bmc_depth}, {"budget_seconds", r.config.bmc_budget_seconds}}},
                 {"fuzz",
                  {{"budget_seconds", r.config.fuzz_budget_seconds},
                   {"max_execs", r.config.max_execs},
                   {"seed", r.config.seed},
                   {"mode", r.config.mode}}},
                 {"transport", r.config.transport},
                 {"seed_source", r.config.seed_source}};
  j["timings"] = {{"bmc_seconds", r.timings.bmc_seconds},
                  {"fuzz_seconds", r.timings.fuzz_seconds},
                  {"total_seconds", r.timings.total_seconds}};
  j["bmc"] = {{"ran", r.bmc.ran},
              {"paths", r.bmc.paths},
              {"truncated", r.bmc.truncated},
              {"depth_bounded", r.bmc.depth_bounded},
              {"seeds", r.bmc.seeds},
              {"findings", findings_json(r.bmc.findings)}};
  j["fuzz"] = {{"ran", r.fuzz.ran},
               {"execs", r.fuzz.execs},
               {"execs_per_sec", r.fuzz.execs_per_sec},
               {"corpus_size", r.fuzz.corpus_size},
               {"coverage_buckets", r.fuzz.coverage_buckets},
               {"coverage_edges", r.fuzz.coverage_edges},
               {"post_decryption_probes", r.fuzz.post_decryption_probes},
               {"saturation", r.fuzz.saturation},
               {"last_new_coverage_exec", r.fuzz.last_new_coverage_exec},
               {"findings", findings_json(r.fuzz.findings)}};
  j["findings"] = findings_json(r.findings);
  return j.dump(indent);
}

CampaignReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CampaignReport r;
    r.version = j.at("version").get<int>();
    if (r.version != kReportVersion) {
      throw ReportError("unsupported report version " + std::to_string(r.version));
    }
    r.status = j.at("status").get<std::string>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    const json& c = j.at("config");
    r.config.target = c.at("target").get<std::string>();
    r.config.bugs = c.at("bugs").get<std::string>();
    r.config.bmc_depth = c.at("bmc").at("depth").get<std::size_t>();
    r.config.bmc_budget_seconds = c.at("bmc").at("budget_seconds").get<double>();
    r.config.fuzz_budget_seconds = c.at("fuzz").at("budget_seconds").get<double>();
    r.config.max_execs = c.at("fuzz").at("max_execs").get<std::uint64_t>();
    r.config.seed = c.at("fuzz").at("seed").get<std::uint64_t>();
    r.config.mode = c.at("fuzz").at("mode").get<std::string>();
    r.config.transport = c.at("transport").get<std::string>();
    r.config.seed_source = c.at("seed_source").get<std::string>();
    const json& t = j.at("timings");
    r.timings.bmc_seconds = t.at("bmc_seconds").get<double>();
    r.timings.fuzz_seconds = t.at("fuzz_seconds").get<double>();
    r.timings.total_seconds = t.at("total_seconds").get<double>();
    const json& b = j.at("bmc");
    r.bmc.ran = b.at("ran").get<bool>();
    r.bmc.paths = b.at("paths").get<std::size_t>();
    r.bmc.truncated = b.at("truncated").get<bool>();
    r.bmc.depth_bounded = b.at("depth_bounded").get<bool>();
    r.bmc.seeds = b.at("seeds").get<std::size_t>();
    r.bmc.findings = findings_from(b.at("findings"));
    const json& f = j.at("fuzz");
    r.fuzz.ran = f.at("ran").get<bool>();
    r.fuzz.execs = f.at("execs").get<std::uint64_t>();
    r.fuzz.execs_per_sec = f.at("execs_per_sec").get<double>();
    r.fuzz.corpus_size = f.at("corpus_size").get<std::size_t>();
    r.fuzz.coverage_buckets = f.at("coverage_buckets").get<std::size_t>();
    r.fuzz.coverage_edges = f.at("coverage_edges").get<std::size_t>();
    r.fuzz.post_decryption_probes = f.at("post_decryption_probes").get<std::size_t>();
    r.fuzz.saturation = f.at("saturation").get<double>();
    r.fuzz.last_new_coverage_exec = f.at("last_new_coverage_exec").get<std::uint64_t>();
    r.fuzz.findings = findings_from(f.at("findings"));
    r.findings = findings_from(j.at("findings"));
    return r;
  } catch (const json::exception& e) {
    throw ReportError(std::string("malformed report: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw ReportError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t w = ::write(fd, data.data() + done, data.size() - done);
    if (w < 0 && errno == EINTR) continue;
    if (w < 0) {
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw ReportError("cannot write " + tmp.string() + ": " + err);
    }
    done += static_cast<std::size_t>(w);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    throw ReportError("cannot flush " + tmp.string() + ": " + std::strerror(errno));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ReportError("cannot rename onto " + path.string() + ": " + ec.message());
}

void write_report(const CampaignReport& r, const std::filesystem::path& path) {
  write_file_atomic(path, report_to_json(r) + "\n");
}

CampaignReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

std::string summarize_report(const CampaignReport& r) {
  std::ostringstream os;
  os << "EBF campaign report (v" << r.version << ", status " << r.status << ")\n";
  if (!r.error.empty()) os << "  error: " << r.error << "\n";
  os << "  target " << r.config.target << "  bugs [" << r.config.bugs << "]  seed " << r.config.seed
     << "  mode " << r.config.mode << "  transport " << r.config.transport << "\n";
  if (r.bmc.ran) {
    os << "  BMC:  " << r.bmc.paths << " paths (depth " << r.config.bmc_depth << ")"
       << (r.bmc.truncated ? ", truncated" : "") << ", " << r.bmc.seeds << " seeds, "
       << r.bmc.findings.size() << " findings, " << r.timings.bmc_seconds << " s\n";
  }
  if (r.fuzz.ran) {
    os << "  Fuzz: " << r.fuzz.execs << " execs (" << static_cast<long long>(r.fuzz.execs_per_sec)
       << "/s), corpus " << r.fuzz.corpus_size << ", " << r.fuzz.coverage_buckets << " buckets, "
       << r.fuzz.findings.size() << " findings, " << r.timings.fuzz_seconds << " s\n";
  }
  os << "  Findings: " << r.findings.size() << "\n";
  for (const auto& f : r.findings) {
    os << "    [" << phase_name(f.phase) << "] " << f.kind << " at " << f.site << "  id " << f.id
       << (f.validated ? "" : "  (not reproduced)") << "\n";
    if (!f.reproducer_file.empty()) os << "      reproducer " << f.reproducer_file << "\n";
  }
  return os.str();
}

}  // namespace ebf::orchestrator
