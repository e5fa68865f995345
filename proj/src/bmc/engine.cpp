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
#include "ebf/bmc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ebf/common/digest.hpp"
#include "json.hpp"

namespace ebf::bmc {
namespace {

using Clock = std::chrono::steady_clock;

// Unwinds a symbolic run at a fork or at the depth bound.
struct StopRun {};

class SymbolicRun final : public ExecContext {
 public:
  enum class End { kComplete, kFork, kCut, kTrap };

  SymbolicRun(const SymbolicPacket& packet, const std::vector<Decision>& forced,
              std::size_t depth)
      : packet_(packet), forced_(forced), depth_(depth) {
    domains_.reserve(packet.bytes.size());
    for (const auto& b : packet.bytes) {
      domains_.push_back(b.symbolic ? b.domain : ByteSet::of(b.value));
    }
    if (!packet.length_var) length_ = packet.bytes.size();
  }

  std::size_t frame_length() override {
    if (length_) return *length_;
    std::vector<std::size_t> feasible;
    for (std::size_t n = packet_.length_var->min_len; n <= packet_.bytes.size(); ++n) {
      feasible.push_back(n);
    }
    const std::size_t n = decide(0, Decision::kLengthPos, feasible);
    length_ = n;
    constraints_.push_back(Constraint::len_eq(packet_.length_var->name, n));
    return n;
  }

  std::size_t branch(SiteId site, std::size_t pos, const Partition& p) override {
    check_pos(pos);
    const SymbolicByte& b = packet_.bytes[pos];
    if (!b.symbolic) return p.arm_of(b.value);
    const std::vector<ByteSet> sets = p.arm_sets();
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (!(sets[i] & domains_[pos]).empty()) feasible.push_back(i);
    }
    const std::size_t arm = decide(site, pos, feasible);
    domains_[pos] &= sets[arm];
    if (domains_[pos].empty()) throw std::logic_error("forced arm is infeasible");
    constraints_.push_back(Constraint::from_set(b.var, sets[arm]));
    return arm;
  }

  std::uint8_t value(std::size_t pos) override {
    check_pos(pos);
    return *domains_[pos].min();
  }

  void probe(SiteId, std::size_t) override {}

  void set_trap(const Trap& t) { trap_ = t; }

  PathCondition path(End end) const {
    PathCondition pc;
    pc.conjunction = constraints_;
    pc.decisions = decisions_;
    pc.path_id = make_path_id(decisions_);
    pc.depth = decisions_.size();
    pc.cut_at_bound = end == End::kCut;
    pc.trap = trap_;
    return pc;
  }

  End stop_kind() const { return stop_kind_; }
  const std::vector<Decision>& fork_children() const { return children_; }

 private:
  void check_pos(std::size_t pos) const {
    if (!length_) throw std::logic_error("model read a byte before the frame length");
    if (pos >= *length_) throw std::logic_error("model read past the frame end");
  }

  std::size_t decide(SiteId site, std::size_t pos, const std::vector<std::size_t>& feasible) {
    const std::size_t idx = decisions_.size();
    if (idx < forced_.size()) {
      const Decision& d = forced_[idx];
      if (d.site != site || d.pos != pos) {
        throw std::logic_error("program is not deterministic under replay");
      }
      decisions_.push_back(d);
      return d.arm;
    }
    if (idx == depth_) {
      stop_kind_ = End::kCut;
      throw StopRun{};
    }
    for (auto arm : feasible) children_.push_back(Decision{site, pos, arm});
    stop_kind_ = End::kFork;
    throw StopRun{};
  }

  const SymbolicPacket& packet_;
  const std::vector<Decision>& forced_;
  std::size_t depth_;
  std::vector<ByteSet> domains_;
  std::optional<std::size_t> length_;
  std::vector<Decision> decisions_;
  std::vector<Constraint> constraints_;
  std::vector<Decision> children_;
  std::optional<Trap> trap_;
  End stop_kind_ = End::kComplete;
};

// Concrete replay that records decisions on the packet's symbolic positions
// and a step per branch for counterexample traces.
class TracingRun final : public ExecContext {
 public:
  TracingRun(ByteView frame, const SymbolicPacket& packet, const SiteNamer& namer)
      : frame_(frame), packet_(packet), namer_(namer) {}

  std::size_t frame_length() override {
    if (packet_.length_var && !length_recorded_) {
      decisions_.push_back(Decision{0, Decision::kLengthPos, frame_.size()});
      length_recorded_ = true;
    }
    return frame_.size();
  }

  std::size_t branch(SiteId site, std::size_t pos, const Partition& p) override {
    const std::size_t arm = p.arm_of(frame_[pos]);
    if (packet_.bytes[pos].symbolic) decisions_.push_back(Decision{site, pos, arm});
    add_step(name(site) + "[" + std::to_string(arm) + "] @" + std::to_string(pos));
    return arm;
  }

  std::uint8_t value(std::size_t pos) override { return frame_[pos]; }

  void probe(SiteId site, std::size_t arm) override {
    add_step(name(site) + "[" + std::to_string(arm) + "]");
  }

  [[noreturn]] void trap(TrapKind kind, SiteId site) override {
    add_step(name(site));
    throw Trap{kind, site};
  }

  bool tracing() const override { return true; }
  void step(std::string_view label, std::string state) override {
    state_ = std::move(state);
    steps_.push_back(TraceStep{std::string(label), state_});
  }

  const std::vector<Decision>& decisions() const { return decisions_; }
  std::vector<TraceStep>& steps() { return steps_; }

 private:
  std::string name(SiteId site) const {
    return namer_ ? namer_(site) : "site" + std::to_string(site);
  }
  void add_step(std::string label) { steps_.push_back(TraceStep{std::move(label), state_}); }

  ByteView frame_;
  const SymbolicPacket& packet_;
  const SiteNamer& namer_;
  bool length_recorded_ = false;
  std::vector<Decision> decisions_;
  std::vector<TraceStep> steps_;
  std::string state_;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

Bytes read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SeedError("cannot read seed " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

ExploreResult explore_paths(const Program& program, const SymbolicPacket& init,
                            const ExploreConfig& config) {
  init.validate();
  ExploreResult result;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(config.budget_seconds));
  std::deque<std::vector<Decision>> queue;
  queue.emplace_back();
  while (!queue.empty()) {
    if (config.budget_seconds <= 0 || Clock::now() >= deadline ||
        result.paths.size() >= config.max_paths) {
      result.truncated = true;
      break;
    }
    std::vector<Decision> prefix = std::move(queue.front());
    queue.pop_front();

    SymbolicRun run(init, prefix, config.depth);
    auto end = SymbolicRun::End::kComplete;
    try {
      program(run);
    } catch (const StopRun&) {
      end = run.stop_kind();
    } catch (const Trap& t) {
      run.set_trap(t);
      end = SymbolicRun::End::kTrap;
    }
    ++result.runs;

    if (end == SymbolicRun::End::kFork) {
      for (const auto& child : run.fork_children()) {
        std::vector<Decision> next = prefix;
        next.push_back(child);
        queue.push_back(std::move(next));
      }
      continue;
    }
    if (end == SymbolicRun::End::kCut) result.depth_bounded = true;
    result.paths.push_back(run.path(end));
  }
  return result;
}

std::optional<Bytes> solve_condition(const PathCondition& pc, const SymbolicPacket& packet) {
  std::size_t lo = packet.min_length();
  std::size_t hi = packet.max_length();
  std::vector<ByteSet> domains;
  for (const auto& b : packet.bytes) {
    domains.push_back(b.symbolic ? b.domain : ByteSet::of(b.value));
  }
  for (const auto& c : pc.conjunction) {
    if (c.is_length()) {
      if (c.kind == Constraint::Kind::kLenEq) {
        lo = std::max(lo, c.n);
        hi = std::min(hi, c.n);
      } else if (c.kind == Constraint::Kind::kLenLe) {
        hi = std::min(hi, c.n);
      } else {
        lo = std::max(lo, c.n);
      }
      continue;
    }
    const auto pos = packet.position_of(c.var);
    if (!pos) throw std::invalid_argument("constraint on unknown variable " + c.var);
    domains[*pos] &= c.allowed();
  }
  if (lo > hi) return std::nullopt;
  for (const auto& d : domains) {
    if (d.empty()) return std::nullopt;
  }
  Bytes witness(lo);
  for (std::size_t i = 0; i < lo; ++i) witness[i] = *domains[i].min();
  return witness;
}

SafetyReport check_safety(const Program& program, const PathCondition& pc,
                          const SymbolicPacket& packet,
                          const std::set<TrapKind>& properties, const SiteNamer& namer) {
  SafetyReport report;
  const auto witness = solve_condition(pc, packet);
  if (!witness) throw std::invalid_argument("check_safety needs a satisfiable path");

  TracingRun run(*witness, packet, namer);
  std::optional<Trap> trap;
  try {
    program(run);
  } catch (const Trap& t) {
    trap = t;
  }

  const auto& got = run.decisions();
  const bool follows =
      pc.cut_at_bound
          ? got.size() >= pc.decisions.size() &&
                std::equal(pc.decisions.begin(), pc.decisions.end(), got.begin())
          : got == pc.decisions;
  if (!follows) {
    throw std::logic_error("witness for path " + pc.path_id + " left its path");
  }

  if (trap && properties.count(trap->kind) != 0) {
    report.findings.push_back(
        SafetyFinding{trap->kind, trap->site, std::move(run.steps()), *witness, pc});
  }
  if (pc.trap && properties.count(pc.trap->kind) != 0 &&
      (!trap || trap->kind != pc.trap->kind)) {
    report.non_reproducible.push_back(NonReproducible{pc.trap->kind, pc, *witness});
  }
  return report;
}

void write_manifest(const std::filesystem::path& out_dir, const SeedCorpus& corpus) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : corpus.entries) {
    arr.push_back({{"file", e.file},
                   {"path_id", e.path_id},
                   {"depth", e.depth},
                   {"provenance", std::string(provenance_name(e.provenance))}});
  }
  const auto tmp = out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SeedError("cannot write manifest in " + out_dir.string());
    out << arr.dump(2) << "\n";
    if (!out) throw SeedError("short write to manifest in " + out_dir.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, out_dir / "manifest.json", ec);
  if (ec) throw SeedError("cannot install manifest: " + ec.message());
}

SeedCorpus load_corpus(const std::filesystem::path& dir) {
  SeedCorpus corpus;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw SeedError("corpus directory " + dir.string() + " does not exist");
  }
  std::set<std::string> listed;
  const auto manifest = dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    nlohmann::json arr;
    try {
      std::ifstream in(manifest);
      arr = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw SeedError("bad manifest " + manifest.string() + ": " + e.what());
    }
    if (!arr.is_array()) throw SeedError("manifest is not a JSON array");
    for (const auto& j : arr) {
      try {
        SeedEntry e;
        e.file = j.at("file").get<std::string>();
        e.path_id = j.at("path_id").get<std::string>();
        e.depth = j.at("depth").get<std::size_t>();
        const auto prov = provenance_from_name(j.at("provenance").get<std::string>());
        if (!prov) throw SeedError("unknown provenance in manifest");
        e.provenance = *prov;
        e.bytes = read_file(dir / e.file);
        listed.insert(e.file);
        corpus.entries.push_back(std::move(e));
      } catch (const nlohmann::json::exception& ex) {
        throw SeedError(std::string("bad manifest entry: ") + ex.what());
      }
    }
  }
  // Loose .bin files are accepted too, in name order.
  std::vector<std::filesystem::path> extra;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".bin" &&
        listed.count(de.path().filename().string()) == 0) {
      extra.push_back(de.path());
    }
  }
  std::sort(extra.begin(), extra.end());
  for (const auto& p : extra) {
    SeedEntry e;
    e.file = p.filename().string();
    e.path_id = p.stem().string();
    e.provenance = Provenance::kMutated;
    e.bytes = read_file(p);
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

SeedCorpus emit_seeds(const std::vector<PathCondition>& paths,
                      const SymbolicPacket& packet,
                      const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw SeedError("cannot create " + out_dir.string() + ": " + ec.message());

  SeedCorpus corpus;
  if (std::filesystem::exists(out_dir / "manifest.json")) {
    for (auto& e : load_corpus(out_dir).entries) {
      if (e.provenance == Provenance::kBmc) corpus.entries.push_back(std::move(e));
    }
  }
  std::set<Bytes> seen;
  for (const auto& e : corpus.entries) seen.insert(e.bytes);

  for (const auto& pc : paths) {
    auto witness = solve_condition(pc, packet);
    if (!witness) throw SeedError("path " + pc.path_id + " is unsatisfiable");
    if (!seen.insert(*witness).second) continue;
    std::string stem = sanitize(packet.name.empty() ? pc.path_id : packet.name + "." + pc.path_id);
    if (stem.size() > 180) stem = stem.substr(0, 160) + "~" + short_digest(to_bytes(stem));
    SeedEntry e;
    e.file = "bmc-" + stem + ".bin";
    e.path_id = packet.name.empty() ? pc.path_id : packet.name + "." + pc.path_id;
    e.depth = pc.depth;
    e.provenance = Provenance::kBmc;
    e.bytes = std::move(*witness);
    std::ofstream out(out_dir / e.file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(e.bytes.data()),
              static_cast<std::streamsize>(e.bytes.size()));
    if (!out) throw SeedError("cannot write seed " + (out_dir / e.file).string());
    corpus.entries.push_back(std::move(e));
  }
  write_manifest(out_dir, corpus);
  return corpus;
}

}  // namespace ebf::bmc
