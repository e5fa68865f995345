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
#include "ebf/channel/keylog.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ebf::channel {
namespace {

bool is_lower_hex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

template <std::size_t N>
bool parse_hex_field(std::string_view s, std::array<std::uint8_t, N>* out) {
  if (s.size() != 2 * N || !is_lower_hex(s)) return false;
  auto bytes = from_hex(s);
  if (!bytes) return false;
  std::copy(bytes->begin(), bytes->end(), out->begin());
  return true;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t end = std::min(line.find(' ', start), line.size());
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw KeyLogError(KeyLogError::Kind::kMalformedLine, line_no,
                    "key log line " + std::to_string(line_no) + ": " + why);
}

std::string session_line(const SessionKeys& keys) {
  return "SESSION " + to_hex(keys.session_id) + " CLIENT " +
         to_hex(keys.client_key) + " SERVER " + to_hex(keys.server_key) + "\n";
}

// Returns the CIPHER name declared in a parsed log, if any.
std::string declared_cipher(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("CIPHER ", 0) == 0) return line.substr(7);
  }
  return "";
}

}  // namespace

const KeyLogEntry* KeyLog::find(const SessionId& id) const {
  for (const auto& e : entries) {
    if (e.session_id == id) return &e;
  }
  return nullptr;
}

KeyLog parse_keylog_text(const std::string& text) {
  KeyLog log;
  std::string cipher;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool saw_magic = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;

    if (line_no == 1) {
      if (line != kKeyLogMagic) malformed(line_no, "missing EBF-KEYLOG v1 header");
      saw_magic = true;
      continue;
    }
    const auto fields = split_spaces(line);
    if (fields.size() == 2 && fields[0] == "CIPHER") {
      if (!cipher.empty()) malformed(line_no, "CIPHER declared twice");
      if (!log.entries.empty()) malformed(line_no, "CIPHER after SESSION");
      if (!find_cipher(fields[1])) {
        throw KeyLogError(KeyLogError::Kind::kUnknownCipher, line_no,
                          "key log line " + std::to_string(line_no) +
                              ": unknown cipher '" + std::string(fields[1]) + "'");
      }
      cipher = std::string(fields[1]);
      continue;
    }
    if (fields.size() != 6 || fields[0] != "SESSION" || fields[2] != "CLIENT" ||
        fields[4] != "SERVER") {
      malformed(line_no, "expected SESSION <id> CLIENT <key> SERVER <key>");
    }
    if (cipher.empty()) malformed(line_no, "SESSION before CIPHER");
    KeyLogEntry e;
    e.cipher_name = cipher;
    if (!parse_hex_field(fields[1], &e.session_id)) malformed(line_no, "bad session id hex");
    if (!parse_hex_field(fields[3], &e.client_key)) malformed(line_no, "bad client key hex");
    if (!parse_hex_field(fields[5], &e.server_key)) malformed(line_no, "bad server key hex");
    if (log.find(e.session_id) != nullptr) {
      throw KeyLogError(KeyLogError::Kind::kDuplicateSession, line_no,
                        "key log line " + std::to_string(line_no) +
                            ": duplicate session " + to_hex(e.session_id));
    }
    log.entries.push_back(e);
  }
  if (!saw_magic) malformed(1, "missing EBF-KEYLOG v1 header");
  return log;
}

KeyLog parse_keylog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw KeyLogError(KeyLogError::Kind::kIo, 0,
                      "cannot read key log " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_keylog_text(ss.str());
}

void write_keylog_entry(const std::filesystem::path& path,
                        const SessionKeys& keys, const CipherSpec& spec) {
  std::string existing;
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      existing = ss.str();
    }
  }
  std::string chunk;
  if (existing.empty()) {
    chunk = std::string(kKeyLogMagic) + "\nCIPHER " + spec.name + "\n";
  } else {
    const KeyLog log = parse_keylog_text(existing);
    if (log.find(keys.session_id) != nullptr) {
      throw KeyLogError(KeyLogError::Kind::kDuplicateSession, 0,
                        "session " + to_hex(keys.session_id) + " already logged");
    }
    const std::string cipher = declared_cipher(existing);
    if (cipher.empty()) {
      chunk = "CIPHER " + spec.name + "\n";
    } else if (cipher != spec.name) {
      throw KeyLogError(KeyLogError::Kind::kCipherMismatch, 0,
                        "key log declares cipher " + cipher + ", not " + spec.name);
    }
    if (existing.back() != '\n') chunk.insert(chunk.begin(), '\n');
  }
  chunk += session_line(keys);

  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0600);
  if (fd < 0) {
    throw KeyLogError(KeyLogError::Kind::kIo, 0,
                      "cannot open key log " + path.string() + ": " + std::strerror(errno));
  }
  const ssize_t n = ::write(fd, chunk.data(), chunk.size());
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (n != static_cast<ssize_t>(chunk.size()) || !synced) {
    throw KeyLogError(KeyLogError::Kind::kIo, 0, "short write to key log " + path.string());
  }
}

}  // namespace ebf::channel
