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
#ifndef EBF_CHANNEL_KEYLOG_HPP_
#define EBF_CHANNEL_KEYLOG_HPP_

// Key-log side channel from the server to the fuzzer. Text, one record per
// line, lowercase hex, single spaces:
//
//   EBF-KEYLOG v1
//   CIPHER aead-v1
//   SESSION <32 hex> CLIENT <64 hex> SERVER <64 hex>

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebf/channel/secure_channel.hpp"

namespace ebf::channel {

inline constexpr char kKeyLogMagic[] = "EBF-KEYLOG v1";

struct KeyLogEntry {
  SessionId session_id{};
  Key client_key{};
  Key server_key{};
  std::string cipher_name;

  bool operator==(const KeyLogEntry&) const = default;
};

struct KeyLog {
  std::vector<KeyLogEntry> entries;

  const KeyLogEntry* find(const SessionId& id) const;
  bool operator==(const KeyLog&) const = default;
};

class KeyLogError : public std::runtime_error {
 public:
  enum class Kind { kIo, kDuplicateSession, kCipherMismatch, kMalformedLine, kUnknownCipher };

  KeyLogError(Kind kind, std::size_t line_no, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_no_(line_no) {}

  Kind kind() const { return kind_; }
  // 1-based; 0 when the error is not tied to a line.
  std::size_t line_no() const { return line_no_; }

 private:
  Kind kind_;
  std::size_t line_no_;
};

// Appends one SESSION line, writing the magic and CIPHER lines first when the
// file is new or empty. The bytes for one call go out in a single write and
// are flushed before returning.
void write_keylog_entry(const std::filesystem::path& path,
                        const SessionKeys& keys, const CipherSpec& spec);

KeyLog parse_keylog(const std::filesystem::path& path);
KeyLog parse_keylog_text(const std::string& text);

}  // namespace ebf::channel

#endif  // EBF_CHANNEL_KEYLOG_HPP_
