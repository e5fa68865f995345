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
#ifndef EBF_CHANNEL_SECURE_CHANNEL_HPP_
#define EBF_CHANNEL_SECURE_CHANNEL_HPP_

// Minimal authenticated record layer between the reference client and
// broker. A pre-shared secret plus two hello nonces yield per-direction
// traffic keys; every record is sealed with ChaCha20-Poly1305 under a nonce
// built from the direction and the record sequence number.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ebf/common/bytes.hpp"
#include "ebf/common/result.hpp"

namespace ebf::channel {

inline constexpr std::size_t kSessionIdLen = 16;
inline constexpr std::size_t kHelloNonceLen = 16;
inline constexpr std::size_t kKeyLen = 32;
inline constexpr std::size_t kNonceLen = 12;
inline constexpr std::size_t kTagLen = 16;

using SessionId = std::array<std::uint8_t, kSessionIdLen>;
using HelloNonce = std::array<std::uint8_t, kHelloNonceLen>;
using Key = std::array<std::uint8_t, kKeyLen>;
using Nonce = std::array<std::uint8_t, kNonceLen>;

struct CipherSpec {
  std::string name;
  std::size_t key_len = 0;
  std::size_t nonce_len = 0;
  std::size_t tag_len = 0;
};

// The single registered cipher, "aead-v1".
const CipherSpec& aead_v1();
std::optional<CipherSpec> find_cipher(std::string_view name);

enum class Direction : std::uint8_t {
  kClientToServer = 1,
  kServerToClient = 2,
};

std::string_view direction_name(Direction d);

// Keys for one session plus this endpoint's sequence counters. Counters are
// indexed by direction; an endpoint seals in one direction and opens in the
// other, so each side owns its own copy.
struct SessionKeys {
  SessionId session_id{};
  Key client_key{};
  Key server_key{};
  std::array<std::uint64_t, 2> send_seq{};
  std::array<std::uint64_t, 2> recv_seq{};

  const Key& key_for(Direction d) const {
    return d == Direction::kClientToServer ? client_key : server_key;
  }
};

inline std::size_t dir_index(Direction d) {
  return d == Direction::kClientToServer ? 0 : 1;
}

struct Record {
  SessionId session_id{};
  // Raw direction byte; values other than 1 and 2 never authenticate.
  std::uint8_t direction = 0;
  std::uint64_t seq = 0;
  Nonce nonce{};
  // Ciphertext followed by the 16-byte tag.
  Bytes ciphertext;

  bool operator==(const Record&) const = default;
};

enum class ChannelError {
  kAuthFailure,
  kReplayOrGap,
  kMalformedRecord,
};

std::string_view channel_error_name(ChannelError e);

class HandshakeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SeqOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keys come from HKDF-SHA256 (salt = client_nonce || server_nonce, one info
// label per direction); session_id is the first 16 bytes of
// SHA-256(client_nonce || server_nonce). Throws HandshakeError on an empty
// secret.
SessionKeys establish_session(ByteView pre_shared_secret,
                              const HelloNonce& client_nonce,
                              const HelloNonce& server_nonce);

// direction byte || 0x00 0x00 0x00 || seq (big-endian u64)
Nonce record_nonce(Direction d, std::uint64_t seq);

// Associated data: session_id || direction || seq.
Bytes record_aad(const SessionId& id, std::uint8_t direction, std::uint64_t seq);

// Seals under keys.key_for(d) with the next send sequence number for d and
// advances it. Throws SeqOverflow once the counter reaches 2^64 - 1.
Record seal(SessionKeys& keys, Direction d, ByteView plaintext);

// Verifies the tag, then the sequence number against recv_seq for the
// record's direction; advances recv_seq on success. Any modified byte of
// session id, direction, seq, nonce or ciphertext gives kAuthFailure; an
// authentic record with the wrong sequence number gives kReplayOrGap.
Result<Bytes, ChannelError> open(SessionKeys& keys, const Record& record);

// Stateless forms used by the key-log driven interposer.
Record seal_at(const Key& key, const SessionId& id, Direction d,
               std::uint64_t seq, ByteView plaintext);
Result<Bytes, ChannelError> open_at(const Key& key, const SessionId& id,
                                    const Record& record);

// Wire form: session_id(16) direction(1) seq(8, BE) nonce(12) ciphertext.
Bytes encode_record(const Record& r);
std::optional<Record> decode_record(ByteView wire);

}  // namespace ebf::channel

#endif  // EBF_CHANNEL_SECURE_CHANNEL_HPP_
