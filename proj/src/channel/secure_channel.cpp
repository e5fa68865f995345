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
#include "ebf/channel/secure_channel.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <algorithm>
#include <cstring>
#include <memory>

#include "ebf/common/digest.hpp"

namespace ebf::channel {
namespace {

constexpr char kClientKeyInfo[] = "ebf v1 client write key";
constexpr char kServerKeyInfo[] = "ebf v1 server write key";
constexpr std::size_t kRecordHeaderLen = kSessionIdLen + 1 + 8 + kNonceLen;

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};

// One reusable context per thread; re-initialised with key and nonce for
// every record.
EVP_CIPHER_CTX* cipher_ctx() {
  thread_local std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(
      EVP_CIPHER_CTX_new());
  return ctx.get();
}

struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};

Key hkdf_sha256(ByteView secret, ByteView salt, std::string_view info) {
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> pctx(
      EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  Key out{};
  std::size_t out_len = out.size();
  if (!pctx || EVP_PKEY_derive_init(pctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(pctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(pctx.get(), salt.data(),
                                  static_cast<int>(salt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(pctx.get(), secret.data(),
                                 static_cast<int>(secret.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(
          pctx.get(), reinterpret_cast<const unsigned char*>(info.data()),
          static_cast<int>(info.size())) <= 0 ||
      EVP_PKEY_derive(pctx.get(), out.data(), &out_len) <= 0 ||
      out_len != out.size()) {
    throw HandshakeError("HKDF-SHA256 derivation failed");
  }
  return out;
}

bool valid_direction(std::uint8_t d) {
  return d == static_cast<std::uint8_t>(Direction::kClientToServer) ||
         d == static_cast<std::uint8_t>(Direction::kServerToClient);
}

}  // namespace

const CipherSpec& aead_v1() {
  static const CipherSpec spec{"aead-v1", kKeyLen, kNonceLen, kTagLen};
  return spec;
}

std::optional<CipherSpec> find_cipher(std::string_view name) {
  if (name == aead_v1().name) return aead_v1();
  return std::nullopt;
}

std::string_view direction_name(Direction d) {
  return d == Direction::kClientToServer ? "client->server" : "server->client";
}

std::string_view channel_error_name(ChannelError e) {
  switch (e) {
    case ChannelError::kAuthFailure: return "AuthFailure";
    case ChannelError::kReplayOrGap: return "ReplayOrGap";
    case ChannelError::kMalformedRecord: return "MalformedRecord";
  }
  return "?";
}

SessionKeys establish_session(ByteView pre_shared_secret,
                              const HelloNonce& client_nonce,
                              const HelloNonce& server_nonce) {
  if (pre_shared_secret.empty()) {
    throw HandshakeError("pre-shared secret must not be empty");
  }
  Bytes hello(client_nonce.begin(), client_nonce.end());
  hello.insert(hello.end(), server_nonce.begin(), server_nonce.end());

  SessionKeys keys;
  const Sha256 digest = sha256(hello);
  std::copy_n(digest.begin(), kSessionIdLen, keys.session_id.begin());
  keys.client_key = hkdf_sha256(pre_shared_secret, hello, kClientKeyInfo);
  keys.server_key = hkdf_sha256(pre_shared_secret, hello, kServerKeyInfo);
  return keys;
}

Nonce record_nonce(Direction d, std::uint64_t seq) {
  Nonce n{};
  n[0] = static_cast<std::uint8_t>(d);
  for (int i = 0; i < 8; ++i) {
    n[4 + i] = static_cast<std::uint8_t>(seq >> (56 - 8 * i));
  }
  return n;
}

Bytes record_aad(const SessionId& id, std::uint8_t direction, std::uint64_t seq) {
  Bytes aad(id.begin(), id.end());
  aad.push_back(direction);
  put_u64(aad, seq);
  return aad;
}

Record seal_at(const Key& key, const SessionId& id, Direction d,
               std::uint64_t seq, ByteView plaintext) {
  Record r;
  r.session_id = id;
  r.direction = static_cast<std::uint8_t>(d);
  r.seq = seq;
  r.nonce = record_nonce(d, seq);
  const Bytes aad = record_aad(id, r.direction, seq);
  r.ciphertext.resize(plaintext.size() + kTagLen);

  EVP_CIPHER_CTX* ctx = cipher_ctx();
  int len = 0;
  int total = 0;
  bool ok = EVP_EncryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr,
                               key.data(), r.nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(),
                              static_cast<int>(aad.size())) == 1 &&
            EVP_EncryptUpdate(ctx, r.ciphertext.data(), &len, plaintext.data(),
                              static_cast<int>(plaintext.size())) == 1;
  total = len;
  ok = ok && EVP_EncryptFinal_ex(ctx, r.ciphertext.data() + total, &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_GET_TAG, kTagLen,
                           r.ciphertext.data() + plaintext.size()) == 1;
  if (!ok) throw std::runtime_error("AEAD seal failed");
  return r;
}

Result<Bytes, ChannelError> open_at(const Key& key, const SessionId& id,
                                    const Record& record) {
  if (record.session_id != id || !valid_direction(record.direction) ||
      record.ciphertext.size() < kTagLen) {
    return ChannelError::kAuthFailure;
  }
  const Bytes aad = record_aad(record.session_id, record.direction, record.seq);
  const std::size_t pt_len = record.ciphertext.size() - kTagLen;
  Bytes plaintext(pt_len);
  Bytes tag(record.ciphertext.end() - kTagLen, record.ciphertext.end());

  EVP_CIPHER_CTX* ctx = cipher_ctx();
  int len = 0;
  const bool ok =
      EVP_DecryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr, key.data(),
                         record.nonce.data()) == 1 &&
      EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) == 1 &&
      EVP_DecryptUpdate(ctx, plaintext.data(), &len, record.ciphertext.data(),
                        static_cast<int>(pt_len)) == 1 &&
      EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_SET_TAG, kTagLen, tag.data()) == 1 &&
      EVP_DecryptFinal_ex(ctx, plaintext.data() + len, &len) == 1;
  if (!ok) return ChannelError::kAuthFailure;
  // The nonce is an input to the tag check, so an authentic record always
  // carries the canonical nonce for its direction and sequence number.
  if (record.nonce != record_nonce(static_cast<Direction>(record.direction), record.seq)) {
    return ChannelError::kAuthFailure;
  }
  return plaintext;
}

Record seal(SessionKeys& keys, Direction d, ByteView plaintext) {
  std::uint64_t& seq = keys.send_seq[dir_index(d)];
  if (seq == UINT64_MAX) throw SeqOverflow("send sequence number exhausted");
  Record r = seal_at(keys.key_for(d), keys.session_id, d, seq, plaintext);
  ++seq;
  return r;
}

Result<Bytes, ChannelError> open(SessionKeys& keys, const Record& record) {
  if (!valid_direction(record.direction)) return ChannelError::kAuthFailure;
  const auto d = static_cast<Direction>(record.direction);
  auto pt = open_at(keys.key_for(d), keys.session_id, record);
  if (!pt.ok()) return pt;
  std::uint64_t& expected = keys.recv_seq[dir_index(d)];
  if (record.seq != expected) return ChannelError::kReplayOrGap;
  ++expected;
  return pt;
}

Bytes encode_record(const Record& r) {
  Bytes out;
  out.reserve(kRecordHeaderLen + r.ciphertext.size());
  out.insert(out.end(), r.session_id.begin(), r.session_id.end());
  out.push_back(r.direction);
  put_u64(out, r.seq);
  out.insert(out.end(), r.nonce.begin(), r.nonce.end());
  out.insert(out.end(), r.ciphertext.begin(), r.ciphertext.end());
  return out;
}

std::optional<Record> decode_record(ByteView wire) {
  if (wire.size() < kRecordHeaderLen + kTagLen) return std::nullopt;
  Record r;
  std::copy_n(wire.begin(), kSessionIdLen, r.session_id.begin());
  r.direction = wire[kSessionIdLen];
  r.seq = get_u64(wire.subspan(kSessionIdLen + 1, 8));
  std::copy_n(wire.begin() + kSessionIdLen + 9, kNonceLen, r.nonce.begin());
  r.ciphertext.assign(wire.begin() + kRecordHeaderLen, wire.end());
  return r;
}

}  // namespace ebf::channel
