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
#ifndef EBF_MQTT_CODEC_HPP_
#define EBF_MQTT_CODEC_HPP_

// Encoder/decoder for the MQTT 3.1.1 subset spoken by the reference client
// and broker: CONNECT (no will/auth), CONNACK, PUBLISH (QoS 0/1), PUBACK,
// SUBSCRIBE, SUBACK, PINGREQ, PINGRESP and DISCONNECT.
//
// Decoding never throws: every byte string maps to a Packet or a DecodeError
// naming the failing field. Encoding throws EncodeError on packets that break
// the invariants below.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ebf/common/bytes.hpp"
#include "ebf/common/result.hpp"

namespace ebf::mqtt {

// A complete wire frame: fixed header, remaining-length varint, body.
using RawFrame = Bytes;

inline constexpr std::uint32_t kMaxRemainingLength = 268'435'455;

enum class PacketType : std::uint8_t {
  kConnect = 1,
  kConnack = 2,
  kPublish = 3,
  kPuback = 4,
  kSubscribe = 8,
  kSuback = 9,
  kPingreq = 12,
  kPingresp = 13,
  kDisconnect = 14,
};

// Maps the fixed-header high nibble to a supported type.
std::optional<PacketType> packet_type_from_code(std::uint8_t code);
std::string_view packet_type_name(PacketType t);

struct Connect {
  std::string protocol_name = "MQTT";
  std::uint16_t keep_alive = 60;
  std::string client_id;
  bool operator==(const Connect&) const = default;
};

struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
  bool operator==(const Connack&) const = default;
};

struct Publish {
  std::string topic;
  Bytes payload;
  std::uint8_t qos = 0;
  // Present iff qos == 1, and then non-zero.
  std::optional<std::uint16_t> packet_id;
  bool dup = false;
  bool retain = false;
  bool operator==(const Publish&) const = default;
};

struct Puback {
  std::uint16_t packet_id = 1;
  bool operator==(const Puback&) const = default;
};

struct TopicFilter {
  std::string filter;
  std::uint8_t qos = 0;
  bool operator==(const TopicFilter&) const = default;
};

struct Subscribe {
  std::uint16_t packet_id = 1;
  std::vector<TopicFilter> filters;
  bool operator==(const Subscribe&) const = default;
};

struct Suback {
  std::uint16_t packet_id = 1;
  std::vector<std::uint8_t> return_codes;
  bool operator==(const Suback&) const = default;
};

struct Pingreq {
  bool operator==(const Pingreq&) const = default;
};
struct Pingresp {
  bool operator==(const Pingresp&) const = default;
};
struct Disconnect {
  bool operator==(const Disconnect&) const = default;
};

using Packet = std::variant<Connect, Connack, Publish, Puback, Subscribe,
                            Suback, Pingreq, Pingresp, Disconnect>;

PacketType type_of(const Packet& p);

enum class DecodeErrorKind {
  kUnsupportedType,
  kMalformedVarint,
  kIncomplete,
  kBadUtf8,
  kLengthMismatch,
  kInvalidField,
};

std::string_view decode_error_name(DecodeErrorKind kind);

struct DecodeError {
  DecodeErrorKind kind;
  std::string field;
  bool operator==(const DecodeError&) const = default;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base-128 varint, least significant group first, minimal length.
// Throws RangeError when n > kMaxRemainingLength.
Bytes encode_remaining_length(std::uint32_t n);

struct VarintValue {
  std::uint32_t value = 0;
  std::size_t consumed = 0;
  bool operator==(const VarintValue&) const = default;
};

// Rejects a continuation bit on the 4th byte and non-minimal encodings
// (MalformedVarint), and input ending before the last byte (Incomplete).
Result<VarintValue, DecodeError> decode_remaining_length(ByteView bytes);

Result<Packet, DecodeError> decode_packet(ByteView frame);

RawFrame encode_packet(const Packet& p);

// MQTT string payload rule: well-formed UTF-8 without U+0000.
bool valid_mqtt_utf8(ByteView s);

// Outcome of decode_packet for grouping inputs: the type nibble of the first
// byte ("-" for an empty frame) and either "ok" or the error kind and field,
// e.g. "3:LengthMismatch(topic)".
std::string decode_outcome_class(ByteView frame);

std::string describe(const Packet& p);

}  // namespace ebf::mqtt

#endif  // EBF_MQTT_CODEC_HPP_
