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
#include "ebf/mqtt/codec.hpp"

#include <sstream>
#include <utility>

namespace ebf::mqtt {
namespace {

DecodeError err(DecodeErrorKind kind, std::string field) {
  return DecodeError{kind, std::move(field)};
}

// Sequential reader over a packet body. Reads past the end of the declared
// body are LengthMismatch: the remaining-length field disagrees with the
// field layout.
class BodyReader {
 public:
  explicit BodyReader(ByteView body) : body_(body) {}

  std::size_t remaining() const { return body_.size() - pos_; }

  std::optional<DecodeError> u8(std::string_view field, std::uint8_t* out) {
    if (remaining() < 1) {
      return err(DecodeErrorKind::kLengthMismatch, std::string(field));
    }
    *out = body_[pos_++];
    return std::nullopt;
  }

  std::optional<DecodeError> u16(std::string_view field, std::uint16_t* out) {
    if (remaining() < 2) {
      return err(DecodeErrorKind::kLengthMismatch, std::string(field));
    }
    *out = static_cast<std::uint16_t>(body_[pos_] << 8 | body_[pos_ + 1]);
    pos_ += 2;
    return std::nullopt;
  }

  std::optional<DecodeError> str(std::string_view field, std::string* out) {
    std::uint16_t len = 0;
    if (auto e = u16(field, &len)) return e;
    if (remaining() < len) {
      return err(DecodeErrorKind::kLengthMismatch, std::string(field));
    }
    const ByteView s = body_.subspan(pos_, len);
    if (!valid_mqtt_utf8(s)) {
      return err(DecodeErrorKind::kBadUtf8, std::string(field));
    }
    out->assign(s.begin(), s.end());
    pos_ += len;
    return std::nullopt;
  }

  Bytes rest() {
    Bytes out(body_.begin() + static_cast<std::ptrdiff_t>(pos_), body_.end());
    pos_ = body_.size();
    return out;
  }

 private:
  ByteView body_;
  std::size_t pos_ = 0;
};

#define EBF_TRY(expr) \
  if (auto e_ = (expr)) return std::move(*e_)

Result<Packet, DecodeError> decode_body(PacketType type, std::uint8_t flags,
                                        ByteView body) {
  BodyReader r(body);
  switch (type) {
    case PacketType::kConnect: {
      Connect c;
      std::uint8_t level = 0;
      std::uint8_t cflags = 0;
      EBF_TRY(r.str("protocol_name", &c.protocol_name));
      EBF_TRY(r.u8("protocol_level", &level));
      if (level != 4) return err(DecodeErrorKind::kInvalidField, "protocol_level");
      EBF_TRY(r.u8("connect_flags", &cflags));
      if (cflags != 0x02) {
        return err(DecodeErrorKind::kInvalidField, "connect_flags");
      }
      EBF_TRY(r.u16("keep_alive", &c.keep_alive));
      EBF_TRY(r.str("client_id", &c.client_id));
      if (r.remaining() != 0) return err(DecodeErrorKind::kLengthMismatch, "connect");
      return Packet(std::move(c));
    }
    case PacketType::kConnack: {
      Connack c;
      std::uint8_t ack = 0;
      EBF_TRY(r.u8("ack_flags", &ack));
      if (ack > 1) return err(DecodeErrorKind::kInvalidField, "ack_flags");
      c.session_present = ack == 1;
      EBF_TRY(r.u8("return_code", &c.return_code));
      if (c.return_code > 5) return err(DecodeErrorKind::kInvalidField, "return_code");
      if (r.remaining() != 0) return err(DecodeErrorKind::kLengthMismatch, "connack");
      return Packet(c);
    }
    case PacketType::kPublish: {
      Publish p;
      p.qos = (flags >> 1) & 0x3;
      p.dup = (flags & 0x8) != 0;
      p.retain = (flags & 0x1) != 0;
      EBF_TRY(r.str("topic", &p.topic));
      if (p.qos == 1) {
        std::uint16_t id = 0;
        EBF_TRY(r.u16("packet_id", &id));
        if (id == 0) return err(DecodeErrorKind::kInvalidField, "packet_id");
        p.packet_id = id;
      }
      p.payload = r.rest();
      return Packet(std::move(p));
    }
    case PacketType::kPuback: {
      Puback a;
      EBF_TRY(r.u16("packet_id", &a.packet_id));
      if (a.packet_id == 0) return err(DecodeErrorKind::kInvalidField, "packet_id");
      if (r.remaining() != 0) return err(DecodeErrorKind::kLengthMismatch, "puback");
      return Packet(a);
    }
    case PacketType::kSubscribe: {
      Subscribe s;
      EBF_TRY(r.u16("packet_id", &s.packet_id));
      if (s.packet_id == 0) return err(DecodeErrorKind::kInvalidField, "packet_id");
      if (r.remaining() == 0) return err(DecodeErrorKind::kInvalidField, "topic_filters");
      while (r.remaining() > 0) {
        TopicFilter f;
        EBF_TRY(r.str("topic_filter", &f.filter));
        if (f.filter.empty()) return err(DecodeErrorKind::kInvalidField, "topic_filter");
        EBF_TRY(r.u8("requested_qos", &f.qos));
        if (f.qos > 1) return err(DecodeErrorKind::kInvalidField, "requested_qos");
        s.filters.push_back(std::move(f));
      }
      return Packet(std::move(s));
    }
    case PacketType::kSuback: {
      Suback s;
      EBF_TRY(r.u16("packet_id", &s.packet_id));
      if (s.packet_id == 0) return err(DecodeErrorKind::kInvalidField, "packet_id");
      if (r.remaining() == 0) return err(DecodeErrorKind::kInvalidField, "return_codes");
      while (r.remaining() > 0) {
        std::uint8_t rc = 0;
        EBF_TRY(r.u8("return_code", &rc));
        if (rc != 0x00 && rc != 0x01 && rc != 0x80) {
          return err(DecodeErrorKind::kInvalidField, "return_code");
        }
        s.return_codes.push_back(rc);
      }
      return Packet(std::move(s));
    }
    case PacketType::kPingreq:
    case PacketType::kPingresp:
    case PacketType::kDisconnect:
      if (r.remaining() != 0) return err(DecodeErrorKind::kLengthMismatch, "body");
      if (type == PacketType::kPingreq) return Packet(Pingreq{});
      if (type == PacketType::kPingresp) return Packet(Pingresp{});
      return Packet(Disconnect{});
  }
  return err(DecodeErrorKind::kUnsupportedType, "packet_type");
}

#undef EBF_TRY

bool flags_valid(PacketType type, std::uint8_t flags) {
  switch (type) {
    case PacketType::kPublish:
      return ((flags >> 1) & 0x3) <= 1;
    case PacketType::kSubscribe:
      return flags == 0x2;
    default:
      return flags == 0;
  }
}

void put_string(Bytes& out, const std::string& s, std::string_view what) {
  if (s.size() > 0xFFFF) throw EncodeError(std::string(what) + " longer than 65535 bytes");
  if (!valid_mqtt_utf8(to_bytes(s))) {
    throw EncodeError(std::string(what) + " is not valid UTF-8");
  }
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

std::optional<PacketType> packet_type_from_code(std::uint8_t code) {
  switch (code) {
    case 1: case 2: case 3: case 4: case 8: case 9: case 12: case 13: case 14:
      return static_cast<PacketType>(code);
    default:
      return std::nullopt;
  }
}

std::string_view packet_type_name(PacketType t) {
  switch (t) {
    case PacketType::kConnect: return "CONNECT";
    case PacketType::kConnack: return "CONNACK";
    case PacketType::kPublish: return "PUBLISH";
    case PacketType::kPuback: return "PUBACK";
    case PacketType::kSubscribe: return "SUBSCRIBE";
    case PacketType::kSuback: return "SUBACK";
    case PacketType::kPingreq: return "PINGREQ";
    case PacketType::kPingresp: return "PINGRESP";
    case PacketType::kDisconnect: return "DISCONNECT";
  }
  return "?";
}

PacketType type_of(const Packet& p) {
  static constexpr PacketType kByIndex[] = {
      PacketType::kConnect,  PacketType::kConnack,  PacketType::kPublish,
      PacketType::kPuback,   PacketType::kSubscribe, PacketType::kSuback,
      PacketType::kPingreq,  PacketType::kPingresp, PacketType::kDisconnect};
  return kByIndex[p.index()];
}

std::string_view decode_error_name(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::kUnsupportedType: return "UnsupportedType";
    case DecodeErrorKind::kMalformedVarint: return "MalformedVarint";
    case DecodeErrorKind::kIncomplete: return "Incomplete";
    case DecodeErrorKind::kBadUtf8: return "BadUtf8";
    case DecodeErrorKind::kLengthMismatch: return "LengthMismatch";
    case DecodeErrorKind::kInvalidField: return "InvalidField";
  }
  return "?";
}

Bytes encode_remaining_length(std::uint32_t n) {
  if (n > kMaxRemainingLength) {
    throw RangeError("remaining length " + std::to_string(n) + " exceeds " +
                     std::to_string(kMaxRemainingLength));
  }
  Bytes out;
  do {
    std::uint8_t b = n & 0x7F;
    n >>= 7;
    if (n > 0) b |= 0x80;
    out.push_back(b);
  } while (n > 0);
  return out;
}

Result<VarintValue, DecodeError> decode_remaining_length(ByteView bytes) {
  std::uint32_t value = 0;
  std::uint32_t multiplier = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= bytes.size()) return err(DecodeErrorKind::kIncomplete, "remaining_length");
    const std::uint8_t b = bytes[i];
    value += (b & 0x7Fu) * multiplier;
    if ((b & 0x80) == 0) {
      if (i > 0 && b == 0) {
        return err(DecodeErrorKind::kMalformedVarint, "remaining_length");
      }
      return VarintValue{value, i + 1};
    }
    multiplier *= 128;
  }
  return err(DecodeErrorKind::kMalformedVarint, "remaining_length");
}

Result<Packet, DecodeError> decode_packet(ByteView frame) {
  if (frame.empty()) return err(DecodeErrorKind::kIncomplete, "fixed_header");
  const auto type = packet_type_from_code(frame[0] >> 4);
  if (!type) return err(DecodeErrorKind::kUnsupportedType, "packet_type");
  auto varint = decode_remaining_length(frame.subspan(1));
  if (!varint.ok()) return varint.error();
  const std::size_t header = 1 + varint->consumed;
  if (varint->value != frame.size() - header) {
    return err(DecodeErrorKind::kLengthMismatch, "remaining_length");
  }
  const std::uint8_t flags = frame[0] & 0x0F;
  if (!flags_valid(*type, flags)) {
    return err(DecodeErrorKind::kInvalidField,
               *type == PacketType::kPublish ? "qos" : "flags");
  }
  return decode_body(*type, flags, frame.subspan(header));
}

RawFrame encode_packet(const Packet& p) {
  std::uint8_t first = static_cast<std::uint8_t>(type_of(p)) << 4;
  Bytes body;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Connect>) {
          put_string(body, v.protocol_name, "protocol_name");
          body.push_back(4);
          body.push_back(0x02);
          put_u16(body, v.keep_alive);
          put_string(body, v.client_id, "client_id");
        } else if constexpr (std::is_same_v<T, Connack>) {
          if (v.return_code > 5) throw EncodeError("CONNACK return code > 5");
          body.push_back(v.session_present ? 1 : 0);
          body.push_back(v.return_code);
        } else if constexpr (std::is_same_v<T, Publish>) {
          if (v.qos > 1) throw EncodeError("PUBLISH qos must be 0 or 1");
          if ((v.qos == 1) != v.packet_id.has_value()) {
            throw EncodeError("PUBLISH packet_id present iff qos == 1");
          }
          if (v.packet_id && *v.packet_id == 0) {
            throw EncodeError("PUBLISH packet_id must be non-zero");
          }
          first |= static_cast<std::uint8_t>(v.qos << 1);
          if (v.dup) first |= 0x08;
          if (v.retain) first |= 0x01;
          put_string(body, v.topic, "topic");
          if (v.packet_id) put_u16(body, *v.packet_id);
          body.insert(body.end(), v.payload.begin(), v.payload.end());
        } else if constexpr (std::is_same_v<T, Puback>) {
          if (v.packet_id == 0) throw EncodeError("PUBACK packet_id must be non-zero");
          put_u16(body, v.packet_id);
        } else if constexpr (std::is_same_v<T, Subscribe>) {
          first |= 0x02;
          if (v.packet_id == 0) throw EncodeError("SUBSCRIBE packet_id must be non-zero");
          if (v.filters.empty()) throw EncodeError("SUBSCRIBE needs at least one topic filter");
          put_u16(body, v.packet_id);
          for (const auto& f : v.filters) {
            if (f.filter.empty()) throw EncodeError("empty topic filter");
            if (f.qos > 1) throw EncodeError("requested qos must be 0 or 1");
            put_string(body, f.filter, "topic_filter");
            body.push_back(f.qos);
          }
        } else if constexpr (std::is_same_v<T, Suback>) {
          if (v.packet_id == 0) throw EncodeError("SUBACK packet_id must be non-zero");
          if (v.return_codes.empty()) throw EncodeError("SUBACK needs at least one return code");
          put_u16(body, v.packet_id);
          for (auto rc : v.return_codes) {
            if (rc != 0x00 && rc != 0x01 && rc != 0x80) {
              throw EncodeError("invalid SUBACK return code");
            }
            body.push_back(rc);
          }
        }
      },
      p);
  if (body.size() > kMaxRemainingLength) throw EncodeError("packet too large");
  RawFrame out;
  out.reserve(body.size() + 5);
  out.push_back(first);
  const Bytes len = encode_remaining_length(static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), len.begin(), len.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

bool valid_mqtt_utf8(ByteView s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::uint8_t b = s[i];
    int extra = 0;
    std::uint8_t lo = 0x80;
    std::uint8_t hi = 0xBF;
    if (b >= 0x01 && b <= 0x7F) {
      extra = 0;
    } else if (b >= 0xC2 && b <= 0xDF) {
      extra = 1;
    } else if (b == 0xE0) {
      extra = 2;
      lo = 0xA0;
    } else if ((b >= 0xE1 && b <= 0xEC) || b == 0xEE || b == 0xEF) {
      extra = 2;
    } else if (b == 0xED) {
      extra = 2;
      hi = 0x9F;
    } else if (b == 0xF0) {
      extra = 3;
      lo = 0x90;
    } else if (b >= 0xF1 && b <= 0xF3) {
      extra = 3;
    } else if (b == 0xF4) {
      extra = 3;
      hi = 0x8F;
    } else {
      return false;
    }
    ++i;
    for (int k = 0; k < extra; ++k, ++i) {
      if (i >= s.size()) return false;
      const std::uint8_t c = s[i];
      if (k == 0 ? (c < lo || c > hi) : (c < 0x80 || c > 0xBF)) return false;
    }
  }
  return true;
}

std::string decode_outcome_class(ByteView frame) {
  std::string out = frame.empty() ? "-" : std::to_string(frame[0] >> 4);
  out += ':';
  auto r = decode_packet(frame);
  if (r.ok()) return out + "ok";
  out += decode_error_name(r.error().kind);
  return out + "(" + r.error().field + ")";
}

std::string describe(const Packet& p) {
  std::ostringstream os;
  os << packet_type_name(type_of(p));
  if (const auto* c = std::get_if<Connect>(&p)) {
    os << "{protocol=" << c->protocol_name << " client_id=" << c->client_id << "}";
  } else if (const auto* pub = std::get_if<Publish>(&p)) {
    os << "{topic=" << pub->topic << " qos=" << int(pub->qos)
       << " dup=" << pub->dup << " retain=" << pub->retain
       << " payload=" << pub->payload.size() << "B}";
  } else if (const auto* s = std::get_if<Subscribe>(&p)) {
    os << "{id=" << s->packet_id << " filters=" << s->filters.size() << "}";
  }
  return os.str();
}

}  // namespace ebf::mqtt
