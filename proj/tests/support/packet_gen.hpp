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

#ifndef EBF_TESTS_SUPPORT_PACKET_GEN_HPP_
#define EBF_TESTS_SUPPORT_PACKET_GEN_HPP_

// Random valid packets and random frames for property tests.

#include <string>

#include "ebf/common/rng.hpp"
#include "ebf/mqtt/codec.hpp"

namespace ebf::testing {

inline void append_utf8(std::string& s, std::uint32_t cp) {
  if (cp < 0x80) {
    s.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Well-formed UTF-8 without U+0000, up to max_chars code points.
inline std::string random_utf8(Rng& rng, std::size_t min_chars, std::size_t max_chars) {
  std::string s;
  const auto n = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(min_chars),
                                                      static_cast<std::int64_t>(max_chars)));
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t cp = 0;
    switch (rng.below(4)) {
      case 0:
      case 1: cp = static_cast<std::uint32_t>(rng.between(1, 0x7F)); break;
      case 2: cp = static_cast<std::uint32_t>(rng.between(0x80, 0x7FF)); break;
      default:
        do {
          cp = static_cast<std::uint32_t>(rng.between(0x800, 0x10FFFF));
        } while (cp >= 0xD800 && cp <= 0xDFFF);
    }
    append_utf8(s, cp);
  }
  return s;
}

inline Bytes random_bytes(Rng& rng, std::size_t max_len) {
  Bytes b(static_cast<std::size_t>(rng.below(max_len + 1)));
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(256));
  return b;
}

inline std::uint16_t nonzero_u16(Rng& rng) { return static_cast<std::uint16_t>(rng.between(1, 0xFFFF)); }

inline mqtt::Packet random_packet(Rng& rng) {
  switch (rng.below(9)) {
    case 0: {
      mqtt::Connect c;
      c.protocol_name = rng.chance(3, 4) ? "MQTT" : random_utf8(rng, 0, 8);
      c.keep_alive = static_cast<std::uint16_t>(rng.below(0x10000));
      c.client_id = random_utf8(rng, 0, 23);
      return c;
    }
    case 1:
      return mqtt::Connack{rng.chance(1, 2), static_cast<std::uint8_t>(rng.below(6))};
    case 2: {
      mqtt::Publish p;
      p.topic = random_utf8(rng, 0, 40);
      p.payload = random_bytes(rng, 64);
      p.qos = static_cast<std::uint8_t>(rng.below(2));
      if (p.qos == 1) p.packet_id = nonzero_u16(rng);
      p.dup = rng.chance(1, 2);
      p.retain = rng.chance(1, 2);
      return p;
    }
    case 3:
      return mqtt::Puback{nonzero_u16(rng)};
    case 4: {
      mqtt::Subscribe s;
      s.packet_id = nonzero_u16(rng);
      const auto n = rng.between(1, 4);
      for (std::int64_t i = 0; i < n; ++i) {
        s.filters.push_back({random_utf8(rng, 1, 16), static_cast<std::uint8_t>(rng.below(2))});
      }
      return s;
    }
    case 5: {
      mqtt::Suback s;
      s.packet_id = nonzero_u16(rng);
      const auto n = rng.between(1, 4);
      static constexpr std::uint8_t kCodes[] = {0x00, 0x01, 0x80};
      for (std::int64_t i = 0; i < n; ++i) s.return_codes.push_back(kCodes[rng.below(3)]);
      return s;
    }
    case 6: return mqtt::Pingreq{};
    case 7: return mqtt::Pingresp{};
    default: return mqtt::Disconnect{};
  }
}

}  // namespace ebf::testing

#endif  // EBF_TESTS_SUPPORT_PACKET_GEN_HPP_
