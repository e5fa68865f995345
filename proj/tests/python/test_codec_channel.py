# Copyright 2026 The EBF Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import hashlib
import os

import pytest
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

import ebf


def varint(n):
    out = bytearray()
    while True:
        b, n = n % 128, n // 128
        out.append(b | (0x80 if n else 0))
        if not n:
            return bytes(out)


@pytest.mark.parametrize("n", [0, 127, 128, 321, 16383, 16384, 2097151, 2097152, 268435455])
def test_remaining_length_matches_reference(n):
    assert ebf.encode_remaining_length(n) == varint(n)


def test_decode():
    assert ebf.describe_frame(bytes([0xC0, 0x00])) == "PINGREQ"
    assert ebf.decode_outcome_class(bytes([0xC0, 0x00])) == "12:ok"
    with pytest.raises(ValueError, match="Incomplete"):
        ebf.describe_frame(b"")


def hkdf(secret, salt, info):
    return HKDF(algorithm=hashes.SHA256(), length=32, salt=salt, info=info).derive(secret)


def test_session_and_records_match_cryptography():
    cn, sn = os.urandom(16), os.urandom(16)
    keys = ebf.establish_session(b"psk", cn, sn)
    assert keys["session_id"] == hashlib.sha256(cn + sn).digest()[:16]
    assert keys["client_key"] == hkdf(b"psk", cn + sn, b"ebf v1 client write key")
    assert keys["server_key"] == hkdf(b"psk", cn + sn, b"ebf v1 server write key")

    sid = keys["session_id"]
    for direction, key in [(1, keys["client_key"]), (2, keys["server_key"])]:
        pt = os.urandom(40)
        wire = ebf.seal_at(key, sid, direction, 5, pt)
        head = sid + bytes([direction]) + (5).to_bytes(8, "big")
        nonce = bytes([direction, 0, 0, 0]) + (5).to_bytes(8, "big")
        assert wire == head + nonce + ChaCha20Poly1305(key).encrypt(nonce, pt, head)
        assert ebf.open_at(key, sid, wire) == pt


def test_tampered_record_fails():
    keys = ebf.establish_session(b"psk", bytes(16), bytes(range(16)))
    wire = bytearray(ebf.seal_at(keys["client_key"], keys["session_id"], 1, 0, b"hello"))
    wire[-1] ^= 1
    with pytest.raises(ValueError, match="AuthFailure"):
        ebf.open_at(keys["client_key"], keys["session_id"], bytes(wire))
    with pytest.raises(ValueError):
        ebf.seal_at(keys["client_key"], keys["session_id"], 3, 0, b"")


def test_keylog_errors():
    with pytest.raises(ebf.KeyLogError):
        ebf.parse_keylog("not a key log\n")
