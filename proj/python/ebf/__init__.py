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

"""BMC-seeded, encryption-aware fuzzing of an MQTT broker."""

import json

from ebf._core import (
    ConfigError,
    KeyLogError,
    ReportError,
    __version__,
    decode_outcome_class,
    describe_frame,
    encode_remaining_length,
    establish_session,
    open_at,
    parse_keylog,
    replay,
    seal_at,
)
from ebf import _core

CLIENT_TO_SERVER = 1
SERVER_TO_CLIENT = 2


def run_campaign(config=None):
    """Runs a campaign and returns the report as a dict.

    config follows the `ebf --config` file layout, e.g.
    {"target": {"bugs": "V1"}, "fuzz": {"max_execs": 5000}}.
    """
    return json.loads(_core.run_campaign(json.dumps(config or {})))


def summarize_report(report):
    return _core.summarize_report(json.dumps(report))


__all__ = [
    "CLIENT_TO_SERVER",
    "SERVER_TO_CLIENT",
    "ConfigError",
    "KeyLogError",
    "ReportError",
    "__version__",
    "decode_outcome_class",
    "describe_frame",
    "encode_remaining_length",
    "establish_session",
    "open_at",
    "parse_keylog",
    "replay",
    "run_campaign",
    "seal_at",
    "summarize_report",
]
