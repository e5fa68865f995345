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

import json
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def report_schema():
    return json.loads((ROOT / "schemas" / "report.schema.json").read_text())


def small_config(out_dir, bugs, **fuzz):
    return {
        "target": {"bugs": bugs},
        "bmc": {"budget_seconds": 5},
        "fuzz": {"budget_seconds": 30, "max_execs": 3000, **fuzz},
        "paths": {"out_dir": str(out_dir)},
    }
