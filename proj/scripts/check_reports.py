#!/usr/bin/env python3
# Copyright 2026 The TierSim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs every shipped config and validates the reports against the schema."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tiersim", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--configs", required=True)
    args = ap.parse_args()

    schema = json.loads(pathlib.Path(args.schema).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    failures = 0
    configs = sorted(pathlib.Path(args.configs).glob("*.json"))
    if not configs:
        print("no configs found")
        return 1
    with tempfile.TemporaryDirectory() as tmp:
        for cfg in configs:
            out = pathlib.Path(tmp) / (cfg.stem + ".json")
            subprocess.run([args.tiersim, "run", "--config", str(cfg), "--out", str(out)],
                           check=True, stdout=subprocess.DEVNULL)
            report = json.loads(out.read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"{cfg.name}: {'/'.join(map(str, e.path))}: {e.message}")
            failures += bool(errors)
            print(f"{cfg.name}: {'ok' if not errors else 'invalid'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
