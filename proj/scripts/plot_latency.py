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

"""Latency histograms from a `tiersim run --dump-latencies` CSV.

Writes a PNG when matplotlib is installed, otherwise prints per-class
summaries.
"""

import argparse
import collections
import csv
import statistics


def load(path):
    samples = collections.defaultdict(list)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            samples[row["class"]].append(int(row["t_complete_ps"]) - int(row["t_inject_ps"]))
    return samples


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--out", default="latency.png")
    ap.add_argument("--bins", type=int, default=50)
    args = ap.parse_args()

    samples = load(args.csv)
    for cls, v in sorted(samples.items()):
        print(f"{cls}: n={len(v)} mean={statistics.fmean(v):.1f} ps max={max(v)} ps")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    for cls, v in sorted(samples.items()):
        ax.hist([x / 1000 for x in v], bins=args.bins, histtype="step", label=cls)
    ax.set_xlabel("latency (ns)")
    ax.set_ylabel("samples")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
