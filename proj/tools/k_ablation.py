#!/usr/bin/env python3
"""Boron sortlet-count ablation: trains b.cfg once per K and writes the
windowed error against the reference energy as CSV (iteration, K, error_mha)."""

import argparse
import csv
import json
import pathlib
import subprocess
import sys

REFERENCE_BORON = -24.65391  # Ha, estimated exact nonrelativistic energy


def main() -> int:
    here = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--svmc", default=str(here / "build" / "svmc"))
    ap.add_argument("--config", default=str(here / "configs" / "b.cfg"))
    ap.add_argument("--sortlets", type=int, nargs="+", default=[4, 16, 32])
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--window", type=int, default=50)
    ap.add_argument("--out", default="ablation")
    ap.add_argument("--csv", default="ablation.csv")
    args = ap.parse_args()

    rows = []
    for k in args.sortlets:
        cmd = [args.svmc, "train", args.config, "--sortlets", str(k), "--iters", str(args.iters), "--out", args.out]
        print(" ".join(cmd), flush=True)
        done = subprocess.run(cmd, capture_output=True, text=True)
        sys.stdout.write(done.stdout)
        if done.returncode != 0:
            sys.stderr.write(done.stderr)
            return done.returncode
        run_dir = next(line.split(" ", 2)[2] for line in done.stdout.splitlines() if line.startswith("run directory"))
        energies = [json.loads(line)["energy"] for line in open(pathlib.Path(run_dir) / "metrics.ndjson")]
        for start in range(0, len(energies) - args.window + 1, args.window):
            mean = sum(energies[start : start + args.window]) / args.window
            rows.append((start + args.window, k, 1e3 * (mean - REFERENCE_BORON)))

    with open(args.csv, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "sortlets", "error_mha"])
        w.writerows(rows)
    print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
