#!/usr/bin/env python3
"""Run the warp memory-transaction sweep and emit plot-ready summaries.

Produces results/traffic_desk.csv plus the traffic-ratio figure CSV under
results/figures/. Pass --profile paper for the full ensemble-size grid.
"""

import argparse
import pathlib
import sys

from megores.bench import main as bench_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", default="desk", choices=["desk", "paper"])
    ap.add_argument("--out-dir", default="results", type=pathlib.Path)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iterations", type=int, default=8,
                    help="iteration budget B used for the per-warp model")
    args = ap.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    out_csv = args.out_dir / f"traffic_{args.profile}.csv"
    rc = bench_main([
        "traffic",
        "--profile", args.profile,
        "--seed", str(args.seed),
        "--b", str(args.iterations),
        "--out", str(out_csv),
    ])
    if rc != 0:
        return rc
    fig_dir = args.out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    return bench_main([
        "plotdata",
        "--results", str(out_csv),
        "--figure", "traffic-ratio",
        "--out", str(fig_dir / "traffic-ratio.csv"),
    ])


if __name__ == "__main__":
    sys.exit(run())
