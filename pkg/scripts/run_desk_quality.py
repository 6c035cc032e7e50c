#!/usr/bin/env python3
"""Run the desk-scale quality sweep and emit plot-ready summaries.

Produces results/quality_desk.csv plus one CSV per figure under
results/figures/. The desk profile uses a reduced grid so the sweep
finishes in minutes on a laptop; pass --profile paper for the full grid.
"""

import argparse
import pathlib
import sys

from megores.bench import main as bench_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", default="desk", choices=["desk", "paper"])
    ap.add_argument("--family", default="gaussian", choices=["gaussian", "gamma"])
    ap.add_argument("--out-dir", default="results", type=pathlib.Path)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    out_csv = args.out_dir / f"quality_{args.profile}.csv"
    rc = bench_main([
        "quality",
        "--profile", args.profile,
        "--family", args.family,
        "--seed", str(args.seed),
        "--out", str(out_csv),
    ])
    if rc != 0:
        return rc
    fig_dir = args.out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    for figure in ("mse-vs-N", "bias-contribution"):
        rc = bench_main([
            "plotdata",
            "--results", str(out_csv),
            "--figure", figure,
            "--out", str(fig_dir / f"{figure}.csv"),
        ])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(run())
