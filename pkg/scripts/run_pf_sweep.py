#!/usr/bin/env python3
"""Run the particle-filter RMSE sweep over iteration budgets.

Produces results/pf_sweep.csv (per-run RMSE rows) and a timing sidecar
results/pf_sweep.csv.timings.csv, plus the rmse-vs-B figure CSV under
results/figures/. Defaults match the benchmark configuration used in the
acceptance tests; shrink --pf-n or --pf-runs for a quick look.
"""

import argparse
import pathlib
import sys

from megores.bench import main as bench_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results", type=pathlib.Path)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pf-n", type=int, default=2 ** 16)
    ap.add_argument("--pf-runs", type=int, default=10)
    ap.add_argument("--pf-trajectories", type=int, default=4)
    ap.add_argument("--pf-t-steps", type=int, default=100)
    ap.add_argument("--pf-b-grid", type=int, nargs="+", default=[16, 32, 64])
    args = ap.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    out_csv = args.out_dir / "pf_sweep.csv"
    rc = bench_main([
        "pf",
        "--seed", str(args.seed),
        "--n", str(args.pf_n),
        "--runs", str(args.pf_runs),
        "--trajectories", str(args.pf_trajectories),
        "--t-steps", str(args.pf_t_steps),
        "--b-grid", ",".join(str(b) for b in args.pf_b_grid),
        "--out", str(out_csv),
    ])
    if rc != 0:
        return rc
    fig_dir = args.out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    return bench_main([
        "plotdata",
        "--results", str(out_csv),
        "--figure", "rmse-vs-B",
        "--out", str(fig_dir / "rmse-vs-B.csv"),
    ])


if __name__ == "__main__":
    sys.exit(run())
