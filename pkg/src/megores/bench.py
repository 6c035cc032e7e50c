"""Benchmark CLI: quality grids, traffic grids, filter benchmark, exports.

Subcommands: quality, traffic, pf, gen-weights, plotdata.  Experiments are
described by a JSON config mirroring :class:`ExperimentSpec`; CLI flags
override config values.  Every result row carries its full coordinate tuple
plus the seed, so any row can be reproduced in isolation.

Output CSVs are deterministic byte-for-byte for a fixed seed: the first line
is a schema comment, floats are written with shortest round-trip repr, and
wall-clock quantities go to a ``<out>.timings.csv`` sidecar instead of the
main file.

Quality statistics are computed per weight sequence and then averaged across
sequences (not pooled), so the sequence count only tightens error bands.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import rng, storage
from .metrics import QualityAccumulator
from .pfilter import FilterConfig, generate_trajectory, run_benchmark
from .resample import ALGORITHMS, WarpConfig, ancestors_to_offspring, make_resampler
from .warpsim import rng_draws_per_iteration, trace_algorithm, traffic_report
from .weights import (
    GammaWeightParams,
    GaussianWeightParams,
    WeightVector,
    compute_iterations,
    gen_gamma_weights,
    gen_gaussian_weights,
)

SCHEMA_LINE = "# megores-results v1"

PROFILES = {
    "desk": dict(n_grid=[2**10, 2**12, 2**14, 2**16], k_runs=32, sequences=4),
    "paper": dict(n_grid=[2**e for e in range(6, 23)], k_runs=256, sequences=16),
}

_DEFAULT_ALGORITHMS = ["megopolis", "metropolis", "c1:128", "c2:128"]
_GAUSSIAN_PARAMS = [0.0, 1.0, 2.0, 3.0, 4.0]
_GAMMA_PARAMS = [0.5, 2.0, 3.0, 10.0, 50.0]


@dataclass
class ExperimentSpec:
    algorithms: list = field(default_factory=lambda: list(_DEFAULT_ALGORITHMS))
    n_grid: list = field(default_factory=lambda: list(PROFILES["desk"]["n_grid"]))
    family: str = "gaussian"
    params: list | None = None
    k_runs: int = 32
    sequences: int = 4
    epsilon: float = 0.01
    seed: int = 0
    precision: str = "single"
    out: str = "results.csv"
    traffic_b: int = 8
    pf_n: int = 2**16
    pf_b_grid: list = field(default_factory=lambda: [16, 32, 64])
    pf_trajectories: int = 4
    pf_runs: int = 10
    pf_t_steps: int = 100

    def __post_init__(self):
        if self.params is None:
            self.params = list(_GAUSSIAN_PARAMS if self.family == "gaussian" else _GAMMA_PARAMS)
        if not self.algorithms or not self.n_grid or not self.params:
            raise ValueError("algorithm, N, and parameter grids must be non-empty")
        if self.k_runs < 2:
            raise ValueError("k_runs must be >= 2")
        if self.family not in ("gaussian", "gamma"):
            raise ValueError(f"unknown weight family {self.family!r}")


def _token_id(token: str) -> int:
    """Stable small integer id for an algorithm token (unlike str hash)."""
    return int.from_bytes(token.encode()[:8].ljust(8, b"\0"), "little")


def parse_algorithm(token: str):
    """'c1:128' -> ('c1', 128); bare names carry no partition size."""
    name, _, part = token.partition(":")
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r} (choose from {', '.join(ALGORITHMS)})")
    part_bytes = int(part) if part else None
    if name in ("c1", "c2") and part_bytes is None:
        raise ValueError(f"{name} needs a partition size, e.g. {name}:128")
    return name, part_bytes


def _generate_weights(spec: ExperimentSpec, n: int, param: float, seq: int) -> WeightVector:
    fam = 0 if spec.family == "gaussian" else 1
    wseed = rng.derive_seed(spec.seed, fam, n, int(param * 1000), seq)
    if spec.family == "gaussian":
        return gen_gaussian_weights(GaussianWeightParams(param, n), wseed, spec.precision)
    return gen_gamma_weights(GammaWeightParams(param, 1.0, n), wseed, spec.precision)


def quality_grid(spec: ExperimentSpec):
    """One averaged result row per (algorithm, N, distribution parameter)."""
    rows = []
    for token in spec.algorithms:
        name, part_bytes = parse_algorithm(token)
        resampler = make_resampler(name, partition_bytes=part_bytes)
        for n in spec.n_grid:
            for param in spec.params:
                per_seq = []
                b_values = []
                for seq in range(spec.sequences):
                    w = _generate_weights(spec, n, param, seq)
                    wd = np.asarray(w.values, dtype=np.float64)
                    b = compute_iterations(spec.epsilon, float(wd.mean()), float(wd.max())).b
                    b_values.append(b)
                    acc = QualityAccumulator(n)
                    for k in range(spec.k_runs):
                        run_seed = rng.derive_seed(spec.seed, _token_id(token), n, seq, k)
                        anc = resampler(w, b, run_seed)
                        acc.add(ancestors_to_offspring(anc, n), w)
                    per_seq.append(acc.finalize())
                rows.append(
                    {
                        "algorithm": token,
                        "n": n,
                        "family": spec.family,
                        "param": param,
                        "b_mean": float(np.mean(b_values)),
                        "k": spec.k_runs,
                        "sequences": spec.sequences,
                        "epsilon": spec.epsilon,
                        "seed": spec.seed,
                        "precision": spec.precision,
                        "mse_per_particle": float(np.mean([s.mse_per_particle for s in per_seq])),
                        "mse": float(np.mean([s.mse for s in per_seq])),
                        "variance": float(np.mean([s.variance for s in per_seq])),
                        "bias_sq": float(np.mean([s.bias_sq for s in per_seq])),
                        "bias_contribution": float(
                            np.mean([s.bias_contribution for s in per_seq])
                        ),
                    }
                )
    return rows


def traffic_grid(spec: ExperimentSpec):
    """Transaction-model rows for the Metropolis-family algorithms."""
    rows = []
    warp = WarpConfig()
    for token in spec.algorithms:
        name, part_bytes = parse_algorithm(token)
        if name in ("multinomial", "systematic"):
            continue
        for n in spec.n_grid:
            w = WeightVector(np.ones(n), spec.precision)
            trace = trace_algorithm(name, w, spec.traffic_b, warp, part_bytes, spec.seed)
            report = traffic_report(trace)
            rows.append(
                {
                    "algorithm": token,
                    "n": n,
                    "b": spec.traffic_b,
                    "partition_bytes": part_bytes if part_bytes is not None else "",
                    "seed": spec.seed,
                    "mean_transactions": report.per_iteration_mean,
                    "max_transactions": report.per_warp_max,
                    "total_transactions": report.total_transactions,
                    "unnecessary_words": report.unnecessary_words,
                    "rng_draws_per_iteration": rng_draws_per_iteration(name),
                }
            )
    return rows


def pf_grid(spec: ExperimentSpec):
    """Filter-benchmark rows; RMSE in the main rows, ratios in the sidecar."""
    algorithms = [parse_algorithm(token) for token in spec.algorithms]
    trajectories = [
        generate_trajectory(spec.pf_t_steps, 0.0, rng.derive_seed(spec.seed, 100 + i))
        for i in range(spec.pf_trajectories)
    ]
    cfg = FilterConfig(n_particles=spec.pf_n, precision=spec.precision)
    raw = run_benchmark(cfg, trajectories, spec.pf_runs, spec.pf_b_grid, algorithms, spec.seed)
    rows, timing_rows = [], []
    for r in raw:
        part = r["partition_bytes"]
        coords = {
            "algorithm": r["algorithm"] if part is None else f"{r['algorithm']}:{part}",
            "b": r["b"],
            "n": r["n"],
            "t_steps": spec.pf_t_steps,
            "trajectories": spec.pf_trajectories,
            "runs": spec.pf_runs,
            "seed": spec.seed,
        }
        rows.append({**coords, "rmse": r["rmse"]})
        timing_rows.append({**coords, "resample_ratio": r["resample_ratio"]})
    return rows, timing_rows


def write_csv(path, rows) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def read_csv(path):
    with open(path, newline="") as fh:
        data = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(data))


def plot_data(rows, figure: str):
    """Reshape result rows into (x, series, value) triples for one figure."""
    out = []
    if figure == "mse-vs-N":
        for r in rows:
            out.append((int(r["n"]), f"{r['algorithm']}|{r['param']}", float(r["mse_per_particle"])))
    elif figure == "bias-contribution":
        for r in rows:
            out.append(
                (int(r["n"]), f"{r['algorithm']}|{r['param']}", float(r["bias_contribution"]))
            )
    elif figure == "traffic-ratio":
        base = {
            int(r["n"]): float(r["mean_transactions"])
            for r in rows
            if r["algorithm"].split(":")[0] == "megopolis"
        }
        if not base:
            raise ValueError("traffic-ratio needs a megopolis series as baseline")
        for r in rows:
            n = int(r["n"])
            out.append((n, r["algorithm"], float(r["mean_transactions"]) / base[n]))
    elif figure == "rmse-vs-B":
        for r in rows:
            out.append((int(r["b"]), r["algorithm"], float(r["rmse"])))
    else:
        raise ValueError(f"unknown figure id {figure!r}")
    return [{"x": x, "series": s, "value": v} for x, s, v in out]


# ---------------------------------------------------------------------------
# CLI plumbing.


def _build_spec(args) -> ExperimentSpec:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    if getattr(args, "profile", None):
        values.update(PROFILES[args.profile])
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "precision": getattr(args, "precision", None),
        "algorithms": _split_list(getattr(args, "algorithms", None)),
        "n_grid": _split_ints(getattr(args, "n_grid", None)),
        "family": getattr(args, "family", None),
        "params": _split_floats(getattr(args, "params", None)),
        "k_runs": getattr(args, "k_runs", None),
        "sequences": getattr(args, "sequences", None),
        "epsilon": getattr(args, "epsilon", None),
        "traffic_b": getattr(args, "b", None),
        "pf_n": getattr(args, "n", None),
        "pf_b_grid": _split_ints(getattr(args, "b_grid", None)),
        "pf_trajectories": getattr(args, "trajectories", None),
        "pf_runs": getattr(args, "runs", None),
        "pf_t_steps": getattr(args, "t_steps", None),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentSpec)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentSpec(**values)


def _split_list(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else None


def _split_ints(text):
    return [int(t) for t in _split_list(text)] if text else None


def _split_floats(text):
    return [float(t) for t in _split_list(text)] if text else None


def _add_common(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, default=None, help="base seed (decimal 64-bit)")
    p.add_argument("--out", default=None, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="megores", description="resampling quality / traffic / filter benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quality", help="resampling quality grid (MSE, variance, bias)")
    _add_common(q)
    q.add_argument("--profile", choices=sorted(PROFILES))
    q.add_argument("--precision", choices=["single", "double"])
    q.add_argument("--algorithms", help="comma list, e.g. megopolis,metropolis,c1:128")
    q.add_argument("--n-grid", dest="n_grid", help="comma list of particle counts")
    q.add_argument("--family", choices=["gaussian", "gamma"])
    q.add_argument("--params", help="comma list of y values or gamma shapes")
    q.add_argument("--k-runs", dest="k_runs", type=int)
    q.add_argument("--sequences", type=int)
    q.add_argument("--epsilon", type=float)

    t = sub.add_parser("traffic", help="warp transaction-model grid")
    _add_common(t)
    t.add_argument("--profile", choices=sorted(PROFILES))
    t.add_argument("--algorithms")
    t.add_argument("--n-grid", dest="n_grid")
    t.add_argument("--b", type=int, help="iteration count to trace")

    f = sub.add_parser("pf", help="end-to-end particle filter benchmark")
    _add_common(f)
    f.add_argument("--precision", choices=["single", "double"])
    f.add_argument("--algorithms")
    f.add_argument("--n", type=int, help="particle count")
    f.add_argument("--b-grid", dest="b_grid", help="comma list of iteration budgets")
    f.add_argument("--trajectories", type=int)
    f.add_argument("--runs", type=int)
    f.add_argument("--t-steps", dest="t_steps", type=int)

    g = sub.add_parser("gen-weights", help="write a weight file")
    _add_common(g)
    g.add_argument("--precision", choices=["single", "double"])
    g.add_argument("--family", choices=["gaussian", "gamma"], required=True)
    g.add_argument("--param", type=float, required=True, help="y or gamma shape alpha")
    g.add_argument("--n", type=int, required=True)

    p = sub.add_parser("plotdata", help="reshape results into plot-ready long CSV")
    _add_common(p)
    p.add_argument("--results", required=True, help="input results CSV")
    p.add_argument(
        "--figure",
        required=True,
        choices=["mse-vs-N", "bias-contribution", "traffic-ratio", "rmse-vs-B"],
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"megores: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "quality":
        spec = _build_spec(args)
        write_csv(spec.out, quality_grid(spec))
        print(f"wrote {spec.out}")
        return 0
    if args.command == "traffic":
        spec = _build_spec(args)
        write_csv(spec.out, traffic_grid(spec))
        print(f"wrote {spec.out}")
        return 0
    if args.command == "pf":
        spec = _build_spec(args)
        rows, timing_rows = pf_grid(spec)
        write_csv(spec.out, rows)
        write_csv(spec.out + ".timings.csv", timing_rows)
        print(f"wrote {spec.out} (+ timings sidecar)")
        return 0
    if args.command == "gen-weights":
        spec = _build_spec(args)
        seed = spec.seed
        n = args.n
        if args.family == "gaussian":
            w = gen_gaussian_weights(GaussianWeightParams(args.param, n), seed, spec.precision)
        else:
            w = gen_gamma_weights(GammaWeightParams(args.param, 1.0, n), seed, spec.precision)
        storage.save_weights(spec.out, w)
        wd = np.asarray(w.values, dtype=np.float64)
        print(
            f"wrote {spec.out}: n={n} mean={wd.mean():.6g} max={wd.max():.6g} "
            f"ratio={wd.mean() / wd.max():.6g}"
        )
        return 0
    if args.command == "plotdata":
        out = args.out or "plotdata.csv"
        rows = plot_data(read_csv(args.results), args.figure)
        write_csv(out, rows)
        print(f"wrote {out}")
        return 0
    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
