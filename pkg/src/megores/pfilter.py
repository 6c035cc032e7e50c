"""Bootstrap particle filter benchmark on a scalar nonlinear growth model.

State evolves as x' = x/2 + 25x/(1+x^2) + 8cos(1.2 t) + v with v ~ N(0, 10),
observed through z = x^2/20 + n with n ~ N(0, 1).  Each step runs predict and
update, resamples with a pluggable algorithm, then estimates the state as the
mean of the resampled (uniformly weighted) cloud; weight normalisation is
skipped since none of the resamplers require it.

Conventions fixed here (the model itself leaves them open): truth starts at
x0 = 0, the first transition uses t = 1 inside the cosine, and the initial
particle cloud draws from N(0, process_var).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .metrics import RunTimings, resample_ratio, rmse
from .resample import WarpConfig, ancestors_to_offspring, apply_ancestors, make_resampler
from .weights import WeightVector, compute_iterations, estimate_ratio

__all__ = [
    "FilterConfig",
    "Trajectory",
    "FilterState",
    "transition",
    "likelihood",
    "sir_step",
    "generate_trajectory",
    "run_filter",
    "run_benchmark",
]

# Stream tags separating the filter's independent noise sources.
_TAG_INIT = 1
_TAG_PROCESS = 2
_TAG_RESAMPLE = 3
_TAG_TRUTH = 4
_TAG_OBS = 5

_RATIO_SUBSET = 4096


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int
    process_var: float = 10.0
    obs_var: float = 1.0
    resampler: str = "megopolis"
    partition_bytes: int | None = None
    warp: WarpConfig = field(default_factory=WarpConfig)
    b_fixed: int | None = None
    epsilon: float = 0.1
    precision: str = "single"

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be positive")
        if self.process_var <= 0 or self.obs_var <= 0:
            raise ValueError("noise variances must be positive")


@dataclass(frozen=True)
class Trajectory:
    truth: np.ndarray
    observations: np.ndarray

    def __post_init__(self):
        if len(self.truth) != len(self.observations) or len(self.truth) < 1:
            raise ValueError("truth and observations must have equal positive length")


@dataclass
class FilterState:
    particles: np.ndarray
    estimate: float
    t: int
    timings: RunTimings


def transition(x, t: int, noise=0.0):
    """One step of the growth map; ``noise`` is the process noise sample(s)."""
    x = np.asarray(x, dtype=np.float64)
    return x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * math.cos(1.2 * t) + noise


def likelihood(z: float, x, obs_var: float = 1.0):
    """Gaussian observation density of z given state x; strictly positive."""
    if obs_var <= 0:
        raise ValueError("obs_var must be positive")
    x = np.asarray(x, dtype=np.float64)
    residual = z - x * x / 20.0
    dens = np.exp(-0.5 * residual * residual / obs_var) / math.sqrt(2.0 * math.pi * obs_var)
    # floor at the smallest positive float so far-off particles keep a
    # nonzero weight and the resampler never sees an all-zero vector
    tiny = np.finfo(np.float64).tiny
    return np.maximum(dens, tiny)


def generate_trajectory(
    t_steps: int, x0: float = 0.0, seed=0, process_var: float = 10.0, obs_var: float = 1.0
) -> Trajectory:
    """Simulate ground truth and observations for ``t_steps`` steps (t = 1..T)."""
    if t_steps < 1:
        raise ValueError("t_steps must be >= 1")
    v = (
        rng.gaussian_at(rng.derive_seed(seed, _TAG_TRUTH), np.arange(t_steps), 0)
        * math.sqrt(process_var)
    )
    n = (
        rng.gaussian_at(rng.derive_seed(seed, _TAG_OBS), np.arange(t_steps), 0)
        * math.sqrt(obs_var)
    )
    truth = np.empty(t_steps, dtype=np.float64)
    x = x0
    for t in range(1, t_steps + 1):
        x = float(transition(x, t, v[t - 1]))
        truth[t - 1] = x
    observations = truth * truth / 20.0 + n
    return Trajectory(truth, observations)


def init_state(cfg: FilterConfig, seed) -> FilterState:
    particles = rng.gaussian_at(
        rng.derive_seed(seed, _TAG_INIT), np.arange(cfg.n_particles), 0
    ) * math.sqrt(cfg.process_var)
    return FilterState(particles, float(particles.mean()), 0, RunTimings(0.0, 0.0, 0.0))


def _iteration_budget(cfg: FilterConfig, w: WeightVector, seed) -> int:
    if cfg.b_fixed is not None:
        return cfg.b_fixed
    subset = min(_RATIO_SUBSET, len(w))
    ratio = estimate_ratio(w, subset, seed)
    return compute_iterations(cfg.epsilon, ratio, 1.0).b


def sir_step(state: FilterState, z: float, cfg: FilterConfig, seed) -> FilterState:
    """Predict/update, resample, estimate; per-stage wall time is recorded."""
    t = state.t + 1
    resampler = make_resampler(cfg.resampler, cfg.warp, cfg.partition_bytes)

    t0 = time.perf_counter()
    noise = rng.gaussian_at(
        rng.derive_seed(seed, _TAG_PROCESS, t), np.arange(cfg.n_particles), 0
    ) * math.sqrt(cfg.process_var)
    predicted = transition(state.particles, t, noise)
    w = WeightVector(likelihood(z, predicted, cfg.obs_var), cfg.precision)
    t1 = time.perf_counter()

    step_seed = rng.derive_seed(seed, _TAG_RESAMPLE, t)
    b = _iteration_budget(cfg, w, step_seed)
    ancestors = resampler(w, b, step_seed)
    resampled = apply_ancestors(predicted, ancestors)
    t2 = time.perf_counter()

    estimate = float(resampled.mean())
    t3 = time.perf_counter()

    return FilterState(resampled, estimate, t, RunTimings(t1 - t0, t2 - t1, t3 - t2))


def run_filter(cfg: FilterConfig, trajectory: Trajectory, seed):
    """Filter one trajectory; returns (estimates over time, mean stage timings)."""
    state = init_state(cfg, seed)
    t_steps = len(trajectory.truth)
    estimates = np.empty(t_steps, dtype=np.float64)
    stages = np.zeros(3, dtype=np.float64)
    for t in range(t_steps):
        state = sir_step(state, float(trajectory.observations[t]), cfg, seed)
        estimates[t] = state.estimate
        stages += (state.timings.stage1, state.timings.stage2, state.timings.stage3)
    stages /= t_steps
    return estimates, RunTimings(*stages)


def run_benchmark(
    base_cfg: FilterConfig,
    trajectories,
    runs_per_trajectory: int,
    b_values,
    algorithms,
    seed=0,
):
    """RMSE and mean resample ratio per (algorithm, B) over all trajectories.

    ``algorithms`` is a list of (name, partition_bytes-or-None); the same
    trajectory/run seeds are reused for every algorithm so comparisons pair.
    Prefix-sum resamplers ignore B and run with b set to 0 in the output row.
    """
    rows = []
    for name, part_bytes in algorithms:
        b_grid = list(b_values) if name in ("metropolis", "c1", "c2", "megopolis") else [0]
        for b in b_grid:
            cfg = replace(
                base_cfg,
                resampler=name,
                partition_bytes=part_bytes,
                b_fixed=b if b > 0 else None,
            )
            per_traj_rmse = []
            ratios = []
            for ti, traj in enumerate(trajectories):
                estimates = np.empty((runs_per_trajectory, len(traj.truth)))
                for k in range(runs_per_trajectory):
                    run_seed = rng.derive_seed(seed, ti, k)
                    est, timings = run_filter(cfg, traj, run_seed)
                    estimates[k] = est
                    ratios.append(resample_ratio(timings))
                per_traj_rmse.append(rmse(traj.truth, estimates))
            rows.append(
                {
                    "algorithm": name,
                    "partition_bytes": part_bytes,
                    "b": b,
                    "n": cfg.n_particles,
                    "rmse": float(np.mean(per_traj_rmse)),
                    "resample_ratio": float(np.mean(ratios)),
                }
            )
    return rows
