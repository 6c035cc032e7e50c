"""Resampling algorithms over a logical warp execution model.

Six resamplers share one contract: given non-negative weights they return an
ancestor index per particle, all derived deterministically from a seed.

The Metropolis family (metropolis, c1, c2, megopolis) performs B rounds of
accept/reject weight comparisons per particle.  Acceptance uses
``u * w[k] <= w[j]`` rather than a division so that zero weights need no
special ratio handling: a zero-weight challenger is only accepted against a
zero... see ``_accepts`` note below.  The family's comparison-index
selection is factored into :func:`comparison_indices` so the memory-traffic
model can replay exactly the index sequence the resamplers consume.

Draw conventions (counter layout per particle lane ``i``):
  * metropolis / c1 / c2: u at counter 2b, j at counter 2b+1
  * c1: partition p at (warp lane, counter 0); c2: p at (warp lane, counter b)
  * megopolis: u at counter b; offsets at (global lane, counter b)

The prefix-sum resamplers (multinomial, systematic) accumulate the prefix in
the weight vector's own precision with a fixed sequential summation order, so
single-precision instability at large N is reproducible and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from . import rng
from .rng import GLOBAL_OFFSET_LANE, WARP_LANE_BASE, u01, uint_below
from .weights import WeightVector

__all__ = [
    "WarpConfig",
    "PartitionConfig",
    "METROPOLIS_FAMILY",
    "ALGORITHMS",
    "metropolis",
    "metropolis_c1",
    "metropolis_c2",
    "megopolis",
    "megopolis_index",
    "megopolis_offsets",
    "multinomial",
    "systematic_improved",
    "systematic_oracle",
    "ancestors_to_offspring",
    "apply_ancestors",
    "comparison_indices",
    "make_resampler",
]

METROPOLIS_FAMILY = ("metropolis", "c1", "c2", "megopolis")
ALGORITHMS = METROPOLIS_FAMILY + ("multinomial", "systematic")


@dataclass(frozen=True)
class WarpConfig:
    """Logical warp geometry; also drives the memory-transaction model."""

    warp_size: int = 32
    word_bytes: int = 4
    segment_bytes: int = 32

    def __post_init__(self):
        if self.warp_size < 1:
            raise ValueError(f"warp_size must be positive, got {self.warp_size}")
        if self.word_bytes < 1 or self.segment_bytes % self.word_bytes:
            raise ValueError("segment_bytes must be a positive multiple of word_bytes")

    @property
    def words_per_segment(self) -> int:
        return self.segment_bytes // self.word_bytes


@dataclass(frozen=True)
class PartitionConfig:
    """Partition geometry for the c1/c2 variants."""

    partition_bytes: int

    def n_weights(self, warp: WarpConfig) -> int:
        if self.partition_bytes < 1 or self.partition_bytes % warp.word_bytes:
            raise ValueError("partition_bytes must be a positive multiple of word_bytes")
        return self.partition_bytes // warp.word_bytes

    def n_partitions(self, n: int, warp: WarpConfig) -> int:
        n_w = self.n_weights(warp)
        if n % n_w:
            raise ValueError(f"N={n} is not divisible by the partition width {n_w}")
        return n // n_w


def _check_weights(w: WeightVector) -> np.ndarray:
    values = w.values
    if not np.any(values > 0):
        raise ValueError("all weights are zero")
    return values


def _check_warp_multiple(n: int, warp: WarpConfig, strict: bool, name: str) -> None:
    if strict and n % warp.warp_size:
        raise ValueError(
            f"{name} requires N ({n}) to be a multiple of the warp size "
            f"({warp.warp_size}) in strict mode"
        )


# ---------------------------------------------------------------------------
# Metropolis-family kernels.  The acceptance rule, shared by all four:
# accept j iff u * w[k] <= w[j], except when both weights are zero (reject,
# avoiding the undefined 0/0 ratio).  For w[k] == 0 < w[j] the product is 0
# and the test always accepts, matching a ratio of +inf.


@numba.njit(cache=True)
def _accepts(u, wk, wj):
    if wj == 0.0 and wk == 0.0:
        return False
    return u * wk <= wj


@numba.njit(parallel=True, cache=True)
def _metropolis_kernel(w, b_total, seed):
    n = w.shape[0]
    anc = np.empty(n, np.int64)
    for i in numba.prange(n):
        lane = np.uint64(i)
        k = np.int64(i)
        for b in range(b_total):
            u = u01(seed, lane, np.uint64(2 * b))
            j = int(uint_below(seed, lane, np.uint64(2 * b + 1), n))
            if _accepts(u, w[k], w[j]):
                k = j
        anc[i] = k
    return anc


@numba.njit(parallel=True, cache=True)
def _c1_kernel(w, b_total, seed, warp_size, n_w, n_part):
    n = w.shape[0]
    anc = np.empty(n, np.int64)
    warp_base = np.uint64(1) << np.uint64(61)
    for i in numba.prange(n):
        lane = np.uint64(i)
        warp_lane = warp_base + np.uint64(i // warp_size)
        p = int(uint_below(seed, warp_lane, np.uint64(0), n_part))
        lo = p * n_w
        k = np.int64(i)
        for b in range(b_total):
            u = u01(seed, lane, np.uint64(2 * b))
            j = lo + int(uint_below(seed, lane, np.uint64(2 * b + 1), n_w))
            if _accepts(u, w[k], w[j]):
                k = j
        anc[i] = k
    return anc


@numba.njit(parallel=True, cache=True)
def _c2_kernel(w, b_total, seed, warp_size, n_w, n_part):
    n = w.shape[0]
    anc = np.empty(n, np.int64)
    warp_base = np.uint64(1) << np.uint64(61)
    for i in numba.prange(n):
        lane = np.uint64(i)
        warp_lane = warp_base + np.uint64(i // warp_size)
        k = np.int64(i)
        for b in range(b_total):
            u = u01(seed, lane, np.uint64(2 * b))
            p = int(uint_below(seed, warp_lane, np.uint64(b), n_part))
            j = p * n_w + int(uint_below(seed, lane, np.uint64(2 * b + 1), n_w))
            if _accepts(u, w[k], w[j]):
                k = j
        anc[i] = k
    return anc


@numba.njit(parallel=True, cache=True)
def _megopolis_kernel(w, offsets, seed, warp_size):
    n = w.shape[0]
    b_total = offsets.shape[0]
    anc = np.empty(n, np.int64)
    for i in numba.prange(n):
        lane = np.uint64(i)
        i_aligned = i - i % warp_size
        k = np.int64(i)
        for b in range(b_total):
            ob = offsets[b]
            o_aligned = ob - ob % warp_size
            o_unaligned = (i + ob) % warp_size
            j = (i_aligned + o_aligned + o_unaligned) % n
            u = u01(seed, lane, np.uint64(b))
            if _accepts(u, w[k], w[j]):
                k = j
        anc[i] = k
    return anc


def metropolis(w: WeightVector, b: int, seed) -> np.ndarray:
    """Independent per-particle random comparisons; fully random access."""
    values = _check_weights(w)
    if b < 1:
        raise ValueError(f"B must be >= 1, got {b}")
    return _metropolis_kernel(values, b, np.uint64(seed))


def metropolis_c1(
    w: WeightVector,
    b: int,
    part: PartitionConfig,
    warp: WarpConfig = WarpConfig(),
    seed=0,
    strict: bool = True,
) -> np.ndarray:
    """One shared partition per warp for all B rounds."""
    values = _check_weights(w)
    if b < 1:
        raise ValueError(f"B must be >= 1, got {b}")
    n = len(values)
    _check_warp_multiple(n, warp, strict, "metropolis_c1")
    n_w = part.n_weights(warp)
    n_part = part.n_partitions(n, warp)
    return _c1_kernel(values, b, np.uint64(seed), warp.warp_size, n_w, n_part)


def metropolis_c2(
    w: WeightVector,
    b: int,
    part: PartitionConfig,
    warp: WarpConfig = WarpConfig(),
    seed=0,
    strict: bool = True,
) -> np.ndarray:
    """A fresh shared partition per warp at every round."""
    values = _check_weights(w)
    if b < 1:
        raise ValueError(f"B must be >= 1, got {b}")
    n = len(values)
    _check_warp_multiple(n, warp, strict, "metropolis_c2")
    n_w = part.n_weights(warp)
    n_part = part.n_partitions(n, warp)
    return _c2_kernel(values, b, np.uint64(seed), warp.warp_size, n_w, n_part)


def megopolis_index(i: int, o_b: int, warp: WarpConfig, n: int) -> int:
    """Wrapped-sequential comparison index for particle ``i`` and offset ``o_b``.

    Each warp reads one warp-aligned block; the per-thread position inside the
    block is the wrapped sum of particle index and offset, so the warp's
    indices are a bijection onto the block.
    """
    if not (0 <= i < n) or not (0 <= o_b < n):
        raise ValueError("i and o_b must lie in [0, N)")
    ws = warp.warp_size
    i_aligned = i - i % ws
    o_aligned = o_b - o_b % ws
    o_unaligned = (i + o_b) % ws
    return (i_aligned + o_aligned + o_unaligned) % n


def megopolis_offsets(n: int, b: int, seed) -> np.ndarray:
    """The shared offset list: B uniform integers on the reserved global lane."""
    return rng.uniform_int_at(np.uint64(seed), GLOBAL_OFFSET_LANE, np.arange(b), n)


def megopolis(
    w: WeightVector,
    b: int,
    warp: WarpConfig = WarpConfig(),
    seed=0,
    strict: bool = True,
) -> np.ndarray:
    """Shared global offsets with warp-aligned wrapped-sequential reads."""
    values = _check_weights(w)
    if b < 1:
        raise ValueError(f"B must be >= 1, got {b}")
    n = len(values)
    _check_warp_multiple(n, warp, strict, "megopolis")
    offsets = megopolis_offsets(n, b, seed)
    return _megopolis_kernel(values, offsets, np.uint64(seed), warp.warp_size)


# ---------------------------------------------------------------------------
# Prefix-sum resamplers.


def _inclusive_prefix(values: np.ndarray) -> np.ndarray:
    # np.cumsum is a sequential left-to-right scan; the summation order is
    # fixed so single-precision rounding is reproducible run to run.
    return np.cumsum(values)


def multinomial(w: WeightVector, seed) -> np.ndarray:
    """Per-particle uniform draw located in the prefix sum by binary search."""
    values = _check_weights(w)
    n = len(values)
    inclusive = _inclusive_prefix(values)
    total = float(inclusive[-1])
    u = rng.uniform01_at(np.uint64(seed), np.arange(n), 0) * total
    u = u.astype(values.dtype)
    anc = np.searchsorted(inclusive, u, side="right")
    return np.minimum(anc, n - 1).astype(np.int64)


@numba.njit(parallel=True, cache=True)
def _systematic_scan_kernel(cum, u0):
    n = cum.shape[0]
    total = float(cum[n - 1])
    anc = np.empty(n, np.int64)
    for i in numba.prange(n):
        target = (i + u0) / n * total
        a = np.int64(i)
        # forward scan: advance while the prefix at a is still below target
        while a < n - 1 and cum[a] < target:
            a += 1
        # backward scan: retreat while the bracket below a also covers target
        while a > 0 and cum[a - 1] >= target:
            a -= 1
        anc[i] = a
    return anc


def systematic_improved(
    w: WeightVector, seed, warp: WarpConfig = WarpConfig()
) -> np.ndarray:
    """Stratified selection with one shared u; lockstep forward/backward scans.

    Every emulated thread starts at its own index and walks the inclusive
    prefix sum until its stratum bracket is found, which reproduces the
    sequential stratified result exactly for the same u.
    """
    values = _check_weights(w)
    u0 = float(rng.uniform01_at(np.uint64(seed), GLOBAL_OFFSET_LANE, 0))
    return _systematic_scan_kernel(_inclusive_prefix(values), u0)


def systematic_oracle(w: WeightVector, u: float) -> np.ndarray:
    """Sequential single-pass stratified reference for a given u in [0, 1)."""
    if not (0.0 <= u < 1.0):
        raise ValueError(f"u must be in [0, 1), got {u}")
    values = _check_weights(w)
    n = len(values)
    cum = _inclusive_prefix(values)
    total = float(cum[-1])
    anc = np.empty(n, np.int64)
    j = 0
    for i in range(n):
        target = (i + u) / n * total
        while j < n - 1 and cum[j] < target:
            j += 1
        anc[i] = j
    return anc


# ---------------------------------------------------------------------------
# Ancestor/offspring plumbing.


def ancestors_to_offspring(ancestors: np.ndarray, n: int | None = None) -> np.ndarray:
    """Count how many particles chose each index as their ancestor."""
    a = np.asarray(ancestors, dtype=np.int64)
    if n is None:
        n = len(a)
    if a.size and (a.min() < 0 or a.max() >= n):
        raise ValueError("ancestor indices out of range")
    return np.bincount(a, minlength=n).astype(np.int64)


def apply_ancestors(states: np.ndarray, ancestors: np.ndarray) -> np.ndarray:
    """Gather states by ancestor index into a fresh array."""
    states = np.asarray(states)
    a = np.asarray(ancestors, dtype=np.int64)
    if len(states) != len(a):
        raise ValueError(f"length mismatch: {len(states)} states vs {len(a)} ancestors")
    return states[a]


# ---------------------------------------------------------------------------
# Comparison-index replay (consumed by the memory-traffic model).


def comparison_indices(
    kind: str,
    n: int,
    b: int,
    seed,
    warp: WarpConfig = WarpConfig(),
    partition_bytes: int | None = None,
) -> np.ndarray:
    """The (B, N) matrix of weight indices each resampler reads, per round.

    Reuses the exact draw conventions of the kernels above, so entry [b, i]
    is bit-identical to the index particle i compares against at round b.
    """
    seed = np.uint64(seed)
    lanes = np.arange(n, dtype=np.uint64)[None, :]
    if kind == "metropolis":
        counters = (2 * np.arange(b, dtype=np.uint64) + 1)[:, None]
        return rng.uniform_int_at(seed, lanes, counters, n)
    if kind in ("c1", "c2"):
        if partition_bytes is None:
            raise ValueError(f"{kind} requires a partition size")
        part = PartitionConfig(partition_bytes)
        n_w = part.n_weights(warp)
        n_part = part.n_partitions(n, warp)
        n_warps = -(-n // warp.warp_size)
        warp_lanes = WARP_LANE_BASE + np.arange(n_warps, dtype=np.uint64)
        if kind == "c1":
            p = rng.uniform_int_at(seed, warp_lanes, 0, n_part)[None, :]
        else:
            p = rng.uniform_int_at(
                seed, warp_lanes[None, :], np.arange(b, dtype=np.uint64)[:, None], n_part
            )
        counters = (2 * np.arange(b, dtype=np.uint64) + 1)[:, None]
        local = rng.uniform_int_at(seed, lanes, counters, n_w)
        warp_of = np.arange(n) // warp.warp_size
        return p[:, warp_of] * n_w + local
    if kind == "megopolis":
        offsets = megopolis_offsets(n, b, seed)
        i = np.arange(n, dtype=np.int64)[None, :]
        ob = offsets[:, None]
        i_aligned = i - i % warp.warp_size
        o_aligned = ob - ob % warp.warp_size
        o_unaligned = (i + ob) % warp.warp_size
        return (i_aligned + o_aligned + o_unaligned) % n
    raise ValueError(f"unknown Metropolis-family resampler {kind!r}")


def make_resampler(
    kind: str,
    warp: WarpConfig = WarpConfig(),
    partition_bytes: int | None = None,
    strict: bool = True,
):
    """Bind an algorithm id to a uniform ``fn(w, b, seed) -> ancestors`` callable.

    The prefix-sum methods take no iteration budget and ignore ``b``.
    """
    if kind == "metropolis":
        return lambda w, b, seed: metropolis(w, b, seed)
    if kind in ("c1", "c2"):
        if partition_bytes is None:
            raise ValueError(f"{kind} requires a partition size")
        part = PartitionConfig(partition_bytes)
        fn = metropolis_c1 if kind == "c1" else metropolis_c2
        return lambda w, b, seed: fn(w, b, part, warp, seed, strict)
    if kind == "megopolis":
        return lambda w, b, seed: megopolis(w, b, warp, seed, strict)
    if kind == "multinomial":
        return lambda w, b, seed: multinomial(w, seed)
    if kind == "systematic":
        return lambda w, b, seed: systematic_improved(w, seed, warp)
    raise ValueError(f"unknown resampler {kind!r}")
