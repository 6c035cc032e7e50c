"""Deterministic, splittable random streams keyed by (seed, lane, counter).

Every draw is a pure function of a 64-bit triple, so emulated threads can be
evaluated in any order (or in parallel) and still reproduce the same sequence
bit-for-bit.  The generator is a keyed splitmix64-style hash: the key words
are folded together with odd multipliers and passed through the splitmix64
finalizer.  This is not cryptographic, but it passes the uniformity and
cross-lane correlation checks the test suite applies.

Lane conventions used by the resamplers:
  * particle draws use ``lane = particle_index``
  * per-warp shared draws use ``lane = WARP_LANE_BASE + warp_index``
  * the global offset list uses ``lane = GLOBAL_OFFSET_LANE``

Gaussian variates use the Box-Muller transform; the two required uniforms
come from salt 0 and salt 1 of the same key.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "StreamKey",
    "GLOBAL_OFFSET_LANE",
    "WARP_LANE_BASE",
    "uniform01",
    "uniform_int",
    "gaussian",
    "uniform01_at",
    "uniform_open01_at",
    "uniform_int_at",
    "gaussian_at",
    "derive_seed",
]

# Reserved lane ranges.  Particle lanes occupy [0, N); these sit far above any
# realistic particle count.
WARP_LANE_BASE = np.uint64(1) << np.uint64(61)
GLOBAL_OFFSET_LANE = np.uint64(1) << np.uint64(62)

_M_LANE = np.uint64(0x9E3779B97F4A7C15)
_M_CTR = np.uint64(0xD1B54A32D192ED03)
_M_SALT = np.uint64(0x8CB92BA72F3D8DD7)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@dataclass(frozen=True)
class StreamKey:
    """Coordinates of a single random draw."""

    seed: int
    lane: int
    counter: int


def _mix_np(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _MIX1
    x = (x ^ (x >> _S27)) * _MIX2
    return x ^ (x >> _S31)


def _hash_np(seed, lane, counter, salt=0):
    """Vectorised keyed hash; broadcasts lane/counter/salt arrays."""
    seed = np.uint64(seed)
    lane = np.asarray(lane, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    salt = np.asarray(salt, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix_np(seed + _M_LANE)
        x = base + lane * _M_LANE + counter * _M_CTR + salt * _M_SALT
        return _mix_np(x)


@numba.njit(numba.uint64(numba.uint64), cache=True)
def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@numba.njit(numba.uint64(numba.uint64, numba.uint64, numba.uint64, numba.uint64), cache=True)
def hash_u64(seed, lane, counter, salt):
    """Scalar twin of :func:`_hash_np`; bit-identical, usable inside kernels."""
    base = _mix(seed + np.uint64(0x9E3779B97F4A7C15))
    x = (
        base
        + lane * np.uint64(0x9E3779B97F4A7C15)
        + counter * np.uint64(0xD1B54A32D192ED03)
        + salt * np.uint64(0x8CB92BA72F3D8DD7)
    )
    return _mix(x)


@numba.njit(numba.float64(numba.uint64, numba.uint64, numba.uint64), cache=True)
def u01(seed, lane, counter):
    """Scalar uniform draw in [0, 1) for use inside numba kernels."""
    return float(hash_u64(seed, lane, counter, np.uint64(0)) >> np.uint64(11)) * _INV_2_53


@numba.njit(numba.int64(numba.uint64, numba.uint64, numba.uint64, numba.int64), cache=True)
def uint_below(seed, lane, counter, n):
    """Scalar uniform integer in [0, n) for use inside numba kernels.

    Returns int64 (not uint64) so callers can mix it with signed indices
    without numba promoting the result to float64.
    """
    v = np.int64(u01(seed, lane, counter) * float(n))
    if v >= n:
        v = n - 1
    return v


# ---------------------------------------------------------------------------
# Array-valued draws (lane/counter may be arrays; broadcasting applies).


def uniform01_at(seed, lane, counter):
    """Uniform draws in [0, 1), one per broadcast (lane, counter) pair."""
    h = _hash_np(seed, lane, counter)
    return (h >> _S11).astype(np.float64) * _INV_2_53


def uniform_open01_at(seed, lane, counter):
    """Uniform draws in the open interval (0, 1); used for inverse-CDF sampling."""
    h = _hash_np(seed, lane, counter)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV_2_53


def uniform_int_at(seed, lane, counter, n):
    """Uniform integer draws in [0, n) via the scaled-multiply method.

    The bias of floor(u * n) with 53 random bits is at most n / 2**53, which
    is far below the statistical resolution of any test in this project.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    v = (uniform01_at(seed, lane, counter) * n).astype(np.int64)
    return np.minimum(v, n - 1)


def gaussian_at(seed, lane, counter, mean=0.0, stddev=1.0):
    """Gaussian draws via Box-Muller on salts 0 and 1 of the key."""
    if stddev < 0:
        raise ValueError(f"stddev must be >= 0, got {stddev}")
    h1 = _hash_np(seed, lane, counter, 0)
    h2 = _hash_np(seed, lane, counter, 1)
    u1 = ((h1 >> _S11).astype(np.float64) + 0.5) * _INV_2_53
    u2 = (h2 >> _S11).astype(np.float64) * _INV_2_53
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return mean + stddev * z


# ---------------------------------------------------------------------------
# Scalar key-based API.


def uniform01(key: StreamKey) -> float:
    return float(uniform01_at(key.seed, key.lane, key.counter))


def uniform_int(key: StreamKey, n: int) -> int:
    return int(uniform_int_at(key.seed, key.lane, key.counter, n))


def gaussian(key: StreamKey, mean: float = 0.0, stddev: float = 1.0) -> float:
    return float(gaussian_at(key.seed, key.lane, key.counter, mean, stddev))


def derive_seed(seed, *parts) -> int:
    """Fold experiment coordinates into a fresh 64-bit seed.

    Used to give every (sequence, run, time-step, ...) combination its own
    independent stream family without coordinating counters globally.
    """
    h = np.uint64(seed)
    with np.errstate(over="ignore"):
        h = _mix_np(h + _M_LANE)
        for p in parts:
            h = _mix_np(h ^ (np.uint64(p) * _M_CTR + _M_SALT))
    return int(h)
