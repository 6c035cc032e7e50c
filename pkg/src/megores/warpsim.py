"""Analytical warp memory-traffic model.

Instead of timing kernels, we count the aligned segment transactions a warp
would issue to service the weight reads of each comparison round.  A warp
needs one transaction per distinct aligned segment touched by its threads;
words fetched in those segments but never requested are "unnecessary".

Only the weight-array reads of the comparison step are modelled: ancestor
writes and particle copies are identically coalesced for every algorithm and
cancel out of comparisons.  No cache is modelled, so the small-partition
cache advantage of c1 is outside this model's scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .resample import METROPOLIS_FAMILY, WarpConfig, comparison_indices
from .weights import WeightVector

__all__ = [
    "AccessTrace",
    "TrafficReport",
    "count_transactions",
    "trace_algorithm",
    "traffic_report",
    "rng_draws_per_iteration",
]


@dataclass
class AccessTrace:
    """Word indices read per round: shape (iterations, N), grouped into warps."""

    indices: np.ndarray
    warp: WarpConfig

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.ndim != 2:
            raise ValueError("trace must have shape (iterations, N)")

    @property
    def iterations(self) -> int:
        return self.indices.shape[0]

    @property
    def n(self) -> int:
        return self.indices.shape[1]


@dataclass(frozen=True)
class TrafficReport:
    total_transactions: int
    per_iteration_mean: float
    per_warp_max: int
    unnecessary_words: int


def count_transactions(word_indices, warp: WarpConfig = WarpConfig()) -> int:
    """Distinct aligned segments needed to service one warp's word reads."""
    idx = np.asarray(word_indices, dtype=np.int64)
    segments = (idx * warp.word_bytes) // warp.segment_bytes
    return len(np.unique(segments))


def trace_algorithm(
    kind: str,
    w: WeightVector,
    b: int,
    warp: WarpConfig = WarpConfig(),
    partition_bytes: int | None = None,
    seed=0,
) -> AccessTrace:
    """Replay a resampler's comparison-index selection without resampling.

    The index sequence is generated by the same code path the resampler
    consumes, so the trace is bit-faithful to an actual run with this seed.
    """
    if kind not in METROPOLIS_FAMILY:
        raise ValueError(f"no access trace defined for {kind!r}")
    n = len(w)
    indices = comparison_indices(kind, n, b, seed, warp, partition_bytes)
    return AccessTrace(indices, warp)


def _per_row_distinct(sorted_rows: np.ndarray) -> np.ndarray:
    # rows are sorted along the last axis; distinct = 1 + number of steps
    return 1 + (np.diff(sorted_rows, axis=-1) != 0).sum(axis=-1)


def traffic_report(trace: AccessTrace, warp: WarpConfig | None = None) -> TrafficReport:
    """Aggregate segment transactions over every (warp, iteration) pair."""
    warp = warp or trace.warp
    ws = warp.warp_size
    n = trace.n
    if n % ws:
        raise ValueError(f"trace width {n} is not a multiple of the warp size {ws}")
    grouped = trace.indices.reshape(trace.iterations, n // ws, ws)
    segments = np.sort((grouped * warp.word_bytes) // warp.segment_bytes, axis=-1)
    transactions = _per_row_distinct(segments)
    distinct_words = _per_row_distinct(np.sort(grouped, axis=-1))
    fetched_words = transactions * warp.words_per_segment
    return TrafficReport(
        total_transactions=int(transactions.sum()),
        per_iteration_mean=float(transactions.mean()),
        per_warp_max=int(transactions.max()),
        unnecessary_words=int((fetched_words - distinct_words).sum()),
    )


def rng_draws_per_iteration(kind: str) -> float:
    """Random draws consumed per particle per round; a second cost proxy.

    The transaction model alone cannot separate algorithms whose memory
    traffic matches but whose generator workload differs, so reports carry
    this number alongside the transaction counts.
    """
    return {"metropolis": 2.0, "c1": 2.0, "c2": 3.0, "megopolis": 1.0}[kind]
