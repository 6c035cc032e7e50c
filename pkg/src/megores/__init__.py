"""Deterministic data-parallel resampling algorithms and benchmark tools."""

from .metrics import (
    QualityAccumulator,
    QualityStats,
    RunTimings,
    quality_stats,
    rmse,
    squared_error,
)
from .pfilter import FilterConfig, generate_trajectory, run_filter
from .resample import (
    ALGORITHMS,
    METROPOLIS_FAMILY,
    PartitionConfig,
    WarpConfig,
    ancestors_to_offspring,
    apply_ancestors,
    make_resampler,
    megopolis,
    megopolis_index,
    metropolis,
    metropolis_c1,
    metropolis_c2,
    multinomial,
    systematic_improved,
    systematic_oracle,
)
from .warpsim import AccessTrace, TrafficReport, count_transactions, traffic_report
from .weights import (
    GammaWeightParams,
    GaussianWeightParams,
    IterationBudget,
    WeightVector,
    compute_iterations,
    estimate_ratio,
    gen_gamma_weights,
    gen_gaussian_weights,
    proposition_recurrence,
)

__all__ = [
    "ALGORITHMS",
    "METROPOLIS_FAMILY",
    "AccessTrace",
    "FilterConfig",
    "GammaWeightParams",
    "GaussianWeightParams",
    "IterationBudget",
    "PartitionConfig",
    "QualityAccumulator",
    "QualityStats",
    "RunTimings",
    "TrafficReport",
    "WarpConfig",
    "WeightVector",
    "ancestors_to_offspring",
    "apply_ancestors",
    "compute_iterations",
    "count_transactions",
    "estimate_ratio",
    "gen_gamma_weights",
    "gen_gaussian_weights",
    "generate_trajectory",
    "make_resampler",
    "megopolis",
    "megopolis_index",
    "metropolis",
    "metropolis_c1",
    "metropolis_c2",
    "multinomial",
    "proposition_recurrence",
    "quality_stats",
    "rmse",
    "run_filter",
    "squared_error",
    "systematic_improved",
    "systematic_oracle",
    "traffic_report",
]
