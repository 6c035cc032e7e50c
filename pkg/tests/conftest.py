import numpy as np
import pytest

import megores as m
from megores.rng import derive_seed

QUALITY_N = 2**14
QUALITY_K = 32
QUALITY_SEQUENCES = 4
QUALITY_EPSILON = 0.01
QUALITY_ALGS = (("megopolis", None), ("metropolis", None), ("c1", 128), ("c2", 128))
QUALITY_YS = (0.0, 1.0, 2.0, 3.0, 4.0)


@pytest.fixture(scope="session")
def quality_grid():
    """Per-sequence QualityStats for the shared Gaussian-weight grid.

    Keyed by (algorithm, partition_bytes, y); each value is a list of
    QualityStats, one per weight sequence, each over QUALITY_K runs.
    """
    grid = {}
    weights = {}
    for yi, y in enumerate(QUALITY_YS):
        for s in range(QUALITY_SEQUENCES):
            w = m.gen_gaussian_weights(
                m.GaussianWeightParams(y, QUALITY_N), derive_seed(1001, yi, s), "double"
            )
            wd = np.asarray(w.values)
            b = m.compute_iterations(QUALITY_EPSILON, float(wd.mean()), float(wd.max())).b
            weights[(yi, s)] = (w, b)
    for ai, (name, part) in enumerate(QUALITY_ALGS):
        fn = m.make_resampler(name, partition_bytes=part)
        for yi, y in enumerate(QUALITY_YS):
            per_seq = []
            for s in range(QUALITY_SEQUENCES):
                w, b = weights[(yi, s)]
                acc = m.QualityAccumulator(QUALITY_N)
                for k in range(QUALITY_K):
                    anc = fn(w, b, derive_seed(2002, ai, yi, s, k))
                    acc.add(m.ancestors_to_offspring(anc, QUALITY_N), w)
                per_seq.append(acc.finalize())
            grid[(name, part, y)] = per_seq
    return grid


def grid_mean(per_seq, field):
    return float(np.mean([getattr(s, field) for s in per_seq]))


def grid_stderr(per_seq, field):
    vals = np.array([getattr(s, field) for s in per_seq], dtype=np.float64)
    return float(vals.std(ddof=1) / np.sqrt(len(vals)))
