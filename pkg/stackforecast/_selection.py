"""Training-window selectors: which past time indices feed the meta-model at ``t``."""

from typing import Optional

import numpy as np

from ._utils import as_query, logger
from .base import AlignedData, EmptyPool, EmptyWindow, SeasonShorterThanHorizon, SelectorSpec, TrainingSet


def select_global(t: int, h: int = 1) -> np.ndarray:
    if t - h < 1:
        raise EmptyWindow(f"global window for t={t}, h={h} is empty")
    return np.arange(1, t - h + 1, dtype=np.int64)


def select_knn_local(query, candidates: TrainingSet, k: int) -> np.ndarray:
    """Indices of the k candidates closest to the query (Euclidean), ascending.

    Equal distances are resolved in favour of the earlier time index.
    """
    if len(candidates) == 0:
        raise EmptyPool("no candidate patterns to select neighbours from")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    distances = np.linalg.norm(candidates.patterns - as_query(query), axis=1)
    order = np.lexsort((candidates.indices, distances))[:k]
    return np.sort(candidates.indices[order])


def select_recent_v1(t: int, h: int, c: int) -> np.ndarray:
    first = t - h - c + 1
    if first < 1:
        raise EmptyWindow(f"recent window of {c} points ending at {t - h} starts before index 1")
    return np.arange(first, t - h + 1, dtype=np.int64)


def select_seasonal(t: int, s: int, c: int, h: int = 1) -> np.ndarray:
    """Same-phase lags ``{t - c*s, ..., t - s}``."""
    if s < h:
        raise SeasonShorterThanHorizon(f"seasonal period {s} is shorter than the horizon {h}")
    if t - c * s < 1:
        raise EmptyWindow(f"seasonal window t={t}, s={s}, c={c} reaches index {t - c * s}")
    return t - s * np.arange(c, 0, -1, dtype=np.int64)


def feasible_count(spec: SelectorSpec, t: int) -> int:
    """Largest window size that fits before ``t``; 0 when none does."""
    if spec.kind == "recent_v1":
        return max(0, t - spec.h)
    if spec.kind == "seasonal_v2":
        return max(0, (t - 1) // spec.s1)
    if spec.kind == "seasonal_v3":
        return max(0, (t - 1) // spec.s2)
    return max(0, t - spec.h)


def build_training_set(
    spec: SelectorSpec,
    data: AlignedData,
    t: int,
    pool: Optional[TrainingSet] = None,
) -> TrainingSet:
    """Materialise the training set a selector picks for the query at ``t``.

    ``pool`` may carry a precomputed global set to avoid rebuilding it per cell.
    """
    if spec.kind == "recent_v1":
        indices = select_recent_v1(t, spec.h, spec.c)
    elif spec.kind == "seasonal_v2":
        indices = select_seasonal(t, spec.s1, spec.c, spec.h)
    elif spec.kind == "seasonal_v3":
        indices = select_seasonal(t, spec.s2, spec.c, spec.h)
    else:
        if pool is None:
            pool = data.training_set(select_global(t, spec.h), t, spec.h)
        if spec.kind == "global":
            return pool
        indices = select_knn_local(data.query(t), pool, spec.k)
        logger.debug(f"[Selection] t={t}: kept {len(indices)} of {len(pool)} nearest patterns")
        return pool.subset(indices)
    return data.training_set(indices, t, spec.h)
