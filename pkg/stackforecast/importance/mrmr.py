"""Minimum-redundancy maximum-relevance ranking of base models (difference scheme)."""

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import mutual_info_score

from .._utils import logger
from ..base import DataError, ForecastPanel, LengthMismatch, TooShort

MIN_POINTS = 20


def equal_frequency_bins(values: np.ndarray, bins: int = 10) -> np.ndarray:
    """Bin codes 0..bins-1 holding roughly equal counts; tied values share a bin."""
    ranks = rankdata(values, method="min") - 1
    return (ranks * bins // len(values)).astype(np.int64)


def mutual_information(codes_a: np.ndarray, codes_b: np.ndarray) -> float:
    """Plug-in mutual information (nats) of two discrete code sequences."""
    return float(mutual_info_score(codes_a, codes_b))


def mrmr_scores(panel: ForecastPanel, targets, bins: int = 10) -> list[tuple[str, float]]:
    """Greedy forward selection; each model's score is recorded at its selection step.

    Score = I(x; y) - mean_{s in selected} I(x; s). Constant columns carry no
    information: they score 0 and are appended last.
    """
    X = panel.matrix
    y = np.asarray(targets, dtype=float).reshape(-1)
    if len(y) != X.shape[0]:
        raise LengthMismatch(f"{len(y)} targets for a panel of {X.shape[0]} rows")
    if len(y) < MIN_POINTS:
        raise TooShort(f"MRMR needs at least {MIN_POINTS} points, got {len(y)}")
    if X.shape[1] < 2:
        raise DataError("MRMR needs at least two base models")

    names = list(panel.model_names)
    codes = [equal_frequency_bins(X[:, j], bins) for j in range(len(names))]
    y_codes = equal_frequency_bins(y, bins)
    constant = [j for j in range(len(names)) if np.ptp(X[:, j]) == 0]
    if constant:
        logger.debug(f"[Importance] constant columns {[names[j] for j in constant]} scored 0")
    remaining = [j for j in range(len(names)) if j not in constant]
    relevance = {j: mutual_information(codes[j], y_codes) for j in remaining}
    redundancy = {j: 0.0 for j in remaining}

    ranking = []
    while remaining:
        count = len(ranking)
        scores = {j: relevance[j] - (redundancy[j] / count if count else 0.0) for j in remaining}
        # ties go to the model name so the result does not depend on column order
        chosen = min(remaining, key=lambda j: (-scores[j], names[j]))
        ranking.append((names[chosen], float(scores[chosen])))
        remaining.remove(chosen)
        for j in remaining:
            redundancy[j] += mutual_information(codes[j], codes[chosen])
    ranking.extend((names[j], 0.0) for j in sorted(constant, key=lambda j: names[j]))
    return ranking
