from dataclasses import dataclass

import numpy as np

from .._utils import as_query, logger
from ..base import EmptyTrainingSet, TrainingSet


@dataclass(frozen=True)
class KnnConfig:
    k: int
    b: float
    sigma: float


def knn_bandwidth(distances: np.ndarray, b: float) -> float:
    """sigma = b * median(d), falling back to the mean distance, then to 1."""
    med = float(np.median(distances))
    if med > 0:
        return b * med
    mean = float(np.mean(distances))
    logger.debug(f"[kNN] median query distance is 0, falling back to mean={mean}")
    return b * (mean if mean > 0 else 1.0)


def knn_weights(train: TrainingSet, query, k: int, b: float) -> tuple[np.ndarray, np.ndarray, KnnConfig]:
    """Positions of the k nearest patterns and their normalised Gaussian weights."""
    if len(train) == 0:
        raise EmptyTrainingSet("kNN combiner needs at least one training pair")
    if b <= 0:
        raise ValueError(f"bandwidth multiplier b must be > 0, got {b}")
    k = min(max(int(k), 1), len(train))
    distances = np.linalg.norm(train.patterns - as_query(query), axis=1)
    sigma = knn_bandwidth(distances, b)
    nearest = np.lexsort((train.indices, distances))[:k]
    sq = distances[nearest] ** 2
    # shifting by the smallest squared distance cancels in the ratio and keeps
    # the nearest weight at exp(0) = 1, so the sum never underflows
    weights = np.exp(-(sq - sq.min()) / sigma**2)
    return nearest, weights / weights.sum(), KnnConfig(k=k, b=float(b), sigma=sigma)


def knn_combine(train: TrainingSet, query, k: int, b: float) -> float:
    nearest, weights, _ = knn_weights(train, query, k, b)
    return float(weights @ train.targets[nearest])
