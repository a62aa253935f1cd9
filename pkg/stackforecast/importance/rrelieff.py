"""RReliefF attribute weights for a regression target."""

from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator

from ..base import DataError, ForecastPanel, LengthMismatch


def _range_normalize(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    span = np.ptp(values, axis=0)
    safe = np.where(span > 0, span, 1.0)
    return (values - values.min(axis=0)) / safe, span > 0


class RReliefF(BaseEstimator):
    """scikit-learn style estimator; ``fit`` sets ``weights_`` (one per column).

    Args:
        n_neighbors (int): neighbours per sampled instance, uniformly weighted.
        m_samples (int | None): instances to sample; None uses all, in index order.
        random_state (int): seed for drawing ``m_samples`` instances.

    Exact duplicates of a sampled instance (same normalised pattern and target)
    are not counted as its neighbours.
    """

    def __init__(self, n_neighbors: int = 10, m_samples: Optional[int] = None, random_state: int = 0):
        self.n_neighbors = n_neighbors
        self.m_samples = m_samples
        self.random_state = random_state

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        T, n = X.shape
        if len(y) != T:
            raise LengthMismatch(f"{len(y)} targets for {T} instances")
        if not 1 <= self.n_neighbors < T:
            raise DataError(f"RReliefF needs 1 <= k < T, got k={self.n_neighbors}, T={T}")

        Xn, informative = _range_normalize(X)
        yn, y_varies = _range_normalize(y[:, None])
        yn = yn[:, 0]
        if not y_varies[0]:
            self.weights_ = np.zeros(n)
            return self

        if self.m_samples is None or self.m_samples >= T:
            sample = np.arange(T)
        else:
            rng = np.random.default_rng(self.random_state)
            sample = np.sort(rng.choice(T, size=self.m_samples, replace=False))
        m = len(sample)
        distances = cdist(Xn[sample], Xn)
        order_key = np.arange(T)

        d_c = np.zeros(m)
        d_a = np.zeros((m, n))
        d_ca = np.zeros((m, n))
        for row, i in enumerate(sample):
            duplicate = (distances[row] == 0) & (y == y[i])
            candidates = np.flatnonzero(~duplicate)
            if len(candidates) == 0:
                continue
            ranked = candidates[np.lexsort((order_key[candidates], distances[row, candidates]))]
            neighbours = ranked[: self.n_neighbors]
            weight = 1.0 / len(neighbours)
            diff_y = np.abs(yn[neighbours] - yn[i])
            diff_a = np.abs(Xn[neighbours] - Xn[i])
            d_c[row] = weight * diff_y.sum()
            d_a[row] = weight * diff_a.sum(axis=0)
            d_ca[row] = weight * (diff_y[:, None] * diff_a).sum(axis=0)

        n_dc = d_c.sum()
        n_da = d_a.sum(axis=0)
        n_dcda = d_ca.sum(axis=0)
        first = n_dcda / n_dc if n_dc > 0 else np.zeros(n)
        second = (n_da - n_dcda) / (m - n_dc) if m - n_dc > 0 else np.zeros(n)
        self.weights_ = np.where(informative, first - second, 0.0)
        return self


def rrelieff_scores(
    panel: ForecastPanel,
    targets,
    k: int = 10,
    m_samples: Optional[int] = None,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Base models by descending RReliefF weight (ties by name)."""
    estimator = RReliefF(n_neighbors=k, m_samples=m_samples, random_state=seed)
    weights = estimator.fit(panel.matrix, targets).weights_
    pairs = [(name, float(w)) for name, w in zip(panel.model_names, weights)]
    return sorted(pairs, key=lambda p: (-p[1], p[0]))
