"""Regression forest combiner: bagged CART trees over random feature subspaces."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .._utils import as_query, readonly
from ..base import EmptyTrainingSet, TrainingSet

LEAF = -1


@dataclass(frozen=True)
class RegressionTree:
    """Flat node arrays; node 0 is the root and ``feature == LEAF`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    def predict(self, query: np.ndarray) -> float:
        node = 0
        while self.feature[node] != LEAF:
            if query[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return float(self.value[node])

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature == LEAF)


@dataclass(frozen=True)
class Forest:
    p: int
    trees: tuple
    q: int
    r: int


def default_features_per_split(n: int) -> int:
    return max(1, int(round(n / 3)))


def _sse_table(xs: np.ndarray, ys: np.ndarray, q: int) -> np.ndarray:
    """Child SSE for every cut of every column; ``inf`` where the cut is not allowed.

    ``xs`` and ``ys`` are (N, F) with each column sorted by ``xs``. Row i of the
    result is the cut between sorted positions i and i + 1.
    """
    N = xs.shape[0]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys**2, axis=0)
    n_left = np.arange(1, N)[:, None]
    n_right = N - n_left
    # valid where the values differ and both sides keep q samples
    valid = (xs[1:] > xs[:-1]) & (n_left >= q) & (n_right >= q)
    left_sum, left_sq = csum[:-1], csq[:-1]
    right_sum, right_sq = csum[-1] - left_sum, csq[-1] - left_sq
    sse = (left_sq - left_sum**2 / n_left) + (right_sq - right_sum**2 / n_right)
    return np.where(valid, sse, np.inf)


def _column_splits(xs: np.ndarray, table: np.ndarray) -> list[Optional[tuple[float, float]]]:
    if table.shape[0] == 0:
        return [None] * xs.shape[1]
    # argmin keeps the lowest cutpoint among equal SSEs
    at = np.argmin(table, axis=0)
    cols = np.arange(table.shape[1])
    sse = table[at, cols]
    cuts = 0.5 * (xs[at, cols] + xs[at + 1, cols])
    return [(float(s), float(c)) if np.isfinite(s) else None for s, c in zip(sse, cuts)]


def best_split(x: np.ndarray, y: np.ndarray, q: int) -> Optional[tuple[float, float]]:
    """Lowest weighted child SSE over midpoint cutpoints of one feature.

    Returns ``(sse, cutpoint)`` or None when no cut leaves ``q`` samples per side.
    Ties keep the lower cutpoint.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order][:, None], y[order][:, None]
    return _column_splits(xs, _sse_table(xs, ys, q))[0]


def _node_split(X, y, sorted_rows, features, q) -> Optional[tuple[float, int, float]]:
    """Best ``(sse, feature, cut)`` over ``features`` for the rows in ``sorted_rows``."""
    rows = sorted_rows[:, features]
    xs = X[rows, features]
    splits = _column_splits(xs, _sse_table(xs, y[rows], q))
    found = [(s[0], int(f), s[1]) for f, s in zip(features, splits) if s is not None]
    return min(found) if found else None


def _grow_tree(X: np.ndarray, y: np.ndarray, q: int, r: int, rng: np.random.Generator) -> RegressionTree:
    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []

    def new_node(rows):
        feature.append(LEAF)
        threshold.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(np.mean(y[np.sort(rows)])))
        n_samples.append(len(rows))
        return len(feature) - 1

    N, n = X.shape
    # column f lists the node's rows in increasing X[:, f]; children inherit the order
    presorted = np.argsort(X, axis=0, kind="stable")
    goes_left = np.zeros(N, dtype=bool)
    stack = [(new_node(presorted[:, 0]), presorted)]
    while stack:
        node, sorted_rows = stack.pop()
        rows = sorted_rows[:, 0]
        if len(rows) < 2 * q or np.ptp(y[rows]) == 0:
            continue
        # r features first; if none of them can split, the first remaining one that can
        candidates = rng.permutation(n)
        best = _node_split(X, y, sorted_rows, candidates[:r], q)
        if best is None:
            for i in range(r, n):
                best = _node_split(X, y, sorted_rows, candidates[i : i + 1], q)
                if best is not None:
                    break
        if best is None:
            continue
        _, f, cut = best
        goes_left[rows] = X[rows, f] <= cut
        mask = goes_left[sorted_rows]
        left_sorted = sorted_rows.T[mask.T].reshape(n, -1).T
        right_sorted = sorted_rows.T[~mask.T].reshape(n, -1).T
        feature[node], threshold[node] = f, cut
        left[node] = new_node(left_sorted[:, 0])
        right[node] = new_node(right_sorted[:, 0])
        stack.append((right[node], right_sorted))
        stack.append((left[node], left_sorted))

    return RegressionTree(
        feature=readonly(feature, dtype=np.int64),
        threshold=readonly(threshold),
        left=readonly(left, dtype=np.int64),
        right=readonly(right, dtype=np.int64),
        value=readonly(value),
        n_samples=readonly(n_samples, dtype=np.int64),
    )


def rf_fit(
    train: TrainingSet,
    p: int = 100,
    q: int = 1,
    r: Optional[int] = None,
    seed: int = 0,
    bootstrap: bool = True,
) -> Forest:
    """Grow ``p`` trees; ``bootstrap=False`` fits every tree on the full set (test hook)."""
    if len(train) == 0:
        raise EmptyTrainingSet("random forest needs at least one training pair")
    n = train.patterns.shape[1]
    r = default_features_per_split(n) if r is None else int(r)
    if not 1 <= r <= n or q < 1 or p < 1:
        raise ValueError(f"invalid forest hyperparameters p={p}, q={q}, r={r} for n={n}")
    rng = np.random.default_rng(seed)
    N = len(train)
    trees = []
    for _ in range(p):
        rows = rng.integers(0, N, size=N) if bootstrap else np.arange(N)
        trees.append(_grow_tree(train.patterns[rows], train.targets[rows], q, r, rng))
    return Forest(p=p, trees=tuple(trees), q=q, r=r)


def rf_predict(forest: Forest, query) -> float:
    x = as_query(query)
    return float(np.mean([tree.predict(x) for tree in forest.trees]))
