"""Diebold-Mariano test of equal predictive accuracy under squared-error loss."""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import norm

from ..base import LengthMismatch, TooShort

MIN_LENGTH = 10


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_value: float
    significant: bool


def dm_test(errors_a, errors_b, horizon: int = 1, alpha: float = 0.05) -> DmResult:
    """Negative statistics mean model ``a`` has the smaller squared errors.

    The long-run variance sums autocovariances at lags 0..horizon-1 with
    rectangular weights; a non-positive estimate falls back to the lag-0 term.
    """
    ea = np.asarray(errors_a, dtype=float).reshape(-1)
    eb = np.asarray(errors_b, dtype=float).reshape(-1)
    if len(ea) != len(eb):
        raise LengthMismatch(f"error series lengths differ: {len(ea)} vs {len(eb)}")
    N = len(ea)
    if N < MIN_LENGTH:
        raise TooShort(f"Diebold-Mariano needs at least {MIN_LENGTH} errors, got {N}")
    d = ea**2 - eb**2
    mean = float(np.mean(d))
    if not np.any(d):
        return DmResult(statistic=0.0, p_value=1.0, significant=False)
    dev = d - mean
    gamma = [float(np.dot(dev[k:], dev[: N - k])) / N for k in range(max(1, horizon))]
    variance = gamma[0] + 2.0 * sum(gamma[1:])
    if variance <= 0:
        variance = gamma[0]
    if variance <= 0:
        # constant non-zero differential
        statistic = float(np.copysign(np.inf, mean))
        p_value = 0.0
    else:
        statistic = mean / np.sqrt(variance / N)
        p_value = float(2.0 * norm.sf(abs(statistic)))
    return DmResult(statistic=float(statistic), p_value=p_value, significant=p_value < alpha)


def dm_matrix(
    errors_by_series: Sequence[Mapping[str, np.ndarray]],
    models: Sequence[str],
    horizon: int = 1,
    alpha: float = 0.05,
) -> pd.DataFrame:
    """Count, per ordered pair, the series where the row model is significantly more accurate."""
    counts = pd.DataFrame(0, index=list(models), columns=list(models), dtype=int)
    for errors in errors_by_series:
        for a in models:
            for b in models:
                if a == b:
                    continue
                result = dm_test(errors[a], errors[b], horizon=horizon, alpha=alpha)
                if result.significant and result.statistic < 0:
                    counts.loc[a, b] += 1
    return counts
