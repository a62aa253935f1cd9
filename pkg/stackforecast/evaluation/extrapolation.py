"""How often a combiner leaves the range spanned by the base forecasts."""

from dataclasses import dataclass

import numpy as np

from ..base import LengthMismatch


@dataclass(frozen=True)
class ExtrapolationCounts:
    # forecasts outside the base-forecast interval
    n1: int
    # ... where the target lies outside on the same side
    n2: int
    # ... where the forecast beats the median combiner
    n3: int


def _check(panels, *series) -> tuple[np.ndarray, ...]:
    rows = np.asarray(panels, dtype=float)
    arrays = [np.asarray(s, dtype=float).reshape(-1) for s in series]
    if rows.ndim != 2 or any(len(a) != rows.shape[0] for a in arrays):
        raise LengthMismatch("forecasts, panel rows and targets must be aligned")
    return (rows, *arrays)


def _sides(rows: np.ndarray, forecasts: np.ndarray):
    low, high = rows.min(axis=1), rows.max(axis=1)
    return low, high, forecasts < low, forecasts > high


def extrapolation_counts(meta_forecasts, panels, targets, reference_forecasts) -> ExtrapolationCounts:
    rows, f, y, ref = _check(panels, meta_forecasts, targets, reference_forecasts)
    low, high, below, above = _sides(rows, f)
    outside = below | above
    same_side = (below & (y < low)) | (above & (y > high))
    closer = np.abs(f - y) < np.abs(ref - y)
    return ExtrapolationCounts(
        n1=int(outside.sum()),
        n2=int(same_side.sum()),
        n3=int((outside & closer).sum()),
    )


def head_to_head_on_extrapolations(forecasts_a, forecasts_b, panels, targets) -> tuple[int, int]:
    """Among the cases where ``a`` leaves the interval, how often ``a`` beats ``b``."""
    rows, fa, fb, y = _check(panels, forecasts_a, forecasts_b, targets)
    _, _, below, above = _sides(rows, fa)
    outside = below | above
    wins = outside & (np.abs(fa - y) < np.abs(fb - y))
    return int(outside.sum()), int(wins.sum())
