from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from ..base import LengthMismatch, ZeroTarget


@dataclass(frozen=True)
class MetricsReport:
    mape: float
    mdape: float
    mse: float
    mpe: float
    stdpe: float
    count: int

    def as_row(self) -> dict:
        return asdict(self)


def _paired(targets, forecasts) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(targets, dtype=float).reshape(-1)
    f = np.asarray(forecasts, dtype=float).reshape(-1)
    if len(y) != len(f):
        raise LengthMismatch(f"{len(y)} targets against {len(f)} forecasts")
    return y, f


def percentage_errors(targets, forecasts) -> np.ndarray:
    """PE = 100 (y - yhat) / y; over-forecasts are negative."""
    y, f = _paired(targets, forecasts)
    if np.any(y == 0):
        raise ZeroTarget(f"target is zero at position {int(np.flatnonzero(y == 0)[0])}")
    return 100.0 * (y - f) / y


def summarize(targets, forecasts) -> MetricsReport:
    y, f = _paired(targets, forecasts)
    pe = percentage_errors(y, f)
    if len(pe) == 0:
        raise LengthMismatch("cannot summarise an empty forecast series")
    ape = np.abs(pe)
    return MetricsReport(
        mape=float(np.mean(ape)),
        mdape=float(np.median(ape)),
        mse=float(np.mean((y - f) ** 2)),
        mpe=float(np.mean(pe)),
        stdpe=float(np.std(pe, ddof=1)) if len(pe) > 1 else 0.0,
        count=len(pe),
    )


def base_model_metrics(rows: np.ndarray, targets, model_names) -> pd.DataFrame:
    """Quality metrics of every base model on the same evaluation points."""
    rows = np.asarray(rows, dtype=float)
    records = [
        {"model": name, **summarize(targets, rows[:, j]).as_row()}
        for j, name in enumerate(model_names)
    ]
    return pd.DataFrame.from_records(records)


def variant_mape_distribution(per_series: pd.DataFrame) -> pd.DataFrame:
    """Five-number summary of per-series MAPE for every (learner, variant) cell."""
    records = []
    for (learner, variant), group in per_series.groupby(["learner", "variant"], sort=False):
        q = np.percentile(group["mape"].to_numpy(dtype=float), [0, 25, 50, 75, 100])
        records.append(
            {"learner": learner, "variant": variant, "min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}
        )
    return pd.DataFrame.from_records(records, columns=["learner", "variant", "min", "q1", "median", "q3", "max"])
