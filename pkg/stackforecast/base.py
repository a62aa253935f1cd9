"""Domain types shared by every stage of the stacking pipeline.

Time indices are 1-based: index ``t`` addresses row ``t - 1`` of the arrays, so
the training-window formulas can be written exactly as ``{1, ..., t - h}``.
"""

from dataclasses import dataclass, field
from typing import Any, Literal, Mapping, Optional, Sequence

import numpy as np

from ._utils import as_query, readonly

HOUR = np.timedelta64(1, "h")


# Errors ---------------------------------------------------------------------------
class DataError(ValueError):
    """Input data violates a precondition (CLI exit code 3)."""


class ConfigError(ValueError):
    """Configuration or spec file is invalid (CLI exit code 2)."""


class InvariantViolation(RuntimeError):
    """An internal contract was broken (CLI exit code 4)."""


class LengthMismatch(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class NonHourlyTimestamps(DataError):
    pass


class EmptyQuery(DataError):
    pass


class EmptyWindow(DataError):
    pass


class EmptyPool(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class ZeroTarget(DataError):
    pass


class TooShort(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class RangeTooSmall(DataError):
    pass


class SeasonShorterThanHorizon(DataError):
    """A same-phase lag would fall inside the forecast horizon."""


class SpecParseError(ConfigError):
    pass


class LeakageError(InvariantViolation):
    """A training set reached past ``t - h`` for a query at ``t``."""


# Types ----------------------------------------------------------------------------
def _check_hourly(timestamps: np.ndarray) -> None:
    if len(timestamps) < 2:
        return
    steps = np.diff(timestamps)
    bad = np.flatnonzero(steps != HOUR)
    if len(bad):
        i = int(bad[0])
        raise NonHourlyTimestamps(
            f"timestamps must advance by exactly one hour: row {i + 1} {timestamps[i]} -> row {i + 2} {timestamps[i + 1]}"
        )


def _as_timestamps(timestamps: Any) -> np.ndarray:
    out = np.array(timestamps, dtype="datetime64[s]", copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SeriesFrame:
    timestamps: np.ndarray
    values: np.ndarray
    name: str = "series"

    def __post_init__(self):
        timestamps = _as_timestamps(self.timestamps)
        values = readonly(self.values)
        if values.ndim != 1 or len(values) < 1:
            raise DataError(f"series {self.name!r} must be a non-empty 1-D sequence")
        if len(timestamps) != len(values):
            raise LengthMismatch(
                f"series {self.name!r}: {len(timestamps)} timestamps for {len(values)} values"
            )
        if not np.all(np.isfinite(values)):
            row = int(np.flatnonzero(~np.isfinite(values))[0]) + 1
            raise NonFiniteValue(f"series {self.name!r}: non-finite target at row {row}")
        _check_hourly(timestamps)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def hourly(cls, values: Sequence[float], start: str = "2018-01-01T00:00", name: str = "series") -> "SeriesFrame":
        stamps = np.datetime64(start, "s") + np.arange(len(values)) * HOUR
        return cls(timestamps=stamps, values=values, name=name)


@dataclass(frozen=True)
class ForecastPanel:
    model_names: tuple
    matrix: np.ndarray
    timestamps: Optional[np.ndarray] = None
    # leading rows whose lagged forecasts are not fully defined
    warmup: int = 0

    def __post_init__(self):
        names = tuple(str(n) for n in self.model_names)
        matrix = readonly(self.matrix)
        if matrix.ndim != 2:
            raise DataError("panel matrix must be two-dimensional (T x n)")
        if len(names) < 1:
            raise DataError("panel needs at least one base model")
        if len(set(names)) != len(names):
            raise DataError(f"panel model names must be distinct: {names}")
        if matrix.shape[1] != len(names):
            raise LengthMismatch(
                f"panel has {matrix.shape[1]} columns but {len(names)} model names"
            )
        if not np.all(np.isfinite(matrix)):
            row, col = (int(v) for v in np.argwhere(~np.isfinite(matrix))[0])
            raise NonFiniteValue(f"panel entry for {names[col]!r} at row {row + 1} is not finite")
        if self.timestamps is not None:
            timestamps = _as_timestamps(self.timestamps)
            if len(timestamps) != matrix.shape[0]:
                raise LengthMismatch(
                    f"panel has {len(timestamps)} timestamps for {matrix.shape[0]} rows"
                )
            _check_hourly(timestamps)
            object.__setattr__(self, "timestamps", timestamps)
        if not 0 <= self.warmup <= matrix.shape[0]:
            raise DataError(f"warm-up of {self.warmup} rows exceeds panel length {matrix.shape[0]}")
        object.__setattr__(self, "model_names", names)
        object.__setattr__(self, "matrix", matrix)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_models(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class SelectorSpec:
    kind: Literal["global", "knn_local", "recent_v1", "seasonal_v2", "seasonal_v3"] = "global"
    k: int = 1
    c: int = 1
    s1: int = 24
    s2: int = 168
    h: int = 1

    def __post_init__(self):
        if self.kind not in ("global", "knn_local", "recent_v1", "seasonal_v2", "seasonal_v3"):
            raise ConfigError(f"unknown selector kind {self.kind!r}")
        for name in ("k", "c", "s1", "h"):
            if getattr(self, name) < 1:
                raise ConfigError(f"selector {name} must be >= 1, got {getattr(self, name)}")
        if self.s2 < self.s1 or self.s2 % self.s1:
            raise ConfigError(f"s2={self.s2} must be a positive multiple of s1={self.s1}")


@dataclass(frozen=True)
class TrainingSet:
    indices: np.ndarray
    patterns: np.ndarray
    targets: np.ndarray
    query_time: Optional[int] = None
    horizon: int = 1

    def __post_init__(self):
        indices = readonly(self.indices, dtype=np.int64)
        patterns = readonly(self.patterns)
        targets = readonly(self.targets)
        if patterns.ndim != 2 or len(patterns) != len(targets) or len(indices) != len(targets):
            raise LengthMismatch(
                f"training set sizes disagree: {len(indices)} indices, {len(patterns)} patterns, {len(targets)} targets"
            )
        if len(indices) > 1 and np.any(np.diff(indices) <= 0):
            raise InvariantViolation("training indices must be strictly increasing")
        if self.query_time is not None and len(indices) and indices[-1] > self.query_time - self.horizon:
            raise LeakageError(
                f"training index {int(indices[-1])} is later than t - h = {self.query_time - self.horizon}"
            )
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return len(self.targets)

    @classmethod
    def from_arrays(cls, patterns: Any, targets: Any) -> "TrainingSet":
        """Training set indexed 1..N, for callers that have no time axis."""
        targets = np.asarray(targets, dtype=float).reshape(-1)
        patterns = np.asarray(patterns, dtype=float).reshape(len(targets), -1)
        return cls(indices=np.arange(1, len(targets) + 1), patterns=patterns, targets=targets)

    def subset(self, indices: Sequence[int]) -> "TrainingSet":
        """Restrict to the given time indices (which must belong to this set)."""
        positions = np.searchsorted(self.indices, indices)
        return TrainingSet(
            indices=self.indices[positions],
            patterns=self.patterns[positions],
            targets=self.targets[positions],
            query_time=self.query_time,
            horizon=self.horizon,
        )


@dataclass(frozen=True)
class MetaModel:
    kind: str
    params: Any
    fitted_at: Optional[int] = None
    hyperparams: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AlignedData:
    """A validated (series, panel) pair addressed with 1-based time indices."""

    series: SeriesFrame
    panel: ForecastPanel

    @property
    def name(self) -> str:
        return self.series.name

    def __len__(self) -> int:
        return len(self.series)

    def query(self, t: int) -> np.ndarray:
        return self.panel.matrix[t - 1]

    def target(self, t: int) -> float:
        return float(self.series.values[t - 1])

    def training_set(self, indices: Sequence[int], t: int, h: int = 1) -> TrainingSet:
        idx = np.asarray(indices, dtype=np.int64)
        if len(idx) and (idx[0] < 1 or idx[-1] > len(self)):
            raise InvariantViolation(f"indices {int(idx[0])}..{int(idx[-1])} outside 1..{len(self)}")
        return TrainingSet(
            indices=idx,
            patterns=self.panel.matrix[idx - 1],
            targets=self.series.values[idx - 1],
            query_time=t,
            horizon=h,
        )

    def trim_warmup(self) -> "AlignedData":
        w = self.panel.warmup
        if w == 0:
            return self
        series = SeriesFrame(self.series.timestamps[w:], self.series.values[w:], name=self.series.name)
        panel = ForecastPanel(
            model_names=self.panel.model_names,
            matrix=self.panel.matrix[w:],
            timestamps=None if self.panel.timestamps is None else self.panel.timestamps[w:],
        )
        return AlignedData(series, panel)


# Operations -----------------------------------------------------------------------
def align_panel(series: SeriesFrame, panel: ForecastPanel) -> AlignedData:
    if len(series) != len(panel):
        raise LengthMismatch(
            f"series {series.name!r} has {len(series)} rows but its panel has {len(panel)}"
        )
    if panel.timestamps is not None and not np.array_equal(series.timestamps, panel.timestamps):
        row = int(np.flatnonzero(series.timestamps != panel.timestamps)[0]) + 1
        raise LengthMismatch(f"series {series.name!r} and panel timestamps differ at row {row}")
    return AlignedData(series=series, panel=panel)


def z_interval(query: Any) -> tuple[float, float]:
    """Range spanned by the base forecasts of one query pattern."""
    q = as_query(query)
    if q.size == 0:
        raise EmptyQuery("query pattern is empty")
    if not np.all(np.isfinite(q)):
        raise NonFiniteValue("query pattern contains non-finite forecasts")
    return float(q.min()), float(q.max())
