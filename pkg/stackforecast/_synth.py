"""Synthetic triple-seasonal load series and a bank of simple base forecasters."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ._utils import derive_seed, logger
from .base import ForecastPanel, SeriesFrame, SeriesTooShort

DAY = 24
WEEK = 168
YEAR = 8760
# leading rows excluded from experiments (longest seasonal lag)
WARMUP_HOURS = WEEK


class SynthSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "synthetic"
    length: int = Field(default=26 * WEEK, ge=2 * WEEK)
    level: float = 1000.0
    daily_amp: float = Field(default=150.0, ge=0)
    weekly_amp: float = Field(default=80.0, ge=0)
    yearly_amp: float = Field(default=100.0, ge=0)
    noise_sd: float = Field(default=10.0, ge=0)
    seed: int = 0
    start: str = "2018-01-01T00:00"


class BaseModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    kind: Literal["seasonal_naive_24", "seasonal_naive_168", "moving_average", "noisy_oracle"]
    bias: float = 0.0
    noise_sd: float = Field(default=0.0, ge=0)
    # None: derived from the series seed and the model position, see seed_bank
    seed: Optional[int] = None


class BaseBankSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    models: tuple[BaseModelSpec, ...] = Field(min_length=2)

    @field_validator("models")
    @classmethod
    def _distinct_names(cls, models):
        names = [m.name for m in models]
        if len(set(names)) != len(names):
            raise ValueError(f"base model names must be distinct: {names}")
        return models


def default_bank(spec: SynthSpec) -> BaseBankSpec:
    """Two seasonal naives, a daily moving average and five noisy oracles.

    Oracle biases are -3, -1, 0, +1, +3 % of the level with noise of 1..5 % of it.
    """
    models = [
        BaseModelSpec(name="naive_24", kind="seasonal_naive_24"),
        BaseModelSpec(name="naive_168", kind="seasonal_naive_168"),
        BaseModelSpec(name="moving_avg_24", kind="moving_average"),
    ]
    for i, pct in enumerate((-3, -1, 0, 1, 3)):
        models.append(
            BaseModelSpec(
                name=f"oracle_{i + 1}",
                kind="noisy_oracle",
                bias=pct / 100 * spec.level,
                noise_sd=(i + 1) / 100 * spec.level,
                seed=derive_seed(spec.seed, i + 1),
            )
        )
    return BaseBankSpec(models=tuple(models))


def seed_bank(spec: SynthSpec, bank: BaseBankSpec) -> BaseBankSpec:
    """Give every model without a seed one derived from the series seed and its position."""
    models = tuple(
        m if m.seed is not None else m.model_copy(update={"seed": derive_seed(spec.seed, position + 1)})
        for position, m in enumerate(bank.models)
    )
    return BaseBankSpec(models=models)


def gen_series(spec: SynthSpec) -> SeriesFrame:
    t = np.arange(1, spec.length + 1, dtype=float)
    values = (
        spec.level
        + spec.daily_amp * np.sin(2 * np.pi * t / DAY)
        + spec.weekly_amp * np.sin(2 * np.pi * t / WEEK)
        + spec.yearly_amp * np.sin(2 * np.pi * t / YEAR)
    )
    if spec.noise_sd > 0:
        values = values + np.random.default_rng(spec.seed).normal(0.0, spec.noise_sd, spec.length)
    values = np.maximum(values, 0.01 * spec.level)
    logger.info(f"[Synth] generated series {spec.name!r} with {spec.length} hourly points")
    return SeriesFrame.hourly(values, start=spec.start, name=spec.name)


def _seasonal_naive(y: np.ndarray, lag: int) -> np.ndarray:
    out = np.empty_like(y)
    out[lag:] = y[:-lag]
    # no lag available yet: carry the first observation
    out[:lag] = y[0]
    return out


def _moving_average(y: np.ndarray, window: int = DAY) -> np.ndarray:
    csum = np.concatenate([[0.0], np.cumsum(y)])
    out = np.empty_like(y)
    out[0] = y[0]
    i = np.arange(1, len(y))
    lo = np.maximum(i - window, 0)
    out[1:] = (csum[i] - csum[lo]) / (i - lo)
    return out


def gen_panel(series: SeriesFrame, bank: BaseBankSpec) -> ForecastPanel:
    y = series.values
    if len(y) <= WARMUP_HOURS:
        raise SeriesTooShort(
            f"series {series.name!r} has {len(y)} points; need more than the {WARMUP_HOURS}-hour warm-up"
        )
    columns = []
    for position, model in enumerate(bank.models):
        if model.kind == "seasonal_naive_24":
            col = _seasonal_naive(y, DAY)
        elif model.kind == "seasonal_naive_168":
            col = _seasonal_naive(y, WEEK)
        elif model.kind == "moving_average":
            col = _moving_average(y)
        else:
            col = y + model.bias
            if model.noise_sd > 0:
                seed = derive_seed(0, position + 1) if model.seed is None else model.seed
                col = col + np.random.default_rng(seed).normal(0.0, model.noise_sd, len(y))
        columns.append(col)
    return ForecastPanel(
        model_names=tuple(m.name for m in bank.models),
        matrix=np.column_stack(columns),
        timestamps=series.timestamps,
        warmup=WARMUP_HOURS,
    )
