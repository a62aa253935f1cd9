"""Per-task operations: fit and forecast every grid cell for one (series, test point)."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._learners import (
    combine_mean,
    combine_median,
    knn_weights,
    lr_fit,
    lstm_fit,
    lstm_predict,
    mlp_fit,
    mlp_predict,
    rf_fit,
    rf_predict,
)
from ._selection import build_training_set, feasible_count, select_global
from ._utils import derive_seed, logger
from .base import (
    AlignedData,
    DataError,
    EmptyWindow,
    InvariantViolation,
    MetaModel,
    SelectorSpec,
    TrainingSet,
)
from .config import ExperimentConfig

AccessHook = Callable[[str, int, np.ndarray], None]

VARIANT_LABELS = {"recent_v1": "v1", "seasonal_v2": "v2", "seasonal_v3": "v3"}
SELECTOR_ORDER = ("none", "global", "knn_local", "recent_v1", "seasonal_v2", "seasonal_v3")


@dataclass(frozen=True)
class Cell:
    """One learner at one point of its hyperparameter grid.

    ``k`` is the kNN-local pool size for lr/mlp/rf and the neighbour count for
    knn; ``None`` means all N_t available points.
    """

    learner: str
    selector: str = "none"
    k: Optional[int] = None
    c: Optional[int] = None
    b: Optional[float] = None
    nodes: Optional[int] = None

    @property
    def variant(self) -> str:
        if self.learner in ("mean", "median"):
            return "-"
        if self.learner == "lstm":
            return f"{VARIANT_LABELS[self.selector]}, c={self.c}"
        parts = ["global" if self.k is None else f"k={self.k}"]
        if self.b is not None:
            parts.append(f"b={self.b:g}")
        if self.nodes is not None:
            parts.append(f"nodes={self.nodes}")
        return ", ".join(parts)

    @property
    def grid_key(self) -> tuple:
        """Orders cells by grid values, smallest first; all-points k sorts last."""
        return (
            np.inf if self.k is None else self.k,
            self.c or 0,
            self.b or 0.0,
            self.nodes or 0,
            SELECTOR_ORDER.index(self.selector),
        )


@dataclass(frozen=True)
class TaskResult:
    series: str
    t: int
    target: float
    query: np.ndarray
    forecasts: tuple
    models: Optional[tuple] = None


def _window_spec(cell: Cell, t: int, config: ExperimentConfig) -> SelectorSpec:
    h = config.horizon
    if cell.selector in VARIANT_LABELS:
        spec = SelectorSpec(kind=cell.selector, c=cell.c, s1=config.s1, s2=config.s2, h=h)
        feasible = feasible_count(spec, t)
        if feasible < 1:
            raise EmptyWindow(f"no {VARIANT_LABELS[cell.selector]} window fits before t={t}")
        if feasible < cell.c:
            logger.debug(f"[Experiment] t={t}: {cell.variant} clamped to c={feasible}")
            spec = SelectorSpec(kind=cell.selector, c=feasible, s1=config.s1, s2=config.s2, h=h)
        return spec
    if cell.selector == "knn_local":
        return SelectorSpec(kind="knn_local", k=min(cell.k, t - h), h=h)
    return SelectorSpec(kind="global", h=h)


def _fit_and_forecast(
    cell: Cell, train: Optional[TrainingSet], query: np.ndarray, t: int, seed: int, config: ExperimentConfig
) -> tuple[float, MetaModel]:
    hyper = {"variant": cell.variant}
    if cell.learner == "mean":
        return combine_mean(query), MetaModel("mean", None, t, hyper)
    if cell.learner == "median":
        return combine_median(query), MetaModel("median", None, t, hyper)
    if cell.learner == "lr":
        coeffs = lr_fit(train)
        return coeffs.predict(query), MetaModel("lr", coeffs, t, hyper)
    if cell.learner == "knn":
        k = len(train) if cell.k is None else cell.k
        nearest, weights, knn_config = knn_weights(train, query, k, cell.b)
        return float(weights @ train.targets[nearest]), MetaModel("knn", knn_config, t, hyper)
    if cell.learner == "mlp":
        model = mlp_fit(train, cell.nodes, epochs=config.mlp_epochs, alpha=config.mlp_alpha, seed=seed)
        return mlp_predict(model, query), MetaModel("mlp", model, t, hyper)
    if cell.learner == "rf":
        n = train.patterns.shape[1]
        r = None if config.rf_features is None else min(config.rf_features, n)
        forest = rf_fit(train, p=config.rf_trees, q=config.rf_min_leaf, r=r, seed=seed)
        return rf_predict(forest, query), MetaModel("rf", forest, t, hyper)
    if cell.learner == "lstm":
        model = lstm_fit(train, m=config.lstm_nodes, epochs=config.lstm_epochs, seed=seed, step=config.lstm_step)
        # the state is warmed on the same window the model was trained on
        return lstm_predict(model, train.patterns, query), MetaModel("lstm", model, t, hyper)
    raise InvariantViolation(f"unknown learner {cell.learner!r}")


def forecast_test_point(
    data: AlignedData,
    series_index: int,
    t: int,
    cells: tuple,
    config: ExperimentConfig,
    access_hook: Optional[AccessHook] = None,
    keep_models: bool = False,
) -> TaskResult:
    """Retrain every cell on data up to ``t - h`` and forecast ``y_t``.

    Each cell draws its seed from (experiment seed, series, t, cell position), so
    the result does not depend on which worker runs the task.
    """
    h = config.horizon
    query = data.query(t)
    pool = data.training_set(select_global(t, h), t, h)
    windows: dict[SelectorSpec, TrainingSet] = {}
    forecasts, models = [], []
    for position, cell in enumerate(cells):
        try:
            train = None
            if cell.selector != "none":
                spec = _window_spec(cell, t, config)
                if spec not in windows:
                    windows[spec] = build_training_set(spec, data, t, pool=pool)
                train = windows[spec]
                if access_hook is not None:
                    access_hook(data.name, t, train.indices)
            seed = derive_seed(config.seed, series_index, t, position)
            forecast, model = _fit_and_forecast(cell, train, query, t, seed, config)
        except (DataError, InvariantViolation) as e:
            raise type(e)(f"{e} [series={data.name!r}, t={t}, learner={cell.learner}, {cell.variant}]") from e
        forecasts.append(forecast)
        if keep_models:
            models.append(model)
    return TaskResult(
        series=data.name,
        t=t,
        target=data.target(t),
        query=query,
        forecasts=tuple(forecasts),
        models=tuple(models) if keep_models else None,
    )
