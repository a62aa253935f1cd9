from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ._learners import combine_median
from ._op import AccessHook, Cell, TaskResult, forecast_test_point
from ._utils import describe_params, logger
from .base import AlignedData, DataError, RangeTooSmall
from .config import ExperimentConfig
from .evaluation import (
    base_model_metrics,
    dm_matrix,
    extrapolation_counts,
    head_to_head_on_extrapolations,
    rank_models,
    summarize,
    variant_mape_distribution,
)
from .evaluation.significance import MIN_LENGTH as DM_MIN_LENGTH

METRIC_COLUMNS = ["mape", "mdape", "mse", "mpe", "stdpe", "count"]


def pick_test_points(start: int, end: int, count: int) -> np.ndarray:
    """``count`` indices spread evenly over ``[start, end]``, both ends included."""
    if count < 1 or end - start + 1 < count:
        raise RangeTooSmall(f"cannot pick {count} test points from [{start}, {end}]")
    if count == 1:
        return np.array([start], dtype=np.int64)
    j = np.arange(count)
    # np.round rounds halves to even, like the built-in round()
    return (start + np.round(j * (end - start) / (count - 1))).astype(np.int64)


def grid_cells(config: ExperimentConfig) -> tuple:
    """Every (learner, hyperparameter) cell the config asks for, in report order."""
    ks = [*config.k_values, *([None] if config.include_global else [])]
    cells = []
    for learner in config.learners:
        if learner in ("mean", "median"):
            cells.append(Cell(learner))
        elif learner == "lr":
            cells.extend(Cell("lr", "global" if k is None else "knn_local", k=k) for k in ks)
        elif learner == "knn":
            cells.extend(Cell("knn", "global", k=k, b=b) for k in ks for b in config.b_values)
        elif learner == "mlp":
            cells.extend(
                Cell("mlp", "global" if k is None else "knn_local", k=k, nodes=m) for k in ks for m in config.mlp_nodes
            )
        elif learner == "rf":
            cells.extend(Cell("rf", "global" if k is None else "knn_local", k=k) for k in ks)
        elif learner == "lstm":
            cells.extend(
                Cell("lstm", selector, c=c)
                for selector in ("recent_v1", "seasonal_v2", "seasonal_v3")
                for c in config.c_values
            )
    return tuple(cells)


def best_variant(cell_metrics: pd.DataFrame, selection_metric: str = "mape", per_series: bool = False) -> pd.DataFrame:
    """Per learner (and per series when asked) the cell with the lowest metric.

    ``cell_metrics`` needs the columns learner, variant, grid_order and the metric;
    ties go to the smallest grid values, i.e. the lowest grid_order.
    """
    if cell_metrics.empty:
        raise DataError("no cell results to choose from")
    groups = ["series", "learner"] if per_series else ["learner"]
    ranked = cell_metrics.sort_values([*groups, selection_metric, "grid_order"], kind="mergesort")
    best = ranked.groupby(groups, sort=False).head(1)
    order = ["series", "learner_order"] if per_series else ["learner_order"]
    return best.sort_values(order, kind="mergesort").reset_index(drop=True)


def rolling_choice(
    targets: Sequence[np.ndarray], forecasts: Sequence[np.ndarray], selection_metric: str = "mape"
) -> np.ndarray:
    """Column chosen at every test point from the errors of the points before it.

    ``targets[s]`` is (P,) and ``forecasts[s]`` is (P, C) for every series sharing
    the choice, rows in time order and columns in grid order. The first column
    wins ties and is taken at the first point, which has no history.
    """
    P, C = forecasts[0].shape
    picks = np.zeros(P, dtype=np.int64)
    for j in range(1, P):
        y = np.concatenate([t[:j] for t in targets])
        scores = [
            getattr(summarize(y, np.concatenate([f[:j, c] for f in forecasts])), selection_metric) for c in range(C)
        ]
        picks[j] = int(np.argmin(scores))
    return picks


@dataclass
class RunResult:
    cells: tuple
    forecasts: pd.DataFrame
    cell_metrics: pd.DataFrame
    series_cell_metrics: pd.DataFrame
    best: pd.DataFrame
    metrics: pd.DataFrame
    per_series_mape: pd.DataFrame
    dm_matrix: pd.DataFrame
    ranking: pd.DataFrame
    extrapolation: pd.DataFrame
    head_to_head: pd.DataFrame
    base_metrics: pd.DataFrame
    variant_mape: pd.DataFrame
    tasks: list = field(default_factory=list, repr=False)


@dataclass
class StackingExperiment:
    config: ExperimentConfig = field(default_factory=ExperimentConfig)
    # worker processes for the (series x test point) tasks
    jobs: int = 1
    # called with (series, t, indices) for every training set built
    access_hook: Optional[AccessHook] = None
    keep_models: bool = False

    def __post_init__(self):
        logger.debug(f"StackingExperiment init with param:\n\n  {describe_params(self.config)}\n")
        self.cells = grid_cells(self.config)
        self.learners = list(self.config.learners)
        logger.info(f"[Experiment] {len(self.cells)} grid cells over {len(self.learners)} learners")

    def test_points(self, data: AlignedData) -> np.ndarray:
        length = len(data)
        start = max(self.config.horizon + 1, int(np.floor(self.config.test_start_fraction * length)) + 1)
        return pick_test_points(start, length, self.config.test_point_count)

    def run(self, series_set: Sequence[AlignedData]) -> RunResult:
        series_set = [data.trim_warmup() for data in series_set]
        names = [data.name for data in series_set]
        if not series_set:
            raise DataError("no series to run on")
        if len(set(names)) != len(names):
            raise DataError(f"series names must be distinct: {names}")

        tasks = []
        for index, data in enumerate(series_set):
            points = self.test_points(data)
            logger.info(f"[Series] {data.name!r}: {len(points)} test points in [{points[0]}, {points[-1]}]")
            tasks.extend((index, data, int(t)) for t in points)

        # threads keep the access hook in this process
        prefer = "threads" if self.access_hook is not None else "processes"
        results = Parallel(n_jobs=self.jobs, prefer=prefer)(
            delayed(forecast_test_point)(
                data, index, t, self.cells, self.config, self.access_hook, self.keep_models
            )
            for index, data, t in tasks
        )
        logger.info(f"[Experiment] finished {len(results)} tasks")
        return self._aggregate(series_set, results)

    # Aggregation ----------------------------------------------------------------
    def _by_series(self, series_set, results: list[TaskResult]) -> dict:
        grouped = {data.name: [] for data in series_set}
        for result in results:
            grouped[result.series].append(result)
        out = {}
        for data in series_set:
            rows = grouped[data.name]
            out[data.name] = {
                "t": np.array([r.t for r in rows], dtype=np.int64),
                "targets": np.array([r.target for r in rows]),
                "queries": np.vstack([r.query for r in rows]),
                "forecasts": np.array([r.forecasts for r in rows], dtype=float),
                "timestamps": data.series.timestamps[np.array([r.t for r in rows]) - 1],
                "model_names": data.panel.model_names,
            }
        return out

    def _rolling_forecasts(self, by_series: dict, grid_order: dict) -> dict:
        """Per series and learner, the forecast of the cell chosen before each test point."""
        groups = [[n] for n in by_series] if self.config.per_series_selection else [list(by_series)]
        out = {n: {} for n in by_series}
        for learner in self.learners:
            columns = sorted((i for i, c in enumerate(self.cells) if c.learner == learner), key=grid_order.get)
            for group in groups:
                picks = rolling_choice(
                    [by_series[n]["targets"] for n in group],
                    [by_series[n]["forecasts"][:, columns] for n in group],
                    self.config.selection_metric,
                )
                for n in group:
                    rows = np.arange(len(picks))
                    out[n][learner] = by_series[n]["forecasts"][rows, np.asarray(columns)[picks]]
                logger.debug(f"[Experiment] {learner} rolling picks for {group}: {np.bincount(picks).tolist()}")
        return out

    def _aggregate(self, series_set, results: list[TaskResult]) -> RunResult:
        by_series = self._by_series(series_set, results)
        cells = self.cells
        learner_order = {name: i for i, name in enumerate(self.learners)}
        grid_order = {}
        for learner in self.learners:
            own = sorted((i for i, c in enumerate(cells) if c.learner == learner), key=lambda i: cells[i].grid_key)
            grid_order.update({i: rank for rank, i in enumerate(own)})

        def cell_columns(i):
            return {
                "learner": cells[i].learner,
                "variant": cells[i].variant,
                "cell": i,
                "grid_order": grid_order[i],
                "learner_order": learner_order[cells[i].learner],
            }

        forecast_rows, series_rows = [], []
        for name, block in by_series.items():
            for i in range(len(cells)):
                report = summarize(block["targets"], block["forecasts"][:, i])
                series_rows.append({"series": name, **cell_columns(i), **report.as_row()})
                for t, stamp, y, f in zip(block["t"], block["timestamps"], block["targets"], block["forecasts"][:, i]):
                    forecast_rows.append(
                        {"series": name, "t": int(t), "timestamp": str(stamp), "learner": cells[i].learner,
                         "variant": cells[i].variant, "forecast": float(f), "target": float(y)}
                    )
        forecasts = pd.DataFrame.from_records(forecast_rows)
        series_cell_metrics = pd.DataFrame.from_records(series_rows)

        all_targets = np.concatenate([b["targets"] for b in by_series.values()])
        cell_rows = []
        for i in range(len(cells)):
            pooled = np.concatenate([b["forecasts"][:, i] for b in by_series.values()])
            cell_rows.append({**cell_columns(i), **summarize(all_targets, pooled).as_row()})
        cell_metrics = pd.DataFrame.from_records(cell_rows)

        per_series = self.config.per_series_selection
        best = best_variant(
            series_cell_metrics if per_series else cell_metrics, self.config.selection_metric, per_series=per_series
        )
        if self.config.rolling_validation:
            best_forecasts = self._rolling_forecasts(by_series, grid_order)
            variant_of = {learner: "rolling" for learner in self.learners}
        else:
            chosen = {}
            for name in by_series:
                for _, row in best.iterrows():
                    if not per_series or row["series"] == name:
                        chosen[(name, row["learner"])] = int(row["cell"])
            best_forecasts = {
                n: {learner: b["forecasts"][:, chosen[(n, learner)]] for learner in self.learners}
                for n, b in by_series.items()
            }
            variant_of = {}
            for learner in self.learners:
                variants = {cells[chosen[(n, learner)]].variant for n in by_series}
                variant_of[learner] = variants.pop() if len(variants) == 1 else "per-series"

        metric_rows = []
        for learner in self.learners:
            pooled = np.concatenate([best_forecasts[n][learner] for n in by_series])
            metric_rows.append(
                {"learner": learner, "variant": variant_of[learner], **summarize(all_targets, pooled).as_row()}
            )
        metrics = pd.DataFrame.from_records(metric_rows, columns=["learner", "variant", *METRIC_COLUMNS])

        per_series_mape = pd.DataFrame(
            [
                [summarize(b["targets"], best_forecasts[n][learner]).mape for learner in self.learners]
                for n, b in by_series.items()
            ],
            index=pd.Index(list(by_series), name="series"),
            columns=self.learners,
        )

        errors = [{learner: b["targets"] - best_forecasts[n][learner] for learner in self.learners} for n, b in by_series.items()]
        n_points = min(len(b["targets"]) for b in by_series.values())
        if n_points < DM_MIN_LENGTH:
            logger.warning(
                f"[Experiment] Diebold-Mariano needs {DM_MIN_LENGTH} test points per series, got {n_points}; matrix left empty"
            )
            dm = pd.DataFrame(pd.NA, index=self.learners, columns=self.learners)
        else:
            dm = dm_matrix(errors, self.learners, horizon=self.config.horizon, alpha=self.config.dm_alpha)
        dm.index.name = "model"

        extrapolation_rows, h2h_rows = [], []
        medians = {n: np.array([combine_median(q) for q in b["queries"]]) for n, b in by_series.items()}
        for learner in self.learners:
            totals = np.zeros(3, dtype=np.int64)
            for n, b in by_series.items():
                counts = extrapolation_counts(best_forecasts[n][learner], b["queries"], b["targets"], medians[n])
                totals += (counts.n1, counts.n2, counts.n3)
            extrapolation_rows.append({"learner": learner, "n1": totals[0], "n2": totals[1], "n3": totals[2]})
            for other in self.learners:
                if other == learner:
                    continue
                n1 = wins = 0
                for n, b in by_series.items():
                    a_n1, a_wins = head_to_head_on_extrapolations(
                        best_forecasts[n][learner], best_forecasts[n][other], b["queries"], b["targets"]
                    )
                    n1, wins = n1 + a_n1, wins + a_wins
                h2h_rows.append({"learner": learner, "versus": other, "n1": n1, "wins": wins})

        base_frames = []
        for n, b in by_series.items():
            frame = base_model_metrics(b["queries"], b["targets"], b["model_names"])
            frame.insert(0, "series", n)
            base_frames.append(frame)

        return RunResult(
            cells=cells,
            forecasts=forecasts,
            cell_metrics=cell_metrics,
            series_cell_metrics=series_cell_metrics,
            best=best,
            metrics=metrics,
            per_series_mape=per_series_mape,
            dm_matrix=dm,
            ranking=rank_models(per_series_mape),
            extrapolation=pd.DataFrame.from_records(extrapolation_rows, columns=["learner", "n1", "n2", "n3"]),
            head_to_head=pd.DataFrame.from_records(h2h_rows, columns=["learner", "versus", "n1", "wins"]),
            base_metrics=pd.concat(base_frames, ignore_index=True),
            variant_mape=variant_mape_distribution(series_cell_metrics),
            tasks=results if self.keep_models else [],
        )


def run_experiment(
    series_set: Sequence[AlignedData],
    config: Optional[ExperimentConfig] = None,
    jobs: int = 1,
    access_hook: Optional[AccessHook] = None,
) -> RunResult:
    experiment = StackingExperiment(config=config or ExperimentConfig(), jobs=jobs, access_hook=access_hook)
    return experiment.run(series_set)
