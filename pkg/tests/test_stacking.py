import numpy as np
import pandas as pd
import pytest

from stackforecast import ExperimentConfig, StackingExperiment, best_variant, pick_test_points, run_experiment
from stackforecast.config import parse_config
from stackforecast._synth import SynthSpec, default_bank, gen_panel, gen_series
from stackforecast.base import EmptyWindow, ForecastPanel, RangeTooSmall, SeriesFrame, align_panel
from stackforecast.stacking import grid_cells, rolling_choice

FAST = dict(
    test_point_count=12,
    k_values=(40,),
    b_values=(0.05,),
    c_values=(24,),
    mlp_nodes=(1,),
    mlp_epochs=5,
    rf_trees=3,
    lstm_nodes=2,
    lstm_epochs=3,
)


def fast(**changes):
    return ExperimentConfig(**{**FAST, **changes})


def make_data(name="north", length=600, seed=0):
    spec = SynthSpec(name=name, length=length, seed=seed)
    series = gen_series(spec)
    return align_panel(series, gen_panel(series, default_bank(spec)))


@pytest.fixture(scope="module")
def two_series():
    return [make_data("north", seed=1), make_data("south", seed=2)]


@pytest.mark.parametrize(
    "start, end, count, expected",
    [(1, 5, 5, [1, 2, 3, 4, 5]), (1, 101, 3, [1, 51, 101]), (10, 10, 1, [10])],
)
def test_pick_test_points(start, end, count, expected):
    assert list(pick_test_points(start, end, count)) == expected


def test_pick_test_points_range_too_small():
    with pytest.raises(RangeTooSmall):
        pick_test_points(1, 3, 4)


def test_pick_test_points_are_distinct():
    points = pick_test_points(2101, 4200, 100)
    assert len(set(points)) == 100 and points[0] == 2101 and points[-1] == 4200


def test_default_grid_size():
    cells = grid_cells(ExperimentConfig())
    by_learner = pd.Series([c.learner for c in cells]).value_counts()
    assert by_learner["mean"] == 1 and by_learner["median"] == 1
    assert by_learner["lr"] == 13 and by_learner["rf"] == 13
    assert by_learner["knn"] == 39 and by_learner["mlp"] == 39
    assert by_learner["lstm"] == 15


def cell_frame(mapes, orders=None):
    orders = orders or list(range(len(mapes)))
    return pd.DataFrame(
        {
            "learner": ["knn"] * len(mapes),
            "variant": [f"v{i}" for i in range(len(mapes))],
            "cell": list(range(len(mapes))),
            "grid_order": orders,
            "learner_order": [0] * len(mapes),
            "mape": mapes,
        }
    )


def test_best_variant_takes_argmin():
    best = best_variant(cell_frame([1.6, 1.52, 1.55]))
    assert list(best["variant"]) == ["v1"]


def test_best_variant_tie_goes_to_smaller_grid_values():
    best = best_variant(cell_frame([1.5, 1.5], orders=[1, 0]))
    assert list(best["variant"]) == ["v1"]


def test_mean_learner_reproduces_row_mean():
    data = make_data()
    config = ExperimentConfig(learners=("mean",), test_point_count=1, k_values=(40,))
    result = run_experiment([data], config)
    row = result.forecasts.iloc[0]
    trimmed = data.trim_warmup()
    assert row["forecast"] == pytest.approx(trimmed.query(int(row["t"])).mean())
    assert row["target"] == trimmed.target(int(row["t"]))
    assert len(result.metrics) == 1


def test_no_training_index_reaches_the_query(two_series):
    seen = []
    config = fast(test_point_count=3)
    StackingExperiment(config=config, access_hook=lambda s, t, idx: seen.append((s, t, idx.copy()))).run(two_series)
    assert seen
    for _, t, indices in seen:
        assert indices.max() <= t - config.horizon
        assert indices.min() >= 1


def test_global_only_grid_shares_training_sets(two_series):
    seen = {}
    config = ExperimentConfig(
        learners=("lr", "knn", "mlp", "rf"),
        k_values=(),
        b_values=(0.05,),
        mlp_nodes=(1,),
        test_point_count=2,
        mlp_epochs=2,
        rf_trees=1,
    )

    def hook(series, t, indices):
        seen.setdefault((series, t), []).append(tuple(indices))

    run_experiment(two_series, config, access_hook=hook)
    for (series, t), sets in seen.items():
        assert len(sets) == 4
        assert all(s == tuple(range(1, t)) for s in sets)


def test_deterministic_learners_ignore_seed(two_series):
    runs = [
        run_experiment(two_series, fast(learners=("mean", "median", "lr", "knn"), seed=s))
        for s in (1, 2)
    ]
    pd.testing.assert_frame_equal(runs[0].forecasts, runs[1].forecasts)


def test_results_do_not_depend_on_jobs(two_series):
    config = fast()
    serial = StackingExperiment(config=config, jobs=1).run(two_series)
    parallel = StackingExperiment(config=config, jobs=2).run(two_series)
    pd.testing.assert_frame_equal(serial.forecasts, parallel.forecasts)
    pd.testing.assert_frame_equal(serial.metrics, parallel.metrics)


def test_report_tables_have_expected_shapes(two_series):
    config = fast()
    result = run_experiment(two_series, config)
    learners = list(config.learners)
    assert result.per_series_mape.shape == (2, len(learners))
    assert list(result.metrics["learner"]) == learners
    assert list(result.dm_matrix.index) == learners
    assert (result.ranking.sum(axis=1) == 2).all()
    extrapolation = result.extrapolation.set_index("learner")
    assert extrapolation.loc["mean", "n1"] == 0 and extrapolation.loc["median", "n1"] == 0
    assert (extrapolation["n2"] <= extrapolation["n1"]).all()
    assert len(result.head_to_head) == len(learners) * (len(learners) - 1)
    assert set(result.base_metrics["series"]) == {"north", "south"}
    assert len(result.forecasts) == 2 * 12 * len(result.cells)
    assert len(result.variant_mape) == len(result.cells)


def test_per_series_selection_picks_one_cell_per_series(two_series):
    config = fast(learners=("knn",), per_series_selection=True, b_values=(0.03, 0.07))
    result = run_experiment(two_series, config)
    assert list(result.best["series"]) == ["north", "south"]


def test_dm_matrix_left_empty_with_few_points(two_series):
    config = ExperimentConfig(learners=("mean", "median"), test_point_count=4, k_values=(40,))
    result = run_experiment(two_series, config)
    assert result.dm_matrix.isna().all().all()


def test_errors_carry_task_context():
    rng = np.random.default_rng(0)
    series = SeriesFrame.hourly(rng.uniform(90, 110, 200), name="tiny")
    panel = ForecastPanel(("a", "b"), rng.uniform(90, 110, (200, 2)))
    config = ExperimentConfig(learners=("lstm",), test_point_count=3, test_start_fraction=0.0, lstm_nodes=2, lstm_epochs=1)
    with pytest.raises(EmptyWindow, match=r"series='tiny', t=2, learner=lstm"):
        run_experiment([align_panel(series, panel)], config)


def test_rolling_choice_ignores_the_point_being_chosen_for():
    targets = np.full(6, 100.0)
    exact_then_wild = np.array([100.0, 100.0, 100.0, 100.0, 200.0, 100.0])
    steady = np.array([110.0, 110.0, 110.0, 110.0, 100.0, 100.0])
    picks = rolling_choice([targets], [np.column_stack([exact_then_wild, steady])])
    # point 4 is chosen from points 0..3 only, where the first cell is exact
    assert list(picks) == [0, 0, 0, 0, 0, 1]


def test_rolling_choice_is_unchanged_by_later_errors():
    rng = np.random.default_rng(21)
    targets = [rng.uniform(90, 110, 30), rng.uniform(90, 110, 30)]
    forecasts = [rng.uniform(80, 120, (30, 5)), rng.uniform(80, 120, (30, 5))]
    picks = rolling_choice(targets, forecasts, "mdape")
    for j in (0, 7, 19):
        shaken = [f.copy() for f in forecasts]
        for f in shaken:
            f[j:] = rng.uniform(0, 500, f[j:].shape)
        assert list(rolling_choice(targets, shaken, "mdape")[: j + 1]) == list(picks[: j + 1])


def test_rolling_validation_run_matches_rolling_choice(two_series):
    config = fast(learners=("knn",), b_values=(0.03, 0.07), rolling_validation=True)
    result = run_experiment(two_series, config)
    assert list(result.metrics["variant"]) == ["rolling"]
    variants = [c.variant for c in sorted(result.cells, key=lambda c: c.grid_key)]
    tables = {
        name: frame.pivot(index="t", columns="variant", values="forecast")[variants]
        for name, frame in result.forecasts.groupby("series", sort=False)
    }
    targets = {
        name: frame.groupby("t")["target"].first().to_numpy()
        for name, frame in result.forecasts.groupby("series", sort=False)
    }
    picks = rolling_choice([targets[n] for n in tables], [tables[n].to_numpy() for n in tables])
    for name, table in tables.items():
        chosen = table.to_numpy()[np.arange(len(picks)), picks]
        mape = float(np.mean(np.abs(100.0 * (targets[name] - chosen) / targets[name])))
        assert result.per_series_mape.loc[name, "knn"] == pytest.approx(mape)


@pytest.mark.slow
def test_meta_learners_beat_mean_and_median_at_desk_scale():
    config = parse_config(
        "",
        profile="desk",
        learners=("mean", "median", "lr", "knn", "mlp", "rf", "lstm"),
        mlp_nodes=(3,),
        mlp_epochs=30,
        lstm_epochs=30,
    )
    rows = []
    for seed in range(20):
        data = make_data(f"desk_{seed}", length=26 * 168, seed=seed)
        assert data.panel.n_models == 8
        result = StackingExperiment(config).run([data])
        mape = result.metrics.set_index("learner")["mape"]
        cells = result.cell_metrics
        rf_global = cells[(cells["learner"] == "rf") & (cells["variant"] == "global")]["mape"]
        rows.append({**mape.to_dict(), "rf_global": float(rf_global.iloc[0])})
    table = pd.DataFrame.from_records(rows)

    assert (table["rf_global"] < table["mean"]).mean() >= 0.7
    assert (table["knn"] < table["mean"]).mean() >= 0.7
    median = table.median()
    below = [m for m in ("lr", "knn", "mlp", "rf", "lstm") if median[m] < min(median["mean"], median["median"])]
    assert len(below) >= 3, median.to_dict()
