import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from stackforecast.base import LengthMismatch, TooShort, ZeroTarget
from stackforecast.evaluation import (
    base_model_metrics,
    dm_matrix,
    dm_test,
    percentage_errors,
    summarize,
    variant_mape_distribution,
)


def test_percentage_errors():
    np.testing.assert_allclose(percentage_errors([100], [100]), [0.0])
    np.testing.assert_allclose(percentage_errors([100], [110]), [-10.0])
    np.testing.assert_allclose(percentage_errors([200, 100], [190, 110]), [5.0, -10.0])
    with pytest.raises(ZeroTarget):
        percentage_errors([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(LengthMismatch):
        percentage_errors([1.0], [1.0, 2.0])


def test_summarize_golden_values():
    report = summarize([200, 100], [190, 110])
    assert report.mape == pytest.approx(7.5, abs=1e-9)
    assert report.mdape == pytest.approx(7.5, abs=1e-9)
    assert report.mse == pytest.approx(100.0, abs=1e-9)
    assert report.mpe == pytest.approx(-2.5, abs=1e-9)
    assert report.stdpe == pytest.approx(10.606601717798213, abs=1e-9)
    assert report.count == 2


def test_summarize_perfect_and_single_point():
    report = summarize([5.0, 6.0], [5.0, 6.0])
    assert (report.mape, report.mdape, report.mse, report.mpe, report.stdpe) == (0, 0, 0, 0, 0)
    assert summarize([10.0], [9.0]).stdpe == 0.0


def test_summarize_properties():
    rng = np.random.default_rng(0)
    y = rng.uniform(50, 150, 40)
    f = y + rng.normal(0, 5, 40)
    report = summarize(y, f)
    assert report.mape == pytest.approx(np.mean(np.abs(percentage_errors(y, f))), abs=1e-12)
    assert report.mape >= abs(report.mpe)
    scaled = summarize(3 * y, 3 * f)
    assert scaled.mape == pytest.approx(report.mape)
    assert scaled.stdpe == pytest.approx(report.stdpe)
    assert scaled.mse == pytest.approx(9 * report.mse)


def dm_by_hand(ea, eb, horizon):
    d = [a * a - b * b for a, b in zip(ea, eb)]
    N = len(d)
    mean = sum(d) / N
    gammas = []
    for k in range(horizon):
        gammas.append(sum((d[t] - mean) * (d[t - k] - mean) for t in range(k, N)) / N)
    variance = gammas[0] + 2 * sum(gammas[1:])
    stat = mean / np.sqrt(variance / N)
    return stat, 2 * norm.sf(abs(stat))


@pytest.mark.parametrize("horizon", [1, 3])
def test_dm_matches_step_by_step(horizon):
    rng = np.random.default_rng(42)
    ea, eb = rng.normal(0, 1, 100), rng.normal(0, 2, 100)
    result = dm_test(ea, eb, horizon=horizon)
    stat, p = dm_by_hand(list(ea), list(eb), horizon)
    assert result.statistic == pytest.approx(stat, abs=1e-10)
    assert result.p_value == pytest.approx(p, abs=1e-10)


def test_dm_identical_errors():
    e = np.random.default_rng(1).normal(size=30)
    result = dm_test(e, e)
    assert (result.statistic, result.p_value, result.significant) == (0.0, 1.0, False)


def test_dm_antisymmetry():
    rng = np.random.default_rng(2)
    for _ in range(20):
        ea, eb = rng.normal(size=50), rng.normal(size=50)
        assert dm_test(ea, eb).statistic == -dm_test(eb, ea).statistic


def test_dm_sign_follows_dominance():
    e = np.random.default_rng(3).normal(size=50) + 0.1
    assert dm_test(e, 2 * e).statistic < 0
    assert dm_test(2 * e, e).statistic > 0


def test_dm_power_on_variance_ratio_four():
    rejections = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        if dm_test(rng.normal(0, 1, 100), rng.normal(0, 2, 100)).significant:
            rejections += 1
    assert rejections >= 90


def test_dm_preconditions():
    with pytest.raises(TooShort):
        dm_test(np.ones(5), np.zeros(5))
    with pytest.raises(LengthMismatch):
        dm_test(np.ones(12), np.zeros(11))


def test_dm_matrix_counts_significant_wins():
    rng = np.random.default_rng(5)
    series = [{"good": rng.normal(0, 1, 100), "bad": rng.normal(0, 3, 100)} for _ in range(3)]
    counts = dm_matrix(series, ["good", "bad"])
    assert counts.loc["good", "bad"] == 3
    assert counts.loc["bad", "good"] == 0
    assert counts.loc["good", "good"] == 0


def test_base_model_metrics_table():
    rows = np.array([[100.0, 90.0], [200.0, 220.0]])
    table = base_model_metrics(rows, [100.0, 200.0], ["exact", "off"])
    assert list(table["model"]) == ["exact", "off"]
    assert table.loc[0, "mape"] == 0.0
    assert table.loc[1, "mape"] == pytest.approx(10.0)


def test_variant_mape_distribution():
    frame = pd.DataFrame(
        {
            "learner": ["knn"] * 5 + ["mean"] * 5,
            "variant": ["k=40, b=0.05"] * 5 + ["-"] * 5,
            "mape": [1.0, 2.0, 3.0, 4.0, 5.0, 2.0, 2.0, 2.0, 2.0, 2.0],
        }
    )
    table = variant_mape_distribution(frame)
    assert list(table["learner"]) == ["knn", "mean"]
    assert list(table.iloc[0][["min", "q1", "median", "q3", "max"]]) == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert table.iloc[1]["median"] == 2.0
