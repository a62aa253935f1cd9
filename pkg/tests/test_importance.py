import numpy as np
import pytest

from stackforecast.base import ForecastPanel, TooShort
from stackforecast.importance import RReliefF, equal_frequency_bins, mrmr_scores, mutual_information, rrelieff_scores


def planted_panel(seed, T=500, n=5):
    rng = np.random.default_rng(seed)
    y = rng.uniform(100, 200, T)
    columns = [y + rng.normal(0, 0.01 * y.std(), T)]
    columns += [rng.uniform(100, 200, T) for _ in range(n - 1)]
    return ForecastPanel(tuple(f"m{j}" for j in range(n)), np.column_stack(columns)), y


def brute_mutual_information(a, b):
    total = 0.0
    N = len(a)
    for va in np.unique(a):
        for vb in np.unique(b):
            joint = np.sum((a == va) & (b == vb)) / N
            if joint > 0:
                total += joint * np.log(joint / (np.mean(a == va) * np.mean(b == vb)))
    return total


def brute_rrelieff(X, y, k):
    T, n = X.shape
    span = X.max(axis=0) - X.min(axis=0)
    Xn = (X - X.min(axis=0)) / np.where(span > 0, span, 1)
    yn = (y - y.min()) / (y.max() - y.min())
    n_dc, n_da, n_dcda = 0.0, np.zeros(n), np.zeros(n)
    for i in range(T):
        others = [j for j in range(T) if not (np.array_equal(Xn[j], Xn[i]) and y[j] == y[i])]
        others.sort(key=lambda j: (np.linalg.norm(Xn[j] - Xn[i]), j))
        for j in others[:k]:
            w = 1.0 / len(others[:k])
            dy = abs(yn[j] - yn[i])
            da = np.abs(Xn[j] - Xn[i])
            n_dc += w * dy
            n_da += w * da
            n_dcda += w * dy * da
    return np.where(span > 0, n_dcda / n_dc - (n_da - n_dcda) / (T - n_dc), 0.0)


def test_equal_frequency_bins():
    codes = equal_frequency_bins(np.arange(100.0)[::-1], bins=10)
    assert np.all(np.bincount(codes) == 10)
    assert codes[0] == 9
    tied = equal_frequency_bins(np.array([1.0, 1.0, 1.0, 2.0]), bins=2)
    assert list(tied) == [0, 0, 0, 1]


def test_mutual_information_matches_counts():
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, 4, 200), rng.integers(0, 3, 200)
    assert mutual_information(a, b) == pytest.approx(brute_mutual_information(a, b), abs=1e-12)


def test_planted_model_ranks_first():
    mrmr_hits = relief_hits = 0
    for seed in range(100):
        panel, y = planted_panel(seed)
        mrmr_hits += mrmr_scores(panel, y)[0][0] == "m0"
        relief_hits += rrelieff_scores(panel, y, k=10)[0][0] == "m0"
    assert mrmr_hits >= 95
    assert relief_hits >= 95


def test_mrmr_constant_column_scores_zero_last():
    panel, y = planted_panel(1, T=100, n=3)
    matrix = np.column_stack([panel.matrix, np.full(100, 7.0)])
    scores = mrmr_scores(ForecastPanel(panel.model_names + ("flat",), matrix), y)
    assert scores[-1] == ("flat", 0.0)


def test_mrmr_ignores_column_order():
    panel, y = planted_panel(2, T=200, n=4)
    order = [2, 0, 3, 1]
    shuffled = ForecastPanel(tuple(panel.model_names[j] for j in order), panel.matrix[:, order])
    assert mrmr_scores(shuffled, y) == mrmr_scores(panel, y)


def test_two_model_panel_has_two_rows():
    panel, y = planted_panel(3, T=100, n=2)
    assert len(mrmr_scores(panel, y)) == 2
    assert len(rrelieff_scores(panel, y)) == 2


def test_mrmr_needs_enough_points():
    panel, y = planted_panel(4, T=10, n=3)
    with pytest.raises(TooShort):
        mrmr_scores(panel, y)


def test_rrelieff_matches_brute_force():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(40, 3))
    X[5] = X[6]
    y = X[:, 0] + rng.normal(0, 0.1, 40)
    y[5] = y[6]
    weights = RReliefF(n_neighbors=5).fit(X, y).weights_
    np.testing.assert_allclose(weights, brute_rrelieff(X, y, 5), atol=1e-12)


def test_rrelieff_invariant_to_duplicated_data():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 3))
    y = X[:, 1] + rng.normal(0, 0.2, 60)
    once = RReliefF(n_neighbors=4).fit(X, y).weights_
    twice = RReliefF(n_neighbors=8).fit(np.vstack([X, X]), np.concatenate([y, y])).weights_
    np.testing.assert_allclose(twice, once, atol=1e-12)


def test_rrelieff_degenerate_inputs():
    rng = np.random.default_rng(8)
    X = np.column_stack([rng.normal(size=30), np.ones(30)])
    y = X[:, 0] + rng.normal(0, 0.1, 30)
    weights = RReliefF(n_neighbors=5).fit(X, y).weights_
    assert weights[1] == 0.0
    flat = RReliefF(n_neighbors=5).fit(X, np.full(30, 3.0)).weights_
    assert np.all(flat == 0.0)
