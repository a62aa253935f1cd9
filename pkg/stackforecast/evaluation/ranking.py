import pandas as pd
from scipy.stats import rankdata


def rank_models(per_series_mape: pd.DataFrame) -> pd.DataFrame:
    """Tally how often each model takes each MAPE rank across series.

    Rows of ``per_series_mape`` are series and columns models. Tied models share
    the lower rank (competition ranking), so some positions may stay empty.
    """
    models = list(per_series_mape.columns)
    tallies = pd.DataFrame(
        0,
        index=pd.Index(models, name="model"),
        columns=[f"rank_{i}" for i in range(1, len(models) + 1)],
        dtype=int,
    )
    for _, row in per_series_mape.iterrows():
        ranks = rankdata(row.to_numpy(dtype=float), method="min").astype(int)
        for model, rank in zip(models, ranks):
            tallies.loc[model, f"rank_{rank}"] += 1
    return tallies
