"""SVG charts. Output is byte-stable: fixed hash salt and no creation date."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "stackforecast"


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def importance_chart(scores: pd.DataFrame, path: Path, title: str = "") -> Path:
    """Horizontal bars per method, each ranked top-down by its own order.

    ``scores`` holds ``<method>_model`` / ``<method>_score`` column pairs.
    """
    fig, axes = plt.subplots(1, 2, figsize=(9, 0.35 * len(scores) + 1.5))
    for ax, method, label, color in (
        (axes[0], "mrmr", "MRMR", "tab:blue"),
        (axes[1], "rrelieff", "RReliefF", "tab:orange"),
    ):
        ax.barh(list(scores[f"{method}_model"])[::-1], list(scores[f"{method}_score"])[::-1], color=color)
        ax.set_title(label)
        ax.axvline(0.0, color="black", linewidth=0.5)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def variant_boxplot(distribution: pd.DataFrame, path: Path) -> Path:
    """Box per grid cell from precomputed five-number summaries of per-series MAPE."""
    stats = [
        {
            "label": f"{row.learner} {row.variant}" if row.variant != "-" else row.learner,
            "whislo": row.min,
            "q1": row.q1,
            "med": row.median,
            "q3": row.q3,
            "whishi": row.max,
            "fliers": [],
        }
        for row in distribution.itertuples(index=False)
    ]
    fig, ax = plt.subplots(figsize=(max(6, 0.3 * len(stats) + 2), 5))
    ax.bxp(stats, showfliers=False)
    ax.set_ylabel("MAPE [%]")
    ax.tick_params(axis="x", labelrotation=90, labelsize=6)
    fig.tight_layout()
    return _save(fig, path)
