"""Command line: ``stackforecast {synth,run,importance}``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from . import __version__
from ._storage import (
    PANEL_PREFIX,
    SERIES_PREFIX,
    importance_chart,
    output_lock,
    read_data_dir,
    variant_boxplot,
    write_frame,
    write_panel_csv,
    write_series_csv,
)
from ._synth import gen_panel, gen_series
from ._utils import logger
from .base import ConfigError, DataError, InvariantViolation, align_panel
from .config import PRESETS, load_config, parse_synth_spec, render_config, settings
from .importance import mrmr_scores, rrelieff_scores
from .stacking import RunResult, StackingExperiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INVARIANT = 4

INTERNAL_COLUMNS = ["cell", "grid_order", "learner_order"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="experiment config, or the synthetic spec for `synth`")
    common.add_argument("--data", type=Path, default=None, help="directory holding panel_<name>.csv files")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, default=None, help="overrides the seed from the config file")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--profile", choices=sorted(PRESETS), default=None)
    common.add_argument("--svg", action="store_true", help="also emit SVG charts")

    parser = argparse.ArgumentParser(prog="stackforecast", description="Meta-learning forecast combination")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="generate synthetic series and base-forecast panels")
    sub.add_parser("run", parents=[common], help="run the stacking experiment and write reports")
    sub.add_parser("importance", parents=[common], help="rank base models by MRMR and RReliefF")
    return parser


def _profile(args) -> str:
    return args.profile or settings.profile


def _data_dir(args) -> Path:
    return args.data if args.data is not None else settings.data_root


def cmd_synth(args) -> int:
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read spec {args.config}: {e}") from e
        specs = parse_synth_spec(text, source=str(args.config), seed=args.seed)
    else:
        specs = parse_synth_spec("", seed=args.seed)
    with output_lock(args.out) as out:
        for spec, bank in specs:
            series = gen_series(spec)
            data = align_panel(series, gen_panel(series, bank)).trim_warmup()
            write_series_csv(data.series, out / f"{SERIES_PREFIX}{spec.name}.csv")
            write_panel_csv(data, out / f"{PANEL_PREFIX}{spec.name}.csv")
            logger.info(f"[Synth] wrote {spec.name!r}: {len(data)} rows x {data.panel.n_models} base models")
    return EXIT_OK


def write_reports(result: RunResult, config, out: Path, svg: bool = False) -> list[Path]:
    names = list(result.per_series_mape.index)
    written = [
        write_frame(result.metrics, out / "metrics.csv"),
        write_frame(result.per_series_mape, out / "per_series_mape.csv", index=True),
        write_frame(result.dm_matrix, out / "dm_matrix.csv", index=True),
        write_frame(result.ranking, out / "ranking.csv", index=True),
        write_frame(result.extrapolation, out / "extrapolation.csv"),
        write_frame(result.head_to_head, out / "extrapolation_head_to_head.csv"),
        write_frame(result.base_metrics, out / "base_metrics.csv"),
        write_frame(result.variant_mape, out / "variant_mape.csv"),
        write_frame(result.best.drop(columns=INTERNAL_COLUMNS), out / "best_variants.csv"),
        write_frame(result.forecasts, out / "forecasts.csv"),
    ]
    manifest = out / "manifest.txt"
    manifest.write_text(
        f"# stackforecast {__version__}\n"
        f"# series: {', '.join(names)}\n"
        f"{render_config(config)}",
        encoding="utf-8",
        newline="\n",
    )
    written.append(manifest)
    if svg:
        written.append(variant_boxplot(result.variant_mape, out / "variant_mape.svg"))
    return written


def cmd_run(args) -> int:
    config = load_config(args.config, profile=_profile(args), seed=args.seed)
    series_set = read_data_dir(_data_dir(args))
    jobs = args.jobs if args.jobs is not None else settings.jobs
    result = StackingExperiment(config=config, jobs=jobs).run(series_set)
    with output_lock(args.out) as out:
        written = write_reports(result, config, out, svg=args.svg)
    logger.info(f"[Experiment] wrote {len(written)} report files to {args.out}")
    return EXIT_OK


def importance_table(data, bins: int, neighbors: int) -> pd.DataFrame:
    mrmr = mrmr_scores(data.panel, data.series.values, bins=bins)
    relief = rrelieff_scores(data.panel, data.series.values, k=neighbors)
    return pd.DataFrame(
        {
            "mrmr_model": [name for name, _ in mrmr],
            "mrmr_score": [score for _, score in mrmr],
            "rrelieff_model": [name for name, _ in relief],
            "rrelieff_score": [score for _, score in relief],
        }
    )


def cmd_importance(args) -> int:
    config = load_config(args.config, profile=_profile(args), seed=args.seed)
    series_set = [data.trim_warmup() for data in read_data_dir(_data_dir(args))]
    with output_lock(args.out) as out:
        for data in series_set:
            table = importance_table(data, config.importance_bins, config.importance_neighbors)
            write_frame(table, out / f"importance_{data.name}.csv")
            if args.svg:
                importance_chart(table, out / f"importance_{data.name}.svg", title=data.name)
            logger.info(f"[Importance] {data.name!r}: top model {table['mrmr_model'].iloc[0]!r} by MRMR")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "run": cmd_run, "importance": cmd_importance}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"config error: {e}")
        return EXIT_CONFIG
    except (DataError, OSError) as e:
        logger.error(f"data error: {e}")
        return EXIT_DATA
    except InvariantViolation as e:
        logger.error(f"invariant violated: {e}")
        return EXIT_INVARIANT
