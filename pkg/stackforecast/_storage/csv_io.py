"""Panel and report CSV files: ``timestamp,y,<model1>,...`` with 17 significant digits."""

from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .._utils import FLOAT_FORMAT, logger
from ..base import AlignedData, DataError, ForecastPanel, SeriesFrame, align_panel

PANEL_PREFIX = "panel_"
SERIES_PREFIX = "series_"


def _timestamp_strings(timestamps: np.ndarray) -> np.ndarray:
    return np.datetime_as_string(np.asarray(timestamps, dtype="datetime64[s]"), unit="s")


def write_frame(frame: pd.DataFrame, path: Path, index: bool = False) -> Path:
    path = Path(path)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    logger.debug(f"wrote {path} ({len(frame)} rows)")
    return path


def write_series_csv(series: SeriesFrame, path: Path) -> Path:
    frame = pd.DataFrame({"timestamp": _timestamp_strings(series.timestamps), "y": series.values})
    return write_frame(frame, path)


def write_panel_csv(data: AlignedData, path: Path) -> Path:
    frame = pd.DataFrame({"timestamp": _timestamp_strings(data.series.timestamps), "y": data.series.values})
    for j, name in enumerate(data.panel.model_names):
        frame[name] = data.panel.matrix[:, j]
    return write_frame(frame, path)


def _numeric_column(frame: pd.DataFrame, column: str, path: Path) -> np.ndarray:
    values = frame[column]
    # file line = data row + 2 (header is line 1)
    if not pd.api.types.is_numeric_dtype(values):
        parsed = pd.to_numeric(values, errors="coerce")
        bad = np.flatnonzero(parsed.isna().to_numpy())
        if len(bad) == 0:
            return parsed.to_numpy(dtype=float)
        raise DataError(f"{path}:{int(bad[0]) + 2}: column {column!r} holds non-numeric value {values.iloc[bad[0]]!r}")
    if values.isna().any():
        row = int(np.flatnonzero(values.isna().to_numpy())[0])
        raise DataError(f"{path}:{row + 2}: missing value in column {column!r}")
    return values.to_numpy(dtype=float)


def read_panel_csv(path: Path, name: Optional[str] = None) -> AlignedData:
    """Load one series and its base forecasts; the series name defaults to the file stem."""
    path = Path(path)
    if name is None:
        name = path.stem[len(PANEL_PREFIX):] if path.stem.startswith(PANEL_PREFIX) else path.stem
    try:
        frame = pd.read_csv(path, float_precision="round_trip", encoding="utf-8")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: cannot parse panel CSV: {e}") from e
    columns = list(frame.columns)
    if len(columns) < 3 or columns[:2] != ["timestamp", "y"]:
        raise DataError(f"{path}:1: header must be 'timestamp,y,<model>,...', got {','.join(map(str, columns))!r}")
    if frame["timestamp"].isna().any():
        row = int(np.flatnonzero(frame["timestamp"].isna().to_numpy())[0])
        raise DataError(f"{path}:{row + 2}: missing timestamp")
    try:
        stamps = pd.to_datetime(frame["timestamp"], format="ISO8601").to_numpy(dtype="datetime64[s]")
    except (ValueError, TypeError) as e:
        raise DataError(f"{path}: timestamps are not ISO-8601: {e}") from e
    y = _numeric_column(frame, "y", path)
    models = columns[2:]
    matrix = np.column_stack([_numeric_column(frame, c, path) for c in models])
    try:
        series = SeriesFrame(timestamps=stamps, values=y, name=name)
        panel = ForecastPanel(model_names=tuple(models), matrix=matrix, timestamps=stamps)
        return align_panel(series, panel)
    except DataError as e:
        raise type(e)(f"{path}: {e}") from e


def read_data_dir(directory: Path) -> list[AlignedData]:
    """Every ``panel_<name>.csv`` in ``directory``, ordered by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"data directory {directory} does not exist")
    paths = sorted(directory.glob(f"{PANEL_PREFIX}*.csv"))
    if not paths:
        raise DataError(f"no {PANEL_PREFIX}<name>.csv files in {directory}")
    return [read_panel_csv(p) for p in paths]
