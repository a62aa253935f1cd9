"""Process settings, experiment configuration and the `key = value` file format."""

import os
import typing
from pathlib import Path
from typing import Any, Literal, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ._synth import BaseBankSpec, BaseModelSpec, SynthSpec, default_bank, seed_bank
from .base import ConfigError, SpecParseError

load_dotenv()


class Settings:
    log_level: str = os.getenv("STACKFORECAST_LOG_LEVEL", "INFO")
    jobs: int = int(os.getenv("STACKFORECAST_JOBS", "1"))
    profile: str = os.getenv("STACKFORECAST_PROFILE", "desk")
    data_root: Path = Path(os.getenv("STACKFORECAST_DATA_ROOT", "./data"))


settings = Settings()

LEARNERS = ("mean", "median", "lr", "knn", "mlp", "rf", "lstm")
Learner = Literal["mean", "median", "lr", "knn", "mlp", "rf", "lstm"]


class ExperimentConfig(BaseModel):
    """Every knob of an experiment. Defaults reproduce the full-scale protocol."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # experiment
    horizon: int = Field(default=1, ge=1)
    test_point_count: int = Field(default=100, ge=1)
    test_start_fraction: float = Field(default=0.5, ge=0.0, lt=1.0)
    learners: tuple[Learner, ...] = Field(default=LEARNERS, min_length=1)
    seed: int = Field(default=0, ge=0)

    # grids; include_global adds the cell that trains on all N_t points
    k_values: tuple[int, ...] = (20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 250, 300)
    include_global: bool = True
    c_values: tuple[int, ...] = Field(default=(24, 48, 72, 168, 504), min_length=1)
    b_values: tuple[float, ...] = Field(default=(0.03, 0.05, 0.07), min_length=1)
    mlp_nodes: tuple[int, ...] = Field(default=(1, 3, 5), min_length=1)

    # selection
    selection_metric: Literal["mape", "mdape", "mse", "stdpe"] = "mape"
    per_series_selection: bool = False
    # pick each test point's cell from earlier test points only
    rolling_validation: bool = False
    s1: int = Field(default=24, ge=1)
    s2: int = Field(default=168, ge=1)

    # mlp
    mlp_epochs: int = Field(default=100, ge=1)
    mlp_alpha: float = Field(default=0.01, ge=0.0)

    # rf
    rf_trees: int = Field(default=100, ge=1)
    rf_min_leaf: int = Field(default=1, ge=1)
    rf_features: Optional[int] = Field(default=None, ge=1)

    # lstm
    lstm_nodes: int = Field(default=128, ge=1)
    lstm_epochs: int = Field(default=200, ge=1)
    lstm_step: float = Field(default=0.01, gt=0.0)

    # evaluation
    dm_alpha: float = Field(default=0.05, gt=0.0, lt=1.0)

    # importance
    importance_bins: int = Field(default=10, ge=2)
    importance_neighbors: int = Field(default=10, ge=1)

    @field_validator("learners")
    @classmethod
    def _distinct_learners(cls, learners):
        if len(set(learners)) != len(learners):
            raise ValueError(f"learners listed twice: {learners}")
        return learners

    @field_validator("k_values", "c_values", "mlp_nodes")
    @classmethod
    def _positive_sizes(cls, values):
        if any(v < 1 for v in values):
            raise ValueError(f"grid values must be >= 1, got {values}")
        return tuple(sorted(set(values)))

    @field_validator("b_values")
    @classmethod
    def _positive_bandwidths(cls, values):
        if any(v <= 0 for v in values):
            raise ValueError(f"bandwidth multipliers must be > 0, got {values}")
        return tuple(sorted(set(values)))

    @model_validator(mode="after")
    def _grids_not_empty(self):
        if not self.k_values and not self.include_global:
            raise ValueError("k_values is empty and include_global is off: no k grid left")
        if self.s2 < self.s1 or self.s2 % self.s1:
            raise ValueError(f"s2={self.s2} must be a multiple of s1={self.s1}")
        # the v2/v3 windows step back whole seasons, which must clear the horizon; s2 >= s1 covers v3
        if "lstm" in self.learners and self.horizon > self.s1:
            raise ValueError(f"horizon={self.horizon} exceeds s1={self.s1}, so the lstm seasonal windows would look ahead")
        return self


SECTIONS = {
    "experiment": ("horizon", "test_point_count", "test_start_fraction", "learners", "seed"),
    "grids": ("k_values", "include_global", "c_values", "b_values", "mlp_nodes"),
    "selection": ("selection_metric", "per_series_selection", "rolling_validation", "s1", "s2"),
    "mlp": ("mlp_epochs", "mlp_alpha"),
    "rf": ("rf_trees", "rf_min_leaf", "rf_features"),
    "lstm": ("lstm_nodes", "lstm_epochs", "lstm_step"),
    "evaluation": ("dm_alpha",),
    "importance": ("importance_bins", "importance_neighbors"),
}

PRESETS = {
    "full": {},
    "desk": {
        "test_point_count": 50,
        "k_values": (40,),
        "c_values": (24, 168),
        "b_values": (0.05,),
        "rf_trees": 50,
        "lstm_nodes": 8,
    },
}


# File format --------------------------------------------------------------------
def _scalar(token: str) -> Any:
    lowered = token.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            pass
    return token


def _is_sequence(annotation) -> bool:
    return typing.get_origin(annotation) is tuple


def _value(raw: str, model: type[BaseModel], key: str) -> Any:
    field = model.model_fields.get(key)
    many = field is not None and _is_sequence(field.annotation)
    if not raw:
        return () if many else None
    tokens = [t.strip() for t in raw.split(",")]
    if many:
        return tuple(_scalar(t) for t in tokens if t)
    if len(tokens) > 1:
        raise ValueError(f"{key} takes a single value, got {raw!r}")
    return _scalar(raw)


def parse_sections(text: str, source: str = "<config>") -> list[tuple[str, dict[str, tuple[str, int]]]]:
    """Split `[section]` / `key = value` text into ordered (section, {key: (raw, line)}) pairs."""
    sections: list[tuple[str, dict[str, tuple[str, int]]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise SpecParseError(f"{source}:{lineno}: malformed section header {stripped!r}")
            sections.append((" ".join(stripped[1:-1].split()), {}))
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise SpecParseError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        if not sections:
            raise SpecParseError(f"{source}:{lineno}: key {key!r} appears before any [section]")
        entries = sections[-1][1]
        if key in entries:
            raise SpecParseError(f"{source}:{lineno}: key {key!r} repeated (first on line {entries[key][1]})")
        entries[key] = (raw.strip(), lineno)
    return sections


def _validate(model: type[BaseModel], values: dict, lines: dict[str, int], source: str, **extra):
    try:
        return model(**values, **extra)
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else "?"
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigError(f"{where}: invalid value for {key!r}: {first['msg']}") from e


def _collect(
    entries: dict[str, tuple[str, int]], model: type[BaseModel], allowed, source: str
) -> tuple[dict, dict[str, int]]:
    values, lines = {}, {}
    for key, (raw, lineno) in entries.items():
        if key not in allowed:
            raise SpecParseError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _value(raw, model, key)
        except ValueError as e:
            raise SpecParseError(f"{source}:{lineno}: {e}") from e
        lines[key] = lineno
    return values, lines


def parse_config(text: str, profile: str = "full", source: str = "<config>", **overrides) -> ExperimentConfig:
    """Build an ExperimentConfig from a preset, then the file, then explicit overrides."""
    if profile not in PRESETS:
        raise ConfigError(f"unknown profile {profile!r}; choose one of {sorted(PRESETS)}")
    values = dict(PRESETS[profile])
    lines: dict[str, int] = {}
    for section, entries in parse_sections(text, source):
        if section not in SECTIONS:
            first_line = min((ln for _, ln in entries.values()), default=0)
            raise SpecParseError(f"{source}:{first_line}: unknown section [{section}]")
        found, found_lines = _collect(entries, ExperimentConfig, SECTIONS[section], source)
        values.update(found)
        lines.update(found_lines)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return _validate(ExperimentConfig, values, lines, source)


def load_config(path: Union[str, Path, None], profile: str = "full", **overrides) -> ExperimentConfig:
    if path is None:
        return parse_config("", profile=profile, **overrides)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, profile=profile, source=str(path), **overrides)


def _format(value: Any) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_config(config: ExperimentConfig) -> str:
    """Inverse of parse_config: every field under its section, in a fixed order."""
    out = []
    for section, keys in SECTIONS.items():
        out.append(f"[{section}]")
        out.extend(f"{key} = {_format(getattr(config, key))}" for key in keys)
        out.append("")
    return "\n".join(out)


# Synthetic-data specs -------------------------------------------------------------
SERIES_KEYS = tuple(k for k in SynthSpec.model_fields if k != "name")
MODEL_KEYS = tuple(k for k in BaseModelSpec.model_fields if k != "name")


def parse_synth_spec(
    text: str, source: str = "<spec>", seed: Optional[int] = None
) -> list[tuple[SynthSpec, BaseBankSpec]]:
    """`[series <name>]` sections define series; `[model <name>]` sections define the shared bank.

    Without model sections every series gets the default bank; without series
    sections one default series is generated. ``seed`` replaces every series seed.
    """
    series, models = [], []
    for section, entries in parse_sections(text, source):
        kind, _, name = section.partition(" ")
        first_line = min((ln for _, ln in entries.values()), default=0)
        if kind not in ("series", "model") or not name:
            raise SpecParseError(f"{source}:{first_line}: expected [series <name>] or [model <name>], got [{section}]")
        if kind == "series":
            values, lines = _collect(entries, SynthSpec, SERIES_KEYS, source)
            series.append(_validate(SynthSpec, values, lines, source, name=name))
        else:
            values, lines = _collect(entries, BaseModelSpec, MODEL_KEYS, source)
            models.append(_validate(BaseModelSpec, values, lines, source, name=name))
    if len({s.name for s in series}) != len(series):
        raise SpecParseError(f"{source}: series names must be distinct")
    if not series:
        series = [SynthSpec()]
    if seed is not None:
        series = [spec.model_copy(update={"seed": seed}) for spec in series]
    if models:
        try:
            bank = BaseBankSpec(models=tuple(models))
        except ValidationError as e:
            raise ConfigError(f"{source}: invalid model bank: {e.errors()[0]['msg']}") from e
        return [(spec, seed_bank(spec, bank)) for spec in series]
    return [(spec, default_bank(spec)) for spec in series]
