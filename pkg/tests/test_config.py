import numpy as np
import pytest

from stackforecast._synth import gen_panel, gen_series
from stackforecast.base import ConfigError, SpecParseError
from stackforecast.config import (
    PRESETS,
    ExperimentConfig,
    load_config,
    parse_config,
    parse_synth_spec,
    render_config,
)

SAMPLE = """
# reduced grid
[experiment]
test_point_count = 20
learners = mean, median, knn

[grids]
k_values = 40
b_values = 0.05
"""


def test_defaults_follow_full_protocol():
    config = ExperimentConfig()
    assert config.horizon == 1
    assert config.k_values == (20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 250, 300)
    assert config.c_values == (24, 48, 72, 168, 504)
    assert config.b_values == (0.03, 0.05, 0.07)
    assert config.mlp_nodes == (1, 3, 5)
    assert config.lstm_epochs == 200 and config.lstm_nodes == 128


def test_parse_config_sections():
    config = parse_config(SAMPLE)
    assert config.test_point_count == 20
    assert config.learners == ("mean", "median", "knn")
    assert config.k_values == (40,)
    assert config.b_values == (0.05,)


def test_desk_preset_is_overridden_by_file_and_flags():
    config = parse_config(SAMPLE, profile="desk", seed=9)
    assert config.rf_trees == PRESETS["desk"]["rf_trees"]
    assert config.lstm_nodes == 8
    assert config.test_point_count == 20
    assert config.seed == 9


def test_unknown_key_names_key_and_line():
    text = "[experiment]\nhorizon = 1\nhorizn = 2\n"
    with pytest.raises(SpecParseError, match=r":3: unknown key 'horizn'"):
        parse_config(text)


def test_key_in_wrong_section_is_rejected():
    with pytest.raises(SpecParseError, match="unknown key 'rf_trees'"):
        parse_config("[mlp]\nrf_trees = 3\n")


def test_malformed_lines():
    with pytest.raises(SpecParseError, match=":2:"):
        parse_config("[experiment]\nhorizon 1\n")
    with pytest.raises(SpecParseError, match="before any"):
        parse_config("horizon = 1\n")
    with pytest.raises(SpecParseError, match="unknown section"):
        parse_config("[nope]\nx = 1\n")
    with pytest.raises(SpecParseError, match="repeated"):
        parse_config("[experiment]\nseed = 1\nseed = 2\n")


def test_invalid_value_reports_line():
    with pytest.raises(ConfigError, match=r":2: invalid value for 'horizon'"):
        parse_config("[experiment]\nhorizon = 0\n")
    with pytest.raises(ConfigError, match="learners"):
        parse_config("[experiment]\nlearners = mean, mean\n")


def test_empty_k_grid_needs_global_cell():
    with pytest.raises(ConfigError):
        parse_config("[grids]\nk_values =\ninclude_global = false\n")
    config = parse_config("[grids]\nk_values =\n")
    assert config.k_values == () and config.include_global


def test_lstm_horizon_must_fit_in_daily_season():
    with pytest.raises(ConfigError, match="exceeds s1=24"):
        parse_config("[experiment]\nhorizon = 48\nlearners = lstm\n")
    config = parse_config("[experiment]\nhorizon = 48\nlearners = lr, knn\n")
    assert config.horizon == 48


def test_render_round_trips():
    config = parse_config(SAMPLE, profile="desk")
    assert parse_config(render_config(config)) == config


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")
    assert load_config(None, profile="desk").test_point_count == 50


def test_synth_file_defaults():
    [(spec, bank)] = parse_synth_spec("")
    assert spec.name == "synthetic"
    assert len(bank.models) == 8


def test_synth_file_sections():
    text = """
[series north]
length = 800
seed = 4

[series south]
level = 500

[model flat]
kind = moving_average

[model sharp]
kind = noisy_oracle
noise_sd = 2.5
"""
    specs = parse_synth_spec(text, seed=11)
    assert [s.name for s, _ in specs] == ["north", "south"]
    assert specs[0][0].length == 800
    assert all(s.seed == 11 for s, _ in specs)
    assert [m.name for m in specs[1][1].models] == ["flat", "sharp"]


def test_synth_file_bad_key():
    with pytest.raises(SpecParseError, match=r":3: unknown key 'lenght'"):
        parse_synth_spec("[series a]\nlevel = 10\nlenght = 400\n")
    with pytest.raises(ConfigError, match="kind"):
        parse_synth_spec("[model a]\nkind = arima\n")


def test_model_sections_without_seed_draw_independent_noise():
    text = """
[series north]
seed = 1

[series south]
seed = 2

[model calm]
kind = noisy_oracle
noise_sd = 5

[model loud]
kind = noisy_oracle
noise_sd = 5

[model pinned]
kind = noisy_oracle
noise_sd = 5
seed = 9
"""
    (north, north_bank), (south, south_bank) = parse_synth_spec(text)
    north_seeds = [m.seed for m in north_bank.models]
    south_seeds = [m.seed for m in south_bank.models]
    assert north_seeds[0] != north_seeds[1]
    assert north_seeds[:2] != south_seeds[:2]
    assert north_seeds[2] == south_seeds[2] == 9
    series = gen_series(north.model_copy(update={"noise_sd": 0.0}))
    panel = gen_panel(series, north_bank)
    noise = panel.matrix - series.values[:, None]
    assert not np.allclose(noise[:, 0], noise[:, 1])
