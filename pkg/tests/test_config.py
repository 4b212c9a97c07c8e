"""Tests for experiment configuration and the config manager."""

import json

import pytest

from blind_bounds.core.config import ConfigManager, ExperimentConfig
from blind_bounds.core.errors import InvalidInputError, ParameterRangeError


@pytest.fixture
def manager(tmp_path):
    return ConfigManager(config_dir=tmp_path / "config")


def write_defaults(manager, values):
    manager.config_dir.mkdir(parents=True, exist_ok=True)
    manager.defaults_path.write_text(json.dumps(values))


def test_defaults():
    config = ExperimentConfig()
    assert config.d_list == [2, 16, 256, 4096]
    assert config.d == 1024
    assert (config.delta, config.gamma) == (0.1, 0.1)
    assert config.eps == "0"
    assert config.trials == 1000 and config.d_max == 6


def test_field_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(delta=0.5)
    with pytest.raises(ValueError):
        ExperimentConfig(d_list=[1, 4])
    with pytest.raises(ValueError):
        ExperimentConfig(eps="1")
    with pytest.raises(ValueError):
        ExperimentConfig(eps="abc")
    with pytest.raises(ValueError):
        ExperimentConfig(d_max=8)
    with pytest.raises(ValueError):
        ExperimentConfig(unknown_field=1)


def test_eps_accepts_fractions_and_numbers():
    assert ExperimentConfig(eps="1/72").eps == "1/72"
    assert ExperimentConfig(eps=0.001).eps == "0.001"


def test_manager_reads_defaults_file(manager, tmp_path):
    assert manager.load_defaults() == {}
    assert not (tmp_path / "config").exists()
    fresh = ConfigManager(config_dir=tmp_path / "config")
    write_defaults(fresh, {"seed": 5})
    assert fresh.load_defaults() == {"seed": 5}
    assert fresh.build_config("separation").seed == 5


def test_merge_order(manager, tmp_path):
    """Defaults, then the sweep file, then flags; command sections override top level."""
    write_defaults(manager, {"seed": 5, "trials": 10, "d_max": 3})
    sweep = tmp_path / "sweep.json"
    sweep.write_text(json.dumps({
        "trials": 20,
        "audit": {"d_max": 4},
        "protocol": {"d": 64},
    }))
    config = manager.build_config("audit", {"trials": 30, "suites": None}, sweep)
    assert config.command == "audit"
    assert config.seed == 5
    assert config.trials == 30
    assert config.d_max == 4
    assert config.d == 1024


def test_invalid_values_raise_parameter_range_error(manager):
    with pytest.raises(ParameterRangeError) as info:
        manager.build_config("protocol", {"delta": 0.7})
    assert "delta" in str(info.value)


def test_bad_sweep_files(manager, tmp_path):
    with pytest.raises(InvalidInputError):
        manager.load_sweep(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(InvalidInputError):
        manager.build_config("audit", {}, broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(InvalidInputError):
        manager.build_config("audit", {}, listing)


def test_config_dict_round_trip():
    config = ExperimentConfig(command="defect", eps_list=[0.0, 0.5], defect_dims=[2, 4])
    assert ExperimentConfig.from_dict(config.to_dict()) == config
