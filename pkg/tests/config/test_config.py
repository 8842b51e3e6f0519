"""Tests for config file loading and SweepConfig."""

import json
from types import SimpleNamespace

import pytest

from perm_converse.config import ConfigError, SweepConfig, load_config
from perm_converse.utils import DomainError


def test_load_config_reads_object(sweep_config_file):
    data = load_config(sweep_config_file)
    assert data["n_min"] == 1000
    assert data["delta"] == 0.11


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)
    listed = tmp_path / "list.json"
    listed.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(listed)


def test_sweep_defaults_span_three_to_seven_decades():
    cfg = SweepConfig()
    ns = cfg.n_values()
    assert ns[0] == 1000 and ns[-1] == 10_000_000
    assert len(ns) == 40


@pytest.mark.parametrize("kwargs", [
    {"n_min": 2},
    {"eps": 0.0},
    {"eps": 1.0},
    {"points": 1},
    {"n_min": 5000, "n_max": 4000},
    {"tau_override": -1.0},
    {"delta": 1.5},
])
def test_sweep_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        SweepConfig(**kwargs)


def test_from_args():
    args = SimpleNamespace(delta=0.22, eps=1e-4, n_min=100, n_max=1000, points=3,
                           tau=None, g1=0.0625, out="c.csv", workers=2)
    cfg = SweepConfig.from_args(args)
    assert cfg.delta == 0.22 and cfg.tau_override is None
    assert cfg.out_path == "c.csv" and cfg.workers == 2
    assert cfg.n_values() == [100, 316, 1000]
