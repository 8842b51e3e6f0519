"""Pytest configuration and shared fixtures."""

import json

import pytest

from perm_converse.services import trimmed_mixture


@pytest.fixture
def bsc_mixture():
    """Trimmed mixture for n = 1000, delta = 0.11 with the default tau."""
    return trimmed_mixture(1000, 0.11)


@pytest.fixture
def sweep_config_file(tmp_path):
    """A small sweep config (JSON) next to the test's output directory."""
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"delta": 0.11, "eps": 1e-3, "n_min": 1000, "n_max": 5000, "points": 3}),
                    encoding="utf-8")
    return path
