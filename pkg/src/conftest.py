# src/conftest.py
import os

import pytest
from hypothesis import HealthCheck, settings

from . import cli
from .logs import teardown_logging

# "ci" is the acceptance profile: 100 seeded instances per property, no deadline
settings.register_profile("ci", max_examples=100, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=20, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    """Logs and reports under tmp_path; returns the output directory."""
    teardown_logging()
    monkeypatch.setattr(cli, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(cli, "OUT_DIR", str(tmp_path / "results"))
    yield tmp_path / "results"
    teardown_logging()
