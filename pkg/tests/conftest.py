"""Configuration file for pytest."""
import json
import os
import sys
from pathlib import Path

import pytest

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

from fractional_transmission.processing.config import ProblemConfig  # noqa: E402
from fractional_transmission.spectral.source import SineSeries  # noqa: E402

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def pytest_configure(config):
    """Configure pytest with custom settings."""
    # Single worker thread
    os.environ["FRACTIONAL_TRANSMISSION_THREADS"] = "1"


def make_config(coeffs=(1.0,), K=8, **overrides) -> ProblemConfig:
    """ProblemConfig with the demo parameters and a sine-series datum."""
    params = dict(s=1, alpha=0.5, beta=1.5, a=1.0, b=1.0, p0=0.0, K=K, nx=16, ny=16)
    params.update(overrides)
    return ProblemConfig(phi=SineSeries(tuple(coeffs)), **params)


@pytest.fixture
def single_mode_config() -> ProblemConfig:
    """phi = sin x on the demo parameters."""
    return make_config((1.0,))


@pytest.fixture
def demo_config() -> ProblemConfig:
    """phi = sin x + 0.5 sin 3x, K = 64."""
    return make_config((1.0, 0.0, 0.5), K=64, nx=64, ny=64)


@pytest.fixture
def write_config(tmp_path):
    """Write a config document to a temporary JSON file and return its path."""
    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return str(path)
    return _write


@pytest.fixture
def demo_document():
    return json.loads((CONFIG_DIR / "demo.json").read_text())
