"""Shared fixtures for the blind-bounds tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from blind_bounds.core.debug_config import DebugConfig  # noqa: E402


@pytest.fixture
def rng():
    """Seeded generator so randomized checks are repeatable."""
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def reset_debug_config():
    """Undo debug mode and shift-factor changes made by a test."""
    yield
    DebugConfig.reset()


@pytest.fixture
def log_file(tmp_path):
    return tmp_path / "blind_bounds.log"
