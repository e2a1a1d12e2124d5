"""Shared fixtures: small named spaces used across the test modules."""
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core import validate_metric  # noqa: E402

settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")


@pytest.fixture
def path3():
    """a - b - c with unit steps."""
    return validate_metric(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


@pytest.fixture
def equilateral():
    return validate_metric(["a", "b", "c"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]])


@pytest.fixture
def unit_pair():
    return validate_metric(["x", "y"], [[0, 1], [1, 0]])


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""
    def _write(name, text):
        target = tmp_path / name
        target.write_text(text, encoding="utf-8")
        return target
    return _write
