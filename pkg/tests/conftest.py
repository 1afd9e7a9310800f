"""
Shared fixtures for the yardloc tests.
"""

import os
import sys

import pytest

# Add the project root and this directory to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from helpers import line_instance  # noqa: E402
from instances.instance_store import InstanceStore  # noqa: E402


@pytest.fixture
def line3():
    return line_instance()


@pytest.fixture
def sample_path():
    return InstanceStore.sample_path


@pytest.fixture(autouse=True)
def serial_threads(monkeypatch):
    """Tests run serially unless they set YARDLOC_THREADS themselves."""
    monkeypatch.setenv("YARDLOC_THREADS", "1")
