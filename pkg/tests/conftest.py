import os
import sys

import pytest

# src modules import each other as top-level modules
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo trend checks (deselect with -m 'not slow')")


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("RIA_OUTPUT_DIR", raising=False)
    return str(tmp_path)
