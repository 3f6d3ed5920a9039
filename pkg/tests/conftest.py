import numpy as np
import pytest

from harper.config import settings


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Send CLI artifacts with bare file names to a scratch directory"""
    monkeypatch.setattr(settings, "output_dir", tmp_path)
    return tmp_path
