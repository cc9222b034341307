import os
import sys

import pytest

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if BASE_DIR not in sys.path:
    sys.path.insert(0, BASE_DIR)

from src.PerceptronLab.utils import logger  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.configure(history_file=None, quiet=True, use_color=False)
    yield
    logger.configure()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PERCEPTRON_LAB_THREADS", raising=False)
    monkeypatch.delenv("PERCEPTRON_LAB_CONFIG", raising=False)
    return tmp_path
