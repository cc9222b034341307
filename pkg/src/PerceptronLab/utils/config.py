import os
import yaml

from src.PerceptronLab.utils.errors import DomainError

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "config.yaml")
THREADS_ENV = "PERCEPTRON_LAB_THREADS"
CONFIG_ENV = "PERCEPTRON_LAB_CONFIG"


def load_config(path=None):
    """
    Load the YAML configuration.

    Resolution order: explicit path, then $PERCEPTRON_LAB_CONFIG, then the packaged
    config.yaml. A missing packaged file or an empty file gives an empty dict; every
    reader falls back to in-code defaults through `section(config, name).get(key, default)`.

    Raises:
        OSError: an explicitly named file cannot be read.
    """
    path = path or os.environ.get(CONFIG_ENV) or DEFAULT_CONFIG_PATH
    if path == DEFAULT_CONFIG_PATH and not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as f:
        config = yaml.load(f, Loader=yaml.FullLoader)
    return config or {}


def section(config, name):
    return (config or {}).get(name, {}) or {}


def resolve_workers(config=None, requested=None):
    """Worker count: flag, else config, capped by $PERCEPTRON_LAB_THREADS; at least 1."""
    workers = requested if requested is not None else section(config, "simulation").get("workers", 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            workers = min(workers, int(cap))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, int(workers))
