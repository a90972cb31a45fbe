import numpy as np
import pytest

from uavmec.scenario import ScenarioConfig, load_config_text


@pytest.fixture(scope="session")
def cfg() -> ScenarioConfig:
    """The frozen default configuration."""
    return load_config_text("")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    # keep the environment override from leaking into directory choices
    monkeypatch.delenv("UAVMEC_OUTPUT_DIR", raising=False)
