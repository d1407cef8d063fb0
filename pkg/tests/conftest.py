import numpy as np
import pytest

from skfeeg.config import ExperimentConfig, GeometryConfig, SweepConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def default_config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def coarse_config():
    """Small geometry that keeps dense reference computations cheap."""
    return ExperimentConfig(
        geometry=GeometryConfig(electrode_count=16, node_spacing=0.026),
        sweep=SweepConfig(ep_snr_db=[0.0, 20.0], pm_snr_db=[0.0, 20.0], noise_db=[10.0, 20.0, 30.0],
                          alpha=[1.25], smoothing=[False, True]),
        repetitions=3,
    )
