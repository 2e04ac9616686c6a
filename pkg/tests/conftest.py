import numpy as np
import pytest
from hypothesis import settings

from d2dshare import NetworkParams

settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")


@pytest.fixture
def table1() -> NetworkParams:
    """Baseline parameter point used throughout (the numerical defaults)."""
    return NetworkParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(987654321)
