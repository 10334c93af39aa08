import numpy as np
import pytest
from hypothesis import settings

from nlplasmon.bem import PencilEvaluator, build_icosphere

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ico1():
    return build_icosphere(1)


@pytest.fixture(scope="session")
def ico2():
    return build_icosphere(2)


@pytest.fixture(scope="session")
def ico3():
    return build_icosphere(3)


@pytest.fixture(scope="session")
def pencil2(ico2):
    """``h = 0.05`` pencil on the 320-triangle sphere, shared across modules."""
    return PencilEvaluator(ico2, 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
