import numpy as np
import pytest
from hypothesis import settings

from multcoal import ClockFamily, MassVector
from multcoal.core import clock_matrix

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIG_X = (1.1, 0.8, 0.5, 0.4, 0.4, 0.3, 0.2)
FIG_XI = (6.0, 0.2, 1.4, 0.7, 5.6, 4.6, 3.4)


def random_instance(seed: int, n: int):
    """Masses U(0.05, 1) sorted down, with one clock row."""
    rng = np.random.default_rng(seed)
    x = MassVector.sorted(rng.uniform(0.05, 1.0, n))
    return x, ClockFamily(clock_matrix(x, 1, rng)[0])


@pytest.fixture
def figure():
    return MassVector(FIG_X), ClockFamily(FIG_XI)
