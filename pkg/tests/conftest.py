import numpy as np
import pytest

from qrlin.maps import HolomorphicSeries, PerturbedRadial, RadialPower
from qrlin.pipeline import linearize

CASES = {
    "z|z|": lambda: RadialPower(1, 1, 1, 0.5),
    "z2|z|^-3/2": lambda: RadialPower(1, 2, -1.5, 1.0),
    "2i z|z|^1/2": lambda: RadialPower(2j, 1, 0.5, 0.2),
    "koenigs": lambda: HolomorphicSeries((0.5, 0.1), 0.5),
    "boettcher": lambda: HolomorphicSeries((0, 1, 0.1), 0.5),
    "repelling": lambda: HolomorphicSeries((2, 0.3), 0.5),
    "perturbed": lambda: PerturbedRadial(1, 1, 1, 0.05, (1,), 0.5),
}


@pytest.fixture(scope="session")
def run():
    """Cached ``(map, setup, result)`` for the named pipeline case."""
    cache = {}

    def get(name):
        if name not in cache:
            fmap = CASES[name]()
            setup, result = linearize(fmap)
            cache[name] = (fmap, setup, result)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
