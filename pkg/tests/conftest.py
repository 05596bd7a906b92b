import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from fraclab.families import PolynomialFamily
from fraclab.grid import DyadicSet, GridFunction

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def fam_tt2() -> PolynomialFamily:
    return PolynomialFamily.parse("t, t^2")


@pytest.fixture(scope="session")
def fam_t() -> PolynomialFamily:
    return PolynomialFamily.parse("t")


def random_grid_function(J: int, seed: int, lo: float = 0.0, hi: float = 1.0) -> GridFunction:
    rng = np.random.default_rng(seed)
    return GridFunction(J, rng.uniform(lo, hi, size=1 << J))


def random_indicator(J: int, density: float, seed: int) -> GridFunction:
    return DyadicSet.random(J, density, seed).indicator()
