import pathlib

import pytest

from heightdyn import affine_map, load_map

MAPS = pathlib.Path(__file__).resolve().parent.parent / "maps"


@pytest.fixture(scope="session")
def eq12():
    """Area-preserving three-strip map, the central worked example."""
    return load_map(MAPS / "eq12.json")


@pytest.fixture(scope="session")
def lagarias():
    return load_map(MAPS / "lagarias.json")


@pytest.fixture(scope="session")
def dissipative():
    return load_map(MAPS / "dissipative.json")


@pytest.fixture(scope="session")
def linear_strip():
    """Single-piece strip map: plain affine [[3/2,-1],[1,0]], s = 0."""
    return load_map(MAPS / "linear.json")


@pytest.fixture(scope="session")
def case_i_map():
    """The workhorse two-slope map: T = 3/2, D = 1, h_2 = 1."""
    from fractions import Fraction

    return affine_map([[Fraction(3, 2), -1], [1, 0]])


@pytest.fixture(scope="session")
def maps_dir():
    return MAPS
