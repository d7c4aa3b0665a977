import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fluidsym import fluid, symmetry as sm  # noqa: E402


@pytest.fixture(scope="session")
def eckart_basis():
    return sm.solve_determining(Fraction(0))


@pytest.fixture(scope="session")
def israel_stewart_basis():
    return sm.solve_determining(Fraction(1))


@pytest.fixture(scope="session")
def eckart_system():
    return fluid.build_system(fluid.FluidParams(lam=Fraction(0)))


@pytest.fixture(scope="session")
def israel_stewart_system():
    return fluid.build_system(fluid.FluidParams(lam=Fraction(1)))


@pytest.fixture(scope="session")
def eckart_system_symbolic():
    return fluid.build_system(fluid.FluidParams(k=None, kappa=None, lam=Fraction(0)))


@pytest.fixture(scope="session")
def israel_stewart_system_symbolic():
    return fluid.build_system(fluid.FluidParams(k=None, kappa=None, lam=Fraction(1)))
