"""
Shared fixtures.
"""

import pytest

from ddlab.grid import Grid
from ddlab.problem import ProblemSpec, build_exponent, build_initial
from ddlab.transforms import Regime


def make_problem(m=2.0, p="constant:2", n=41, T=0.02, epsilon=0.05, u0="bump:0,1,1", a=-1.0, b=1.0):
    """Bump problem on [a, b]; every argument can be overridden."""
    grid = Grid(a, b, n)
    return ProblemSpec(
        grid=grid,
        regime=Regime(m),
        p=build_exponent(p, grid),
        u0=build_initial(u0, grid, m),
        T=T,
        epsilon=epsilon,
    )


@pytest.fixture
def bump_problem():
    return make_problem()
