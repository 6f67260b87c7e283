import math

import pytest

from src.core.geometry import Circle, Point
from src.core.tolerance import Tolerance
from src.modules.chain import Chain, PivotSide
from src.modules.scenes import gen_polygon_chain, gen_touching_chain


@pytest.fixture
def unit_tol():
    return Tolerance()


@pytest.fixture
def tangent_pair():
    return Circle(Point(0, 0), 1), Circle(Point(2, 0), 1)


@pytest.fixture
def orthogonal_pair():
    return Circle(Point(0, 0), 1), Circle(Point(1, 1), 1)


@pytest.fixture
def equilateral_touching():
    """Three unit circles centered on an equilateral triangle of side 2."""
    circles = (Circle(Point(0, 0), 1), Circle(Point(2, 0), 1), Circle(Point(1, math.sqrt(3)), 1))
    return Chain(circles, (PivotSide.A,) * 3)


@pytest.fixture
def polygon_chain():
    chain, witness = gen_polygon_chain(5, 7)
    return chain, witness, Tolerance.for_circles(chain.circles)


@pytest.fixture
def touching_chains():
    """Touching chains keyed by size."""
    return {n: gen_touching_chain(n, 1) for n in (3, 4, 5, 6)}
