import math

import pytest
from hypothesis import HealthCheck, given, settings

from src.core.exceptions import CircleChainError, DegenerateGeometryError, IncidenceError, JointError
from src.core.geometry import Circle, Line, Point
from src.core.tolerance import Tolerance
from src.modules.chain import Trace, ab_chain, iterate, sample_starts
from src.modules.incidence import (
    _meet,
    caption_tangency,
    four_touching_report,
    lighthouse_sweep,
    quadrilateral_circles,
    side_line_intersections,
    steiner_report,
    tangency_probe,
    three_touching_report,
)
from src.modules.scenes import gen_common_point, gen_polygon_chain, gen_random_chain, gen_touching_chain
from tests.strategies import general_quadrilaterals, seeds

STEINER_LINES = [
    Line.from_coefficients(0, 1, 0),
    Line.from_coefficients(1, 0, 0),
    Line.from_coefficients(1, 1, 1),
    Line.from_coefficients(-2, 1, 0.3),
]


def test_tangency_probe(unit_tol):
    assert tangency_probe(Circle(Point(0, 0), 1), Circle(Point(3, 0), 2), unit_tol) == (True, 0.0)
    assert tangency_probe(Circle(Point(0, 0), 2), Circle(Point(1, 0), 1), unit_tol) == (True, 0.0)
    touching, defect = tangency_probe(Circle(Point(0, 0), 1), Circle(Point(1, 0), 1), unit_tol)
    assert not touching
    assert defect == pytest.approx(1.0)


def test_side_lines_of_three_touching_circles_meet_at_the_pivots(equilateral_touching):
    tol = Tolerance.for_circles(equilateral_touching.circles)
    start = sample_starts(equilateral_touching.circles[0], 1, 3)[0]
    trace = iterate(equilateral_touching, start, 2, tol)
    meets = side_line_intersections(trace, tol)
    pivots = equilateral_touching.resolved_pivots(tol)
    for j, pivot in enumerate(pivots, start=1):
        assert meets[(j, j + 3)].distance(pivot) <= 1e-9 * tol.scene_scale


def test_parallel_side_lines_are_omitted(unit_tol):
    # a square: opposite sides are parallel
    corners = [Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)]
    lines = tuple(Line.through(corners[i], corners[(i + 1) % 4]) for i in range(4))
    meets = side_line_intersections(Trace(tuple(corners + corners[:1]), lines), unit_tol)
    assert (1, 3) not in meets and (2, 4) not in meets
    assert meets[(1, 2)].distance(Point(1, 0)) <= 1e-12
    assert len(meets) == 4


@pytest.mark.parametrize("n, seed", [(4, 0), (5, 1), (6, 2)])
def test_lighthouse_circles_on_closing_chains(n, seed):
    chain, _ = gen_polygon_chain(n, seed)
    tol = Tolerance.for_circles(chain.circles)
    report = lighthouse_sweep(chain, 16, tol, seed=seed)
    bound = 1e-8 * tol.scene_scale
    assert report.starts_used >= 16
    assert report.fitted
    assert all(r.passed for r in report.checks(bound)), report.checks(bound)
    pivots = chain.resolved_pivots(tol)
    for (j, k), circle in report.fitted.items():
        assert circle.defect(pivots[(j - 1) % n]) <= bound
        assert circle.defect(pivots[(k - 1) % n]) <= bound


def test_lighthouse_on_a_common_point_chain():
    chain = gen_common_point(3, 2)
    tol = Tolerance.for_circles(chain.circles)
    report = lighthouse_sweep(chain, 12, tol)
    assert report.max_spread() <= 1e-8 * tol.scene_scale
    assert report.max_residual() <= 1e-8 * tol.scene_scale


def test_lighthouse_preconditions(touching_chains):
    odd = touching_chains[3]
    tol = Tolerance.for_circles(odd.circles)
    with pytest.raises(CircleChainError):
        lighthouse_sweep(odd, 16, tol)
    even = touching_chains[4]
    with pytest.raises(ValueError):
        lighthouse_sweep(even, 4, Tolerance.for_circles(even.circles))


def test_caption_tangency_is_measured_not_asserted():
    chain = gen_random_chain(3, 4)
    tol = Tolerance.for_circles(chain.circles)
    ab = ab_chain(chain, tol)
    report = lighthouse_sweep(ab, 16, tol)
    records = caption_tangency(report, tol)
    assert len(records) <= 6
    for outer, inner, defect in records:
        assert outer in ((1, 4), (2, 5), (3, 6))
        assert inner in ((1, 3), (2, 4))
        assert math.isfinite(defect) and defect >= 0.0


def test_three_touching_equilateral(equilateral_touching):
    tol = Tolerance.for_circles(equilateral_touching.circles)
    report = three_touching_report(equilateral_touching, 10, tol)
    assert report.base_circle.center.distance(Point(1, math.sqrt(3) / 3)) <= 1e-12
    assert report.base_circle.radius == pytest.approx(math.sqrt(3) / 3)
    assert report.max_defect() <= 1e-9 * tol.scene_scale
    assert all(r.passed for r in report.checks(tol))


def test_three_touching_membership_covers_every_meet():
    chain = gen_touching_chain(3, 5)
    tol = Tolerance.for_circles(chain.circles)
    report = three_touching_report(chain, 6, tol, seed=2)
    groups = (((1, 3), (3, 5), (1, 5)), ((2, 4), (4, 6), (2, 6)))
    for start in sample_starts(chain.circles[0], 6, 2):
        lines = iterate(chain, start, 2, tol).side_lines
        for slot, pairs in enumerate(groups):
            for j, k in pairs:
                meet = _meet(lines, j, k, tol)
                if meet is not None:
                    assert report.base_circle.defect(meet) <= report.membership_defects[slot]


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds)
def test_three_touching_random(seed):
    chain = gen_touching_chain(3, seed)
    tol = Tolerance.for_circles(chain.circles)
    report = three_touching_report(chain, 5, tol, seed=seed)
    assert all(r.passed for r in report.checks(tol))


def test_four_touching_report(touching_chains):
    chain = touching_chains[4]
    tol = Tolerance.for_circles(chain.circles)
    report = four_touching_report(chain, 10, tol)
    assert report.contact_defect <= 1e-9 * tol.scene_scale
    assert report.closure_defect <= 1e-9 * tol.scene_scale
    assert all(d <= 1e-9 * tol.scene_scale for d in report.membership_defects)
    assert all(r.passed for r in report.checks(tol))


def test_touching_reports_reject_crossing_circles(polygon_chain):
    chain, _, tol = polygon_chain
    with pytest.raises(JointError):
        three_touching_report(chain, 3, tol)
    with pytest.raises(JointError):
        four_touching_report(chain, 3, tol)


def test_steiner_worked_example():
    tol = Tolerance()
    _, _, _, circles = quadrilateral_circles(STEINER_LINES, tol)
    scene_tol = Tolerance.for_circles(circles)
    start = sample_starts(circles[0], 1, 0)[0]
    report = steiner_report(STEINER_LINES, start, tol)
    bound = 1e-9 * scene_tol.scene_scale
    assert not report.collapsed
    assert report.vacuous == ()
    assert all(r.passed for r in report.checks(bound)), report.checks(bound)
    for circle in circles:
        assert circle.defect(report.steiner_point) <= bound
    assert report.circle_d.defect(report.steiner_point) <= bound
    assert report.p_point.distance(Point(0, 0.3)) <= 1e-12
    assert report.q_point.distance(Point(1, 0)) <= 1e-12


def test_steiner_start_at_the_steiner_point_collapses():
    tol = Tolerance()
    probe = steiner_report(STEINER_LINES, quadrilateral_circles(STEINER_LINES, tol)[3][0].point_at(1.0), tol)
    report = steiner_report(STEINER_LINES, probe.steiner_point, tol)
    assert report.collapsed
    assert "X on C" in report.vacuous
    scale = Tolerance.for_circles(report.circles).scene_scale
    for vertex in report.vertices:
        assert vertex.distance(report.steiner_point) <= 1e-9 * scale


def test_steiner_start_at_the_first_pivot():
    tol = Tolerance()
    pivots, _, _, circles = quadrilateral_circles(STEINER_LINES, tol)
    report = steiner_report(STEINER_LINES, pivots[0], tol)
    bound = 1e-8 * Tolerance.for_circles(circles).scene_scale
    assert not report.collapsed
    assert all(defect <= bound for defect in report.collinearity_defects)


def test_steiner_preconditions():
    tol = Tolerance()
    parallel = STEINER_LINES[:3] + [Line.from_coefficients(0, 1, 2)]
    with pytest.raises(DegenerateGeometryError):
        steiner_report(parallel, Point(0, 0), tol)
    concurrent = STEINER_LINES[:3] + [Line.from_coefficients(1, -1, 0)]
    with pytest.raises(DegenerateGeometryError):
        steiner_report(concurrent, Point(0, 0), tol)
    with pytest.raises(IncidenceError):
        steiner_report(STEINER_LINES, Point(50, 50), tol)
    with pytest.raises(DegenerateGeometryError):
        quadrilateral_circles(STEINER_LINES[:3], tol)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(general_quadrilaterals(), seeds)
def test_steiner_random_quadrilaterals(lines, seed):
    tol = Tolerance()
    _, _, _, circles = quadrilateral_circles(lines, tol)
    bound = 1e-9 * Tolerance.for_circles(circles).scene_scale
    for start in sample_starts(circles[0], 10, seed):
        report = steiner_report(lines, start, tol)
        assert all(r.passed for r in report.checks(bound)), report.checks(bound)
