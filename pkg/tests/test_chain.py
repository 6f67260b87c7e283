import math

import numpy as np
import pytest
from hypothesis import given, settings

from src.core.exceptions import CircleChainError, IncidenceError, IterationError, JointError
from src.core.geometry import Circle, Point, intersect_circles, normalize_angle, other_common_point
from src.core.tolerance import Tolerance
from src.modules.chain import (
    Chain,
    ExplicitPivot,
    PivotSide,
    ab_chain,
    central_angle_drift,
    closure_order,
    closure_residual,
    doubled_chain,
    is_closing,
    iterate,
    label_pivot,
    pivot_map,
    pivot_map_concyclic,
    resolve_pivot,
    sample_starts,
    tangent_route_degenerate,
    transfer_angle_formula,
    transfer_angle_measured,
    transfer_angle_tangent,
    transfer_report,
)
from src.modules.scenes import (
    gen_common_point,
    gen_open_polygon,
    gen_random_chain,
    gen_rational_chain,
)
from tests.strategies import intersecting_pairs


def close(p, q, eps=1e-12):
    return p.distance(q) <= eps


def angle_gap(a, b):
    return abs(normalize_angle(a - b))


# ---------------------------------------------------------------------------
# Pivots and pivot maps
# ---------------------------------------------------------------------------

def test_resolve_pivot_examples(unit_tol, tangent_pair, orthogonal_pair):
    left = resolve_pivot(Circle(Point(0, 0), 1), Circle(Point(1, 0), 1), PivotSide.A, unit_tol)
    assert close(left, Point(0.5, math.sqrt(3) / 2))
    assert close(resolve_pivot(*tangent_pair, PivotSide.B, unit_tol), Point(1, 0))
    assert close(resolve_pivot(*tangent_pair, PivotSide.A, unit_tol), Point(1, 0))
    assert close(resolve_pivot(*orthogonal_pair, PivotSide.A, unit_tol), Point(0, 1))


def test_resolve_pivot_errors(unit_tol):
    with pytest.raises(JointError):
        resolve_pivot(Circle(Point(0, 0), 1), Circle(Point(4, 0), 1), PivotSide.A, unit_tol)
    with pytest.raises(IncidenceError):
        resolve_pivot(Circle(Point(0, 0), 1), Circle(Point(1, 0), 1), ExplicitPivot(Point(0, 1)), unit_tol)


def test_label_pivot_matches_resolution(orthogonal_pair):
    assert label_pivot(*orthogonal_pair, Point(0, 1)) is PivotSide.A
    assert label_pivot(*orthogonal_pair, Point(1, 0)) is PivotSide.B


@pytest.mark.parametrize(
    "x, expected",
    [
        (Point(-1, 0), Point(3, 0)),
        (Point(1, 0), Point(1, 0)),
        (Point(0, 1), Point(2, -1)),
    ],
)
def test_pivot_map_examples(tangent_pair, unit_tol, x, expected):
    assert close(pivot_map(*tangent_pair, Point(1, 0), x, unit_tol), expected)


def test_pivot_map_rejects_point_off_source(tangent_pair, unit_tol):
    with pytest.raises(IncidenceError):
        pivot_map(*tangent_pair, Point(1, 0), Point(0.5, 0.5), unit_tol)


def test_concyclic_pivot_map_through_anchor(tangent_pair, unit_tol):
    image = pivot_map_concyclic(*tangent_pair, Point(1, 0), Point(1, 5), Point(-1, 0), unit_tol)
    # circle through (-1, 0), (1, 0), (1, 5) has center (0, 2.5)
    expected = Point(3 - 8 / 10.25, 10 / 10.25)
    assert close(image, expected, 1e-12)
    assert tangent_pair[1].defect(image) <= 1e-12
    assert abs(image.distance(Point(0, 2.5)) - math.sqrt(7.25)) <= 1e-12


def test_concyclic_pivot_map_collinear_anchor_falls_back(tangent_pair, unit_tol):
    image = pivot_map_concyclic(*tangent_pair, Point(1, 0), Point(5, 0), Point(-1, 0), unit_tol)
    assert close(image, Point(3, 0))


def test_concyclic_pivot_map_rejects_anchor_on_circle(tangent_pair, unit_tol):
    with pytest.raises(CircleChainError):
        pivot_map_concyclic(*tangent_pair, Point(1, 0), Point(3, 0), Point(-1, 0), unit_tol)


@settings(max_examples=100, deadline=None)
@given(intersecting_pairs())
def test_pivot_map_is_a_bijection(pair):
    c1, c2 = pair
    tol = Tolerance.for_circles(pair)
    pivot = intersect_circles(c1, c2, tol).a
    for x in sample_starts(c1, 5, 0):
        y = pivot_map(c1, c2, pivot, x, tol)
        assert c2.contains(y, tol)
        back = pivot_map(c2, c1, pivot, y, tol)
        assert back.distance(x) <= 1e-10 * tol.scene_scale


# ---------------------------------------------------------------------------
# Transfer angles
# ---------------------------------------------------------------------------

def test_tangent_joint_angles(tangent_pair, unit_tol):
    assert transfer_angle_measured(*tangent_pair, Point(1, 0), unit_tol) == pytest.approx(math.pi)
    assert tuple(transfer_angle_formula(*tangent_pair, Point(1, 0), unit_tol)) == pytest.approx((0.0, 0.0, math.pi))
    assert tangent_route_degenerate(*tangent_pair, Point(1, 0), unit_tol)
    assert transfer_angle_tangent(*tangent_pair, Point(1, 0), unit_tol) == pytest.approx(math.pi)


def test_internal_tangency_has_zero_transfer_angle(unit_tol):
    outer, inner = Circle(Point(0, 0), 2), Circle(Point(1, 0), 1)
    assert transfer_angle_formula(outer, inner, Point(2, 0), unit_tol).mu == 0.0
    assert transfer_angle_measured(outer, inner, Point(2, 0), unit_tol) == pytest.approx(0.0, abs=1e-12)


def test_orthogonal_joint_angles(orthogonal_pair, unit_tol):
    pivot = Point(1, 0)
    assert transfer_angle_measured(*orthogonal_pair, pivot, unit_tol) == pytest.approx(math.pi / 2)
    assert tuple(transfer_angle_formula(*orthogonal_pair, pivot, unit_tol)) == pytest.approx(
        (math.pi / 2, math.pi / 2, math.pi / 2)
    )
    assert transfer_angle_tangent(*orthogonal_pair, pivot, unit_tol) == pytest.approx(math.pi / 2)
    assert transfer_angle_formula(*orthogonal_pair, Point(0, 1), unit_tol).mu == pytest.approx(-math.pi / 2)


def test_left_pivot_has_negative_transfer_angle(unit_tol):
    c1, c2 = Circle(Point(0, 0), 1), Circle(Point(1, 0), 1)
    left = Point(0.5, math.sqrt(3) / 2)
    assert transfer_angle_formula(c1, c2, left, unit_tol).mu == pytest.approx(-math.pi / 3)
    assert transfer_angle_tangent(c1, c2, left, unit_tol) == pytest.approx(-math.pi / 3)


@settings(max_examples=200, deadline=None)
@given(intersecting_pairs())
def test_transfer_angle_routes_agree(pair):
    c1, c2 = pair
    tol = Tolerance.for_circles(pair)
    relation = intersect_circles(c1, c2, tol)
    for pivot in (relation.a, relation.b):
        formula = transfer_angle_formula(c1, c2, pivot, tol).mu
        measured = transfer_angle_measured(c1, c2, pivot, tol)
        tangent = transfer_angle_tangent(c1, c2, pivot, tol)
        assert angle_gap(formula, measured) <= 1e-9
        assert angle_gap(formula, tangent) <= 1e-9
        assert angle_gap(measured, tangent) <= 1e-9
    mu_a = transfer_angle_formula(c1, c2, relation.a, tol).mu
    mu_b = transfer_angle_formula(c1, c2, relation.b, tol).mu
    assert abs(normalize_angle(mu_a + mu_b)) <= 1e-9
    assert mu_a < 0 < mu_b


@settings(max_examples=50, deadline=None)
@given(intersecting_pairs())
def test_measured_angle_does_not_depend_on_probe(pair):
    c1, c2 = pair
    tol = Tolerance.for_circles(pair)
    pivot = intersect_circles(c1, c2, tol).a
    reference = transfer_angle_measured(c1, c2, pivot, tol)
    offsets = np.linspace(0.3, 2 * math.pi - 0.3, 32)
    gaps = [angle_gap(transfer_angle_measured(c1, c2, pivot, tol, probe_offset=o), reference) for o in offsets]
    assert float(np.std(gaps)) < 1e-10
    assert max(gaps) <= 1e-9


# ---------------------------------------------------------------------------
# Closing criterion and iteration
# ---------------------------------------------------------------------------

def test_chain_validation():
    circles = (Circle(Point(0, 0), 1), Circle(Point(1, 0), 1))
    with pytest.raises(CircleChainError):
        Chain(circles[:1], ())
    with pytest.raises(CircleChainError):
        Chain(circles, (PivotSide.A,))
    open_chain = Chain(circles, (PivotSide.A,), closed=False)
    assert open_chain.joint_count == 1
    with pytest.raises(CircleChainError, match="at least 3 circles"):
        Chain(circles, (PivotSide.A, PivotSide.B))
    assert doubled_chain(open_chain).n == 2
    assert doubled_chain(open_chain).flipped().doubled


def test_joint_errors_carry_the_index(unit_tol):
    circles = (Circle(Point(0, 0), 1), Circle(Point(1, 0), 1), Circle(Point(10, 0), 1))
    chain = Chain(circles, (PivotSide.A,) * 3)
    with pytest.raises(JointError) as info:
        transfer_report(chain, unit_tol)
    assert info.value.index == 1


def test_touching_transfer_reports(touching_chains):
    even = touching_chains[4]
    report = transfer_report(even, Tolerance.for_circles(even.circles))
    assert report.total == pytest.approx(4 * math.pi)
    assert report.winding == 2
    assert abs(report.closing_defect) <= 1e-12

    odd = touching_chains[3]
    tol = Tolerance.for_circles(odd.circles)
    report = transfer_report(odd, tol)
    assert report.total == pytest.approx(3 * math.pi)
    assert abs(report.closing_defect) == pytest.approx(math.pi)
    assert not is_closing(odd, tol)


def test_flipped_pivots_negate_the_total():
    chain = gen_random_chain(5, 3)
    tol = Tolerance.for_circles(chain.circles)
    forward = transfer_report(chain, tol)
    backward = transfer_report(chain.flipped(), tol)
    assert backward.total == pytest.approx(-forward.total, abs=1e-12)
    assert backward.closing_defect == pytest.approx(-forward.closing_defect, abs=1e-12)


def test_polygon_chain_closes(polygon_chain):
    chain, witness, tol = polygon_chain
    assert is_closing(chain, tol)
    assert abs(transfer_report(chain, tol).closing_defect) <= 1e-10
    trace = iterate(chain, witness, 1, tol)
    assert trace.vertices[-1].distance(witness) <= 1e-9 * tol.scene_scale
    assert closure_residual(chain, 20, 1, tol) <= 1e-9 * tol.scene_scale


def test_b_pivots_close_as_well(polygon_chain):
    chain, _, tol = polygon_chain
    flipped = chain.flipped()
    assert is_closing(flipped, tol)
    assert closure_residual(flipped, 20, 1, tol) <= 1e-9 * tol.scene_scale


def test_trace_shape(polygon_chain):
    chain, witness, tol = polygon_chain
    trace = iterate(chain, witness, 2, tol)
    assert len(trace.vertices) == 2 * chain.n + 1
    assert len(trace.side_lines) == 2 * chain.n
    pivots = chain.resolved_pivots(tol)
    for step, line in enumerate(trace.side_lines):
        assert line.distance(pivots[step % chain.n]) <= 1e-9 * tol.scene_scale
        assert chain.circles[step % chain.n].contains(trace.vertices[step], tol)


def test_iterate_rejects_start_off_the_first_circle(polygon_chain):
    chain, _, tol = polygon_chain
    with pytest.raises(IterationError) as info:
        iterate(chain, chain.circles[0].center, 1, tol)
    assert info.value.step == 0
    with pytest.raises(ValueError):
        iterate(chain, chain.circles[0].point_at(0.0), 0, tol)


def test_touching_parity_by_iteration(touching_chains):
    even = touching_chains[4]
    tol = Tolerance.for_circles(even.circles)
    start = sample_starts(even.circles[0], 1, 0)[0]
    assert iterate(even, start, 1, tol).vertices[-1].distance(start) <= 1e-9 * tol.scene_scale

    odd = touching_chains[3]
    tol = Tolerance.for_circles(odd.circles)
    start = sample_starts(odd.circles[0], 1, 0)[0]
    one_round = iterate(odd, start, 1, tol).vertices[-1]
    assert one_round.distance(start) == pytest.approx(2 * odd.circles[0].radius)
    assert iterate(odd, start, 2, tol).vertices[-1].distance(start) <= 1e-9 * tol.scene_scale
    assert closure_order(odd, 4, tol) == 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ab_composition_returns_for_arbitrary_chains(seed):
    chain = gen_random_chain(5, seed)
    tol = Tolerance.for_circles(chain.circles)
    ab = ab_chain(chain, tol)
    assert ab.joint_count == 10
    assert is_closing(ab, tol)
    assert closure_residual(ab, 20, 1, tol, seed=seed) <= 1e-9 * tol.scene_scale


def test_common_point_chain_closes():
    chain = gen_common_point(3, 4)
    tol = Tolerance.for_circles(chain.circles)
    assert is_closing(chain, tol)
    assert closure_residual(chain, 20, 1, tol) <= 1e-9 * tol.scene_scale


def test_concyclic_iteration_closes_on_closing_chains(polygon_chain):
    chain, _, tol = polygon_chain
    centers = [c.center for c in chain.circles]
    middle = Point(sum(p.x for p in centers) / len(centers), sum(p.y for p in centers) / len(centers))
    candidates = [middle + Point(0.0, 0.05 * k * tol.scene_scale) for k in range(20)]
    anchor = next(p for p in candidates if all(c.defect(p) > 0.05 * tol.scene_scale for c in chain.circles))
    residual = closure_residual(chain, 10, 1, tol, concyclic_anchor=anchor)
    assert residual <= 1e-8 * tol.scene_scale


def test_closure_order_of_rational_chain():
    chain = gen_rational_chain(4, 1, 3, 0)
    tol = Tolerance.for_circles(chain.circles)
    assert closure_order(chain, 6, tol) == 3
    assert not is_closing(chain, tol)


def test_closure_order_absent_for_generic_chain():
    chain = gen_random_chain(4, 11)
    tol = Tolerance.for_circles(chain.circles)
    assert closure_order(chain, 50, tol) is None
    with pytest.raises(ValueError):
        closure_order(chain, 0, tol)


def test_central_angle_drift(polygon_chain):
    chain, _, tol = polygon_chain
    a, b = sample_starts(chain.circles[0], 2, 5)
    assert central_angle_drift(chain, a, b, tol) <= 1e-9


# ---------------------------------------------------------------------------
# Derived chains
# ---------------------------------------------------------------------------

def test_doubled_two_chain_always_closes():
    circles = (Circle(Point(0, 0), 1), Circle(Point(1.3, 0.4), 0.8))
    open_chain = Chain(circles, (PivotSide.A,), closed=False)
    doubled = doubled_chain(open_chain)
    tol = Tolerance.for_circles(circles)
    assert doubled.joint_count == 2
    joints = transfer_report(doubled, tol).joints
    assert joints[0].mu == pytest.approx(-joints[1].mu)
    assert is_closing(doubled, tol)


def test_doubled_open_polygon_closes():
    chain, witness = gen_open_polygon(4, 2)
    tol = Tolerance.for_circles(chain.circles)
    doubled = doubled_chain(chain, tol=tol)
    assert doubled.n == 6
    assert is_closing(doubled, tol)
    trace = iterate(doubled, witness, 1, tol)
    assert trace.vertices[-1].distance(witness) <= 1e-9 * tol.scene_scale
    # the identical-pivot return leg walks the polygon back
    assert trace.vertices[chain.n].distance(trace.vertices[chain.n - 2]) <= 1e-9 * tol.scene_scale


def test_companion_doubling_closes_for_tuned_open_chains():
    chain, _ = gen_open_polygon(4, 5, companion=True)
    tol = Tolerance.for_circles(chain.circles)
    companion = doubled_chain(chain, companion=True, tol=tol)
    assert is_closing(companion, tol)
    assert closure_residual(companion, 10, 1, tol) <= 1e-8 * tol.scene_scale


def test_doubled_chain_needs_an_open_chain(polygon_chain):
    with pytest.raises(CircleChainError):
        doubled_chain(polygon_chain[0])
    open_chain = Chain(polygon_chain[0].circles[:2], (PivotSide.A,), closed=False)
    with pytest.raises(CircleChainError):
        ab_chain(open_chain)


def test_ab_chain_keeps_explicit_pivots(unit_tol):
    c1, c2, c3 = Circle(Point(0, 0), 1), Circle(Point(1, 0), 1), Circle(Point(0.5, 0.8), 1)
    pivot = resolve_pivot(c1, c2, PivotSide.A, unit_tol)
    chain = Chain((c1, c2, c3), (ExplicitPivot(pivot), PivotSide.B, PivotSide.A))
    ab = ab_chain(chain, unit_tol)
    companion = ab.pivots[3]
    assert isinstance(companion, ExplicitPivot)
    assert close(companion.point, other_common_point(c1, c2, pivot, unit_tol))
    assert ab.pivots[4] is PivotSide.A
