"""
Incidence Module

Side-line intersections of chain polygons, the fixed circles they move on,
the concurrency points of those circles, and the reports for the touching
and complete-quadrilateral configurations.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Optional, Tuple

from src.core.checks import check
from src.core.exceptions import CircleChainError, DegenerateGeometryError, IncidenceError, JointError
from src.core.geometry import (
    Circle,
    Line,
    Point,
    Tangent,
    circumcircle,
    fit_circle,
    intersect_circles,
    intersect_lines,
    other_common_point,
    point_line_defect,
)
from src.core.tolerance import Tolerance
from src.modules.chain import Chain, is_closing, iterate, label_pivot, sample_starts

# Configure logging
logger = logging.getLogger(__name__)

# samples this close to a pivot (in scene tolerances) carry no information for the fit
PIVOT_SKIP = 1e3
# samples farther than this (in scene scales) come from nearly parallel side lines
FAR_SAMPLE = 100.0
MAX_WIDENINGS = 4


@dataclass
class LighthouseReport:
    """
    Side-line intersections X_jk over many starts and the circles C_jk they trace.

    Pair and triple keys are 1-based side-line indices.
    """

    pivots: Tuple[Point, ...]
    sampled_x: Dict[Tuple[int, int], list] = field(default_factory=dict)
    fitted: Dict[Tuple[int, int], Circle] = field(default_factory=dict)
    residuals: Dict[Tuple[int, int], float] = field(default_factory=dict)
    pivot_defects: Dict[Tuple[int, int], float] = field(default_factory=dict)
    concurrency: Dict[Tuple[int, int, int], Tuple[Point, float]] = field(default_factory=dict)
    half_planes: Dict[Tuple[int, int], Tuple[int, int]] = field(default_factory=dict)
    starts_used: int = 0

    def max_residual(self):
        values = list(self.residuals.values()) + list(self.pivot_defects.values())
        return max(values, default=0.0)

    def max_spread(self):
        return max((spread for _, spread in self.concurrency.values()), default=0.0)

    def checks(self, bound):
        return [
            check("lighthouse circle residual", self.max_residual(), bound),
            check("concurrency point spread", self.max_spread(), bound),
        ]


def side_line_intersections(trace, tol):
    """
    Intersections X_jk of every pair of side lines.

    Args:
        trace (Trace): Polygon of a closed chain
        tol (Tolerance): Scene tolerance

    Returns:
        dict: (j, k) -> Point for 1-based j < k; parallel pairs are omitted
    """
    points = {}
    for (j, first), (k, second) in combinations(enumerate(trace.side_lines, start=1), 2):
        try:
            points[(j, k)] = intersect_lines(first, second, tol)
        except DegenerateGeometryError:
            logger.debug(f"Side lines {j} and {k} are parallel; X_{j}{k} omitted")
    return points


def _pair_sides(samples, a, b):
    chord = b - a
    left = sum(1 for x in samples if chord.cross(x - a) > 0)
    return left, len(samples) - left


def _usable(x, pivot_a, pivot_b, center, tol):
    if x.distance(pivot_a) <= PIVOT_SKIP * tol.abs or x.distance(pivot_b) <= PIVOT_SKIP * tol.abs:
        return False
    return x.distance(center) <= FAR_SAMPLE * tol.scene_scale


def lighthouse_sweep(chain, starts, tol, seed=0):
    """
    Fit the circles C_jk traced by the side-line intersections.

    The polygon is iterated from ``starts`` seeded starts. For every pair
    of side lines the samples X_jk together with the pivots A_j, A_k are
    fitted by one circle; for every triple the concurrency point P_ijk is
    the second common point of C_ij and C_jk, and its spread is measured
    against the other two candidates. When some pair has samples on one
    side of its chord A_j A_k only, the start set is doubled.

    Args:
        chain (Chain): A closing chain
        starts (int): Number of starts, at least 5
        tol (Tolerance): Scene tolerance
        seed (int, optional): Seed of the starts

    Returns:
        LighthouseReport: The report
    """
    if starts < 5:
        raise ValueError(f"lighthouse sweep needs at least 5 starts, got {starts}")
    if not chain.closed or not is_closing(chain, tol):
        raise CircleChainError("lighthouse sweep needs a closing chain")

    pivots = chain.resolved_pivots(tol)
    m = chain.joint_count
    center = Point(
        sum(p.x for p in pivots) / m,
        sum(p.y for p in pivots) / m,
    )
    pairs = list(combinations(range(1, m + 1), 2))
    samples = {pair: [] for pair in pairs}

    count = starts
    batch_seed = seed
    total_starts = 0
    for widening in range(MAX_WIDENINGS + 1):
        total_starts += count
        for start in sample_starts(chain.circles[0], count, batch_seed):
            trace = iterate(chain, start, 1, tol)
            for pair, x in side_line_intersections(trace, tol).items():
                samples[pair].append(x)

        one_sided = []
        for j, k in pairs:
            a, b = pivots[j - 1], pivots[k - 1]
            if a.distance(b) <= PIVOT_SKIP * tol.abs:
                continue
            usable = [x for x in samples[(j, k)] if _usable(x, a, b, center, tol)]
            if min(_pair_sides(usable, a, b)) == 0:
                one_sided.append((j, k))
        if not one_sided or widening == MAX_WIDENINGS:
            if one_sided:
                logger.warning(f"Pairs {one_sided} stay on one side of their chord after widening")
            break
        logger.debug(f"Widening lighthouse sweep, one-sided pairs: {one_sided}")
        batch_seed = [seed, widening + 1]
        count = starts * 2 ** (widening + 1)

    report = LighthouseReport(pivots=pivots, starts_used=total_starts)

    for j, k in pairs:
        a, b = pivots[j - 1], pivots[k - 1]
        report.sampled_x[(j, k)] = samples[(j, k)]
        if a.distance(b) <= PIVOT_SKIP * tol.abs:
            # both lines always pass through the shared pivot
            continue
        usable = [x for x in samples[(j, k)] if _usable(x, a, b, center, tol)]
        skipped = len(samples[(j, k)]) - len(usable)
        if skipped:
            logger.debug(f"X_{j},{k}: {skipped} samples at a pivot or at infinity skipped")
        report.half_planes[(j, k)] = _pair_sides(usable, a, b)
        if len(usable) < 2:
            logger.warning(f"X_{j},{k}: only {len(usable)} usable samples; C_{j},{k} not fitted")
            continue
        try:
            circle, _ = fit_circle(usable + [a, b], tol)
        except DegenerateGeometryError as exc:
            logger.warning(f"C_{j},{k} could not be fitted: {exc}")
            continue
        report.fitted[(j, k)] = circle
        report.residuals[(j, k)] = max(circle.defect(x) for x in usable)
        report.pivot_defects[(j, k)] = max(circle.defect(a), circle.defect(b))

    for i, j, k in combinations(range(1, m + 1), 3):
        c_ij = report.fitted.get((i, j))
        c_jk = report.fitted.get((j, k))
        c_ik = report.fitted.get((i, k))
        if c_ij is None or c_jk is None or c_ik is None:
            continue
        try:
            candidates = [
                other_common_point(c_ij, c_jk, pivots[j - 1], tol),
                other_common_point(c_jk, c_ik, pivots[k - 1], tol),
                other_common_point(c_ik, c_ij, pivots[i - 1], tol),
            ]
        except DegenerateGeometryError:
            continue
        spread = max(p.distance(q) for p, q in combinations(candidates, 2))
        report.concurrency[(i, j, k)] = (candidates[0], spread)

    logger.debug(
        f"Lighthouse sweep: {len(report.fitted)} circles, max residual {report.max_residual():.3e}, "
        f"max spread {report.max_spread():.3e}"
    )
    return report


def tangency_probe(c1, c2, tol):
    """
    How far two circles are from touching.

    Returns:
        tuple: (is_tangent, defect) with defect the smaller of the external
        and internal tangency gaps
    """
    d = c1.center.distance(c2.center)
    defect = min(abs(d - (c1.radius + c2.radius)), abs(d - abs(c1.radius - c2.radius)))
    return defect <= tol.abs, defect


def caption_tangency(report, tol):
    """
    Tangency defects of C_14, C_25, C_36 against C_13 and C_24.

    Meant for a three-circle chain traversed with both pivots (six side
    lines). The defects are measurements, not assertions.

    Args:
        report (LighthouseReport): Sweep over a six-line closing chain
        tol (Tolerance): Scene tolerance

    Returns:
        list: ((pair), (pair), defect) records for every available combination
    """
    records = []
    for outer in ((1, 4), (2, 5), (3, 6)):
        for inner in ((1, 3), (2, 4)):
            c_outer = report.fitted.get(outer)
            c_inner = report.fitted.get(inner)
            if c_outer is None or c_inner is None:
                continue
            _, defect = tangency_probe(c_outer, c_inner, tol)
            records.append((outer, inner, defect))
    return records


# ---------------------------------------------------------------------------
# Touching chains
# ---------------------------------------------------------------------------

@dataclass
class TouchingReport:
    """
    Incidences of a chain of touching circles, worst case over the starts.

    The three-circle report fills ``x135``/``x246`` and the orthogonality,
    midpoint, concurrency and diameter defects; the four-circle report
    fills ``x13``/``x24``, the contact and closure defects.
    """

    n: int
    base_circle: Circle
    x135: Optional[Point] = None
    x246: Optional[Point] = None
    x13: Optional[Point] = None
    x24: Optional[Point] = None
    orthogonality_defects: Tuple[float, ...] = ()
    midpoint_defect: float = 0.0
    membership_defects: Tuple[float, ...] = ()
    concurrency_defects: Tuple[float, ...] = ()
    diameter_defects: Tuple[float, ...] = ()
    contact_defect: float = 0.0
    closure_defect: float = 0.0

    def max_defect(self):
        values = (
            list(self.orthogonality_defects)
            + list(self.membership_defects)
            + list(self.concurrency_defects)
            + list(self.diameter_defects)
            + [self.midpoint_defect, self.contact_defect, self.closure_defect]
        )
        return max(values)

    def checks(self, tol):
        """Angle defects are compared with ``tol.rel``, length defects with ``tol.abs``."""
        bound_len = 10.0 * tol.abs
        results = [check(f"orthogonality l{i}, l{i + 3}", d, 10.0 * tol.rel) for i, d in enumerate(self.orthogonality_defects, 1)]
        results += [check(f"membership {i}", d, bound_len) for i, d in enumerate(self.membership_defects, 1)]
        results += [check(f"concurrency {i}", d, bound_len) for i, d in enumerate(self.concurrency_defects, 1)]
        results += [check(f"diameter C{i}", d, bound_len) for i, d in enumerate(self.diameter_defects, 1)]
        if self.n == 3:
            results.append(check("midpoint is center", self.midpoint_defect, bound_len))
        else:
            results.append(check("contacts concyclic", self.contact_defect, bound_len))
            results.append(check("closes in one round", self.closure_defect, bound_len))
        return results


def _require_touching(chain, n, tol):
    if chain.n != n or not chain.closed:
        raise JointError(f"expected a closed chain of {n} circles, got {chain.n}")
    for index in range(chain.joint_count):
        relation = intersect_circles(*chain.joint(index), tol)
        if not isinstance(relation, Tangent):
            raise JointError(f"circles do not touch ({type(relation).__name__.lower()})", index=index)
    return chain.resolved_pivots(tol)


def _meet(lines, j, k, tol):
    try:
        return intersect_lines(lines[j - 1], lines[k - 1], tol)
    except DegenerateGeometryError:
        return None


def three_touching_report(chain, starts, tol, seed=0):
    """
    Three touching circles, traversed twice.

    X_13 = X_35 = X_51 and X_24 = X_46 = X_62 lie on the circle through the
    contact points, symmetric about its center; the side lines l_i and
    l_(i+3) are orthogonal and X_i X_(i+3) is a diameter of C_i.

    Args:
        chain (Chain): Three circles with touching joints
        starts (int): Number of seeded starts
        tol (Tolerance): Scene tolerance
        seed (int, optional): Seed of the starts

    Returns:
        TouchingReport: Worst defects over the starts
    """
    contacts = _require_touching(chain, 3, tol)
    base = circumcircle(*contacts, tol)

    orthogonality = [0.0, 0.0, 0.0]
    diameters = [0.0, 0.0, 0.0]
    membership = [0.0, 0.0]
    concurrency = [0.0, 0.0]
    midpoint = 0.0
    x135 = x246 = None

    for start in sample_starts(chain.circles[0], starts, seed):
        trace = iterate(chain, start, 2, tol)
        lines = trace.side_lines
        for i in range(3):
            orthogonality[i] = max(orthogonality[i], abs(lines[i].direction.dot(lines[i + 3].direction)))
            center = chain.circles[i].center
            gap = (trace.vertices[i] + trace.vertices[i + 3] - center * 2.0).norm()
            diameters[i] = max(diameters[i], gap)

        odd = [p for p in (_meet(lines, 1, 3, tol), _meet(lines, 3, 5, tol), _meet(lines, 1, 5, tol)) if p]
        even = [p for p in (_meet(lines, 2, 4, tol), _meet(lines, 4, 6, tol), _meet(lines, 2, 6, tol)) if p]
        if not odd or not even:
            logger.debug("Parallel side lines at this start; sample skipped")
            continue
        for slot, group in enumerate((odd, even)):
            spread = max((p.distance(q) for p, q in combinations(group, 2)), default=0.0)
            concurrency[slot] = max(concurrency[slot], spread)
            membership[slot] = max(membership[slot], max(base.defect(p) for p in group))
        midpoint = max(midpoint, ((odd[0] + even[0]) * 0.5).distance(base.center))
        if x135 is None:
            x135, x246 = odd[0], even[0]

    return TouchingReport(
        n=3,
        base_circle=base,
        x135=x135,
        x246=x246,
        orthogonality_defects=tuple(orthogonality),
        midpoint_defect=midpoint,
        membership_defects=tuple(membership),
        concurrency_defects=tuple(concurrency),
        diameter_defects=tuple(diameters),
    )


def four_touching_report(chain, starts, tol, seed=0):
    """
    Four touching circles: the contact points are concyclic and X_13, X_24 lie on their circle.

    Raises:
        IncidenceError: If the contact points are not concyclic
    """
    contacts = _require_touching(chain, 4, tol)
    base = circumcircle(*contacts[:3], tol)
    contact_defect = base.defect(contacts[3])
    if contact_defect > 10.0 * tol.abs:
        raise IncidenceError(f"contact points are not concyclic (defect {contact_defect:.3e})")

    membership = [0.0, 0.0]
    closure = 0.0
    x13 = x24 = None
    for start in sample_starts(chain.circles[0], starts, seed):
        trace = iterate(chain, start, 1, tol)
        closure = max(closure, trace.vertices[-1].distance(trace.vertices[0]))
        first = _meet(trace.side_lines, 1, 3, tol)
        second = _meet(trace.side_lines, 2, 4, tol)
        if first is not None:
            membership[0] = max(membership[0], base.defect(first))
        if second is not None:
            membership[1] = max(membership[1], base.defect(second))
        if x13 is None:
            x13, x24 = first, second

    return TouchingReport(
        n=4,
        base_circle=base,
        x13=x13,
        x24=x24,
        membership_defects=tuple(membership),
        contact_defect=contact_defect,
        closure_defect=closure,
    )


# ---------------------------------------------------------------------------
# Complete quadrilateral
# ---------------------------------------------------------------------------

@dataclass
class SteinerReport:
    """
    The complete quadrilateral of four lines and the polygon of its circle chain.

    Lines, pivots and circles use 1-based names in ``defects``; ``vacuous``
    lists the checks that have no content for this start.
    """

    steiner_point: Point
    p_point: Point
    q_point: Point
    circles: Tuple[Circle, ...]
    chain: Chain
    vertices: Tuple[Point, ...]
    circle_c13: Circle
    circle_c24: Circle
    circle_c: Circle
    circle_d: Optional[Circle]
    x_point: Optional[Point]
    collinearity_defects: Tuple[float, float]
    steiner_spread: float
    defects: Dict[str, float] = field(default_factory=dict)
    collapsed: bool = False
    vacuous: Tuple[str, ...] = ()

    def max_defect(self):
        return max(list(self.defects.values()) + list(self.collinearity_defects) + [self.steiner_spread])

    def checks(self, bound):
        results = [check(name, value, bound) for name, value in self.defects.items()]
        results.append(check("steiner point spread", self.steiner_spread, bound))
        results.append(check("X1, X3, P collinear", self.collinearity_defects[0], bound))
        results.append(check("X2, X4, Q collinear", self.collinearity_defects[1], bound))
        return results


def _general_position(lines, tol):
    meets = {}
    for i, j in combinations(range(4), 2):
        try:
            meets[(i, j)] = intersect_lines(lines[i], lines[j], tol)
        except DegenerateGeometryError:
            raise DegenerateGeometryError(f"lines l{i + 1} and l{j + 1} are parallel") from None
    local = Tolerance.for_circles((), rel=tol.rel, points=list(meets.values()))
    for (i, j), meet in meets.items():
        for k in range(4):
            if k in (i, j):
                continue
            if lines[k].distance(meet) <= 10.0 * local.abs:
                raise DegenerateGeometryError(f"lines l{i + 1}, l{j + 1}, l{k + 1} are concurrent")
    return meets


def quadrilateral_circles(lines, tol):
    """
    Pivots, diagonal points and the four circles of a complete quadrilateral.

    Returns:
        tuple: ([A_1 .. A_4], P, Q, (C_1 .. C_4))
    """
    if len(lines) != 4:
        raise DegenerateGeometryError(f"a complete quadrilateral needs 4 lines, got {len(lines)}")
    meets = _general_position(lines, tol)
    pivots = [meets[(0, 1)], meets[(1, 2)], meets[(2, 3)], meets[(0, 3)]]
    p_point = meets[(1, 3)]
    q_point = meets[(0, 2)]
    a1, a2, a3, a4 = pivots
    points_tol = Tolerance.for_circles((), rel=tol.rel, points=pivots + [p_point, q_point])
    circles = (
        circumcircle(a4, a1, p_point, points_tol),
        circumcircle(a1, a2, q_point, points_tol),
        circumcircle(a2, a3, p_point, points_tol),
        circumcircle(a3, a4, q_point, points_tol),
    )
    return pivots, p_point, q_point, circles


def steiner_report(lines, start, tol):
    """
    Verify the incidences of a complete quadrilateral and its circle chain.

    With A_i = l_i meet l_(i+1), P = l_2 meet l_4 and Q = l_1 meet l_3 the
    circles are C_1 = (A_4 A_1 P), C_2 = (A_1 A_2 Q), C_3 = (A_2 A_3 P) and
    C_4 = (A_3 A_4 Q). They share the Steiner point S. Starting on C_1 the
    polygon X_1 .. X_4 satisfies: X_13 on (A_1 A_3 S), X_24 on (A_2 A_4 S),
    X_1 X_3 through P, X_2 X_4 through Q, their meet X on (P Q S), and
    X_1 .. X_4, S concyclic.

    Args:
        lines (list): Four lines in general position
        start (Point): Start on C_1
        tol (Tolerance): Relative tolerance; the scale is taken from the scene

    Returns:
        SteinerReport: The report
    """
    pivots, p_point, q_point, circles = quadrilateral_circles(lines, tol)
    a1, a2, a3, a4 = pivots
    scene_tol = Tolerance.for_circles(circles, rel=tol.rel)
    if not circles[0].contains(start, scene_tol):
        raise IncidenceError(f"start {tuple(start)} is not on C1 (defect {circles[0].defect(start):.3e})")

    chain = Chain(circles, tuple(_label(circles, pivots)))
    steiner = other_common_point(circles[0], circles[2], p_point, scene_tol)
    companion = other_common_point(circles[1], circles[3], q_point, scene_tol)
    spread = max(steiner.distance(companion), circles[1].defect(steiner), circles[3].defect(steiner))

    trace = iterate(chain, start, 1, scene_tol)
    x1, x2, x3, x4 = trace.vertices[:4]
    collapsed = start.distance(steiner) <= 10.0 * scene_tol.abs

    defects = {f"S on C{i + 1}": circle.defect(steiner) for i, circle in enumerate(circles)}
    defects["polygon closes"] = trace.vertices[-1].distance(x1)
    vacuous = []

    circle_c13 = circumcircle(a1, a3, steiner, scene_tol)
    circle_c24 = circumcircle(a2, a4, steiner, scene_tol)
    circle_c = circumcircle(p_point, q_point, steiner, scene_tol)
    x13 = _meet(trace.side_lines, 1, 3, scene_tol)
    x24 = _meet(trace.side_lines, 2, 4, scene_tol)
    if x13 is None:
        vacuous.append("X13 on C13")
    else:
        defects["X13 on C13"] = circle_c13.defect(x13)
    if x24 is None:
        vacuous.append("X24 on C24")
    else:
        defects["X24 on C24"] = circle_c24.defect(x24)

    collinearity = (point_line_defect(p_point, x1, x3), point_line_defect(q_point, x2, x4))

    x_point = None
    circle_d = None
    if collapsed:
        vacuous += ["X on C", "X4 on D", "S on D"]
    else:
        try:
            x_point = intersect_lines(Line.through(x1, x3), Line.through(x2, x4), scene_tol)
            defects["X on C"] = circle_c.defect(x_point)
        except DegenerateGeometryError:
            vacuous.append("X on C")
        try:
            circle_d = circumcircle(x1, x2, x3, scene_tol)
            defects["X4 on D"] = circle_d.defect(x4)
            defects["S on D"] = circle_d.defect(steiner)
        except DegenerateGeometryError:
            vacuous += ["X4 on D", "S on D"]

    if vacuous:
        logger.debug(f"Steiner checks without content for this start: {vacuous}")
    return SteinerReport(
        steiner_point=steiner,
        p_point=p_point,
        q_point=q_point,
        circles=circles,
        chain=chain,
        vertices=trace.vertices,
        circle_c13=circle_c13,
        circle_c24=circle_c24,
        circle_c=circle_c,
        circle_d=circle_d,
        x_point=x_point,
        collinearity_defects=collinearity,
        steiner_spread=spread,
        defects=defects,
        collapsed=collapsed,
        vacuous=tuple(vacuous),
    )


def _label(circles, pivots):
    n = len(circles)
    return [label_pivot(circles[i], circles[(i + 1) % n], pivots[i]) for i in range(n)]
