"""
Chain Module

Pivot maps between intersecting or touching circles, the transfer-angle
calculus (three independent routes), the closing criterion, chain iteration
and closure order.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from src.core.exceptions import (
    CircleChainError,
    DegenerateGeometryError,
    IncidenceError,
    IterationError,
    JointError,
)
from src.core.geometry import (
    TWO_PI,
    Circle,
    Line,
    Point,
    Tangent,
    ccw_angle,
    circumcircle,
    intersect_circles,
    normalize_angle,
    oriented_angle,
    other_common_point,
    second_intersection,
    tangent_line,
)
from src.core.tolerance import Tolerance

# Configure logging
logger = logging.getLogger(__name__)


class PivotSide(Enum):
    """Intersection left (A) or right (B) of the directed center line."""

    A = "A"
    B = "B"

    def flipped(self):
        return PivotSide.B if self is PivotSide.A else PivotSide.A


@dataclass(frozen=True)
class ExplicitPivot:
    """A pivot given by its coordinates."""

    point: Point


PivotChoice = Union[PivotSide, ExplicitPivot]


@dataclass(frozen=True)
class Chain:
    """
    Ordered circles with one pivot choice per joint.

    Joint ``i`` connects ``circles[i]`` to ``circles[i + 1]``; a closed chain
    has a last joint from the last circle back to the first.

    Args:
        circles (tuple): Circles of the chain, at least two (three when closed)
        pivots (tuple): One PivotChoice per joint
        closed (bool): Whether the chain returns to its first circle
        doubled (bool): Built by doubled_chain, the one closed chain allowed two circles
    """

    circles: Tuple[Circle, ...]
    pivots: Tuple[PivotChoice, ...]
    closed: bool = True
    doubled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "circles", tuple(self.circles))
        object.__setattr__(self, "pivots", tuple(self.pivots))
        if len(self.circles) < 2:
            raise CircleChainError(f"a chain needs at least 2 circles, got {len(self.circles)}")
        expected = len(self.circles) if self.closed else len(self.circles) - 1
        if len(self.pivots) != expected:
            kind = "closed" if self.closed else "open"
            raise CircleChainError(
                f"{kind} chain of {len(self.circles)} circles needs {expected} pivots, got {len(self.pivots)}"
            )
        if self.closed and len(self.circles) < 3 and not self.doubled:
            raise CircleChainError(f"a closed chain needs at least 3 circles, got {len(self.circles)}")

    @property
    def n(self):
        return len(self.circles)

    @property
    def joint_count(self):
        return len(self.pivots)

    def joint(self, index):
        """Circles ``(c_from, c_to)`` of joint ``index``."""
        return self.circles[index], self.circles[(index + 1) % self.n]

    def resolved_pivots(self, tol):
        """Pivot points of every joint, validating the joints on the way."""
        points = []
        for index, choice in enumerate(self.pivots):
            c_from, c_to = self.joint(index)
            try:
                points.append(resolve_pivot(c_from, c_to, choice, tol))
            except CircleChainError as exc:
                raise JointError(str(exc), index=index) from exc
        return tuple(points)

    def companion_pivots(self, tol):
        """The other common point of every joint (equal to the pivot for touching joints)."""
        companions = []
        for index, pivot in enumerate(self.resolved_pivots(tol)):
            c_from, c_to = self.joint(index)
            companions.append(other_common_point(c_from, c_to, pivot, tol))
        return tuple(companions)

    def flipped(self):
        """Same circles with every labelled pivot swapped A <-> B."""
        pivots = tuple(p.flipped() if isinstance(p, PivotSide) else p for p in self.pivots)
        return replace(self, pivots=pivots)

    def with_pivots(self, pivots):
        return replace(self, pivots=tuple(pivots))

    def validate(self, tol):
        self.resolved_pivots(tol)
        return self


class JointAngles(NamedTuple):
    """Central angles and transfer angle of one joint."""

    delta: float
    gamma: float
    mu: float


class TransferReport(NamedTuple):
    joints: Tuple[JointAngles, ...]
    total: float
    winding: int
    closing_defect: float


@dataclass(frozen=True)
class Trace:
    """
    Polygon produced by iterating the pivot maps.

    Args:
        vertices (tuple): X_1, X_2, ... (one more than the number of steps)
        side_lines (tuple): The carrier line of every step
        rounds (int): Number of rounds through the chain
    """

    vertices: Tuple[Point, ...]
    side_lines: Tuple[Line, ...]
    rounds: int = 1


# ---------------------------------------------------------------------------
# Pivots and pivot maps
# ---------------------------------------------------------------------------

def label_pivot(c_from, c_to, point):
    """Side label of ``point`` relative to the directed center line."""
    side = (c_to.center - c_from.center).cross(point - c_from.center)
    return PivotSide.A if side >= 0.0 else PivotSide.B


def resolve_pivot(c_from, c_to, choice, tol):
    """
    Resolve a pivot choice to a point.

    Args:
        c_from (Circle): Circle the joint leaves
        c_to (Circle): Circle the joint enters
        choice (PivotChoice): A, B or an explicit point
        tol (Tolerance): Scene tolerance

    Returns:
        Point: The pivot
    """
    relation = intersect_circles(c_from, c_to, tol)
    if not relation.has_common_point:
        raise JointError(f"circles have no common point ({type(relation).__name__.lower()})")
    if isinstance(choice, ExplicitPivot):
        point = Point(*choice.point)
        if not (c_from.contains(point, tol) and c_to.contains(point, tol)):
            raise IncidenceError(f"explicit pivot {tuple(point)} is not on both circles")
        return point
    if isinstance(relation, Tangent):
        return relation.contact
    if choice is PivotSide.A:
        return relation.a
    if choice is PivotSide.B:
        return relation.b
    raise ValueError(f"Unknown pivot choice: {choice}")


def _check_pivot(c_from, c_to, pivot, tol):
    if not (c_from.contains(pivot, tol) and c_to.contains(pivot, tol)):
        raise IncidenceError(f"pivot {tuple(pivot)} is not on both circles")


def _line_carrier(c_from, pivot, x, tol):
    if x.distance(pivot) <= tol.abs:
        return tangent_line(c_from, pivot, tol)
    return Line.through(pivot, x)


def pivot_map(c_from, c_to, pivot, x, tol):
    """
    Map ``x`` on ``c_from`` to the second intersection of line ``x pivot`` with ``c_to``.

    At ``x == pivot`` the tangent of ``c_from`` replaces the chord.
    """
    _check_pivot(c_from, c_to, pivot, tol)
    if not c_from.contains(x, tol):
        raise IncidenceError(f"point {tuple(x)} is not on the source circle")
    carrier = _line_carrier(c_from, pivot, x, tol)
    return second_intersection(carrier, c_to, pivot, tol)


def _concyclic_carrier(c_from, pivot, anchor_i, x, tol):
    """Carrier circle through x, pivot and I, or None when it degenerates to a line."""
    if x.distance(pivot) <= tol.abs:
        normal = (pivot - c_from.center).unit()
        offset = pivot - anchor_i
        along = normal.dot(offset)
        if abs(along) <= tol.rel * offset.norm():
            return None
        s = -offset.dot(offset) / (2.0 * along)
        return Circle(pivot + normal * s, abs(s))
    chord = x - pivot
    reach = anchor_i - pivot
    if abs(chord.cross(reach)) <= tol.rel * chord.norm() * reach.norm():
        return None
    return circumcircle(x, pivot, anchor_i, tol)


def pivot_map_concyclic(c_from, c_to, pivot, anchor_i, x, tol):
    """
    Concyclic pivot map: the carrier is the circle through ``x``, ``pivot`` and ``anchor_i``.

    Args:
        c_from (Circle): Source circle
        c_to (Circle): Target circle
        pivot (Point): Common point of both circles
        anchor_i (Point): Fixed point I off both circles
        x (Point): Point on ``c_from``
        tol (Tolerance): Scene tolerance

    Returns:
        Point: Image of ``x`` on ``c_to``
    """
    if c_from.contains(anchor_i, tol) or c_to.contains(anchor_i, tol):
        raise DegenerateGeometryError(f"anchor {tuple(anchor_i)} lies on a joint circle")
    _check_pivot(c_from, c_to, pivot, tol)
    if not c_from.contains(x, tol):
        raise IncidenceError(f"point {tuple(x)} is not on the source circle")
    carrier = _concyclic_carrier(c_from, pivot, anchor_i, x, tol)
    if carrier is None:
        return pivot_map(c_from, c_to, pivot, x, tol)
    return other_common_point(carrier, c_to, pivot, tol)


def _step(c_from, c_to, pivot, x, tol, anchor_i=None):
    """One pivot-map step, returning the image and the side line of the step."""
    if anchor_i is None:
        if not c_from.contains(x, tol):
            raise IncidenceError(f"point {tuple(x)} is not on the source circle")
        carrier = _line_carrier(c_from, pivot, x, tol)
        return second_intersection(carrier, c_to, pivot, tol), carrier

    y = pivot_map_concyclic(c_from, c_to, pivot, anchor_i, x, tol)
    if y.distance(x) > tol.abs:
        return y, Line.through(x, y)
    carrier = _concyclic_carrier(c_from, pivot, anchor_i, x, tol)
    if carrier is None:
        return y, _line_carrier(c_from, pivot, x, tol)
    return y, Line(x, (x - carrier.center).unit().perp())


# ---------------------------------------------------------------------------
# Transfer angles
# ---------------------------------------------------------------------------

def transfer_angle_measured(c_from, c_to, pivot, tol, probe_offset=math.pi / 2):
    """
    Transfer angle from its definition.

    A probe X on ``c_from`` is mapped to Y; the angle is the rotation from
    the radial direction of X about M1 to that of Y about M2.

    Args:
        c_from (Circle): Source circle
        c_to (Circle): Target circle
        pivot (Point): Common point
        tol (Tolerance): Scene tolerance
        probe_offset (float, optional): Polar offset of the probe from the pivot

    Returns:
        float: Transfer angle in (-pi, pi]
    """
    probe = c_from.point_at(c_from.angle_of(pivot) + probe_offset)
    image = pivot_map(c_from, c_to, pivot, probe, tol)
    return oriented_angle(probe - c_from.center, image - c_to.center)


def transfer_angle_formula(c_from, c_to, pivot, tol):
    """
    Transfer angle from the central angles: mu = pi - (delta + gamma) / 2.

    delta and gamma enter as counterclockwise angles in [0, 2pi); the
    returned JointAngles holds them normalized to (-pi, pi].
    """
    _check_pivot(c_from, c_to, pivot, tol)
    relation = intersect_circles(c_from, c_to, tol)
    if isinstance(relation, Tangent):
        return JointAngles(0.0, 0.0, 0.0 if relation.internal else math.pi)
    if not relation.has_common_point:
        raise JointError(f"circles have no common point ({type(relation).__name__.lower()})")

    other = other_common_point(c_from, c_to, pivot, tol)
    delta = ccw_angle(pivot - c_from.center, other - c_from.center)
    gamma = ccw_angle(other - c_to.center, pivot - c_to.center)
    mu = normalize_angle(math.pi - 0.5 * (delta + gamma))
    return JointAngles(normalize_angle(delta), normalize_angle(gamma), mu)


def _oriented_tangents(c_from, c_to, pivot):
    """t1 towards the inside of c_to, t2 towards the outside of c_from, and their alignment."""
    t1 = (pivot - c_from.center).unit().perp()
    inward = t1.dot(c_to.center - pivot) / c_to.radius
    if inward < 0.0:
        t1 = -t1
    t2 = (pivot - c_to.center).unit().perp()
    outward = t2.dot(pivot - c_from.center) / c_from.radius
    if outward < 0.0:
        t2 = -t2
    return t1, t2, min(abs(inward), abs(outward))


def tangent_route_degenerate(c_from, c_to, pivot, tol):
    """Whether the tangent orientation rule is undefined (touching circles)."""
    _, _, alignment = _oriented_tangents(c_from, c_to, pivot)
    return alignment <= tol.rel


def transfer_angle_tangent(c_from, c_to, pivot, tol):
    """
    Transfer angle as the oriented angle from t2 to t1.

    t1 is the tangent of ``c_from`` at the pivot oriented into ``c_to``;
    t2 is the tangent of ``c_to`` oriented out of ``c_from``. Touching
    circles leave the orientation undefined; the definitional route is
    used for them instead.
    """
    _check_pivot(c_from, c_to, pivot, tol)
    t1, t2, alignment = _oriented_tangents(c_from, c_to, pivot)
    if alignment <= tol.rel:
        logger.debug(f"Tangent route degenerate at {tuple(pivot)}; using the measured route")
        return transfer_angle_measured(c_from, c_to, pivot, tol)
    return oriented_angle(t2, t1)


def _nearest_turn(total):
    # half-integer ties resolve toward zero
    turns = total / TWO_PI
    return int(math.copysign(math.floor(abs(turns) + 0.5 - 1e-9), turns))


def transfer_report(chain, tol):
    """
    Per-joint angles, unnormalized total, winding number and closing defect.

    Args:
        chain (Chain): A closed chain
        tol (Tolerance): Scene tolerance

    Returns:
        TransferReport: The report
    """
    if not chain.closed:
        raise CircleChainError("transfer report needs a closed chain")
    joints = []
    for index, pivot in enumerate(chain.resolved_pivots(tol)):
        c_from, c_to = chain.joint(index)
        try:
            joints.append(transfer_angle_formula(c_from, c_to, pivot, tol))
        except CircleChainError as exc:
            raise JointError(str(exc), index=index) from exc
    total = math.fsum(joint.mu for joint in joints)
    winding = _nearest_turn(total)
    defect = total - TWO_PI * winding
    logger.debug(f"Transfer total {total:.12f} rad, winding {winding}, defect {defect:.3e}")
    return TransferReport(tuple(joints), total, winding, defect)


def is_closing(chain, tol):
    """Closing criterion: the transfer angles sum to a multiple of 2pi."""
    report = transfer_report(chain, tol)
    return abs(report.closing_defect) <= chain.joint_count * tol.rel


# ---------------------------------------------------------------------------
# Iteration
# ---------------------------------------------------------------------------

def iterate(chain, start, rounds, tol, concyclic_anchor=None):
    """
    Iterate the pivot maps from ``start``.

    Args:
        chain (Chain): The chain; an open chain is walked once
        start (Point): Starting point on the first circle
        rounds (int): Number of rounds for a closed chain
        tol (Tolerance): Scene tolerance
        concyclic_anchor (Point, optional): Use the concyclic pivot maps with this anchor

    Returns:
        Trace: Vertices and side lines of the polygon
    """
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    if not chain.closed:
        rounds = 1
    if not chain.circles[0].contains(start, tol):
        raise IterationError(0, f"start {tuple(start)} is not on the first circle")

    pivots = chain.resolved_pivots(tol)
    vertices = [Point(*start)]
    side_lines = []
    steps = chain.joint_count * rounds
    for step in range(steps):
        index = step % chain.joint_count
        c_from, c_to = chain.joint(index)
        try:
            image, side = _step(c_from, c_to, pivots[index], vertices[-1], tol, concyclic_anchor)
        except CircleChainError as exc:
            raise IterationError(step + 1, str(exc)) from exc
        vertices.append(image)
        side_lines.append(side)
    return Trace(tuple(vertices), tuple(side_lines), rounds)


def sample_starts(circle, count, seed):
    """``count`` seeded uniformly random points on ``circle``."""
    rng = np.random.default_rng(seed)
    return [circle.point_at(angle) for angle in rng.uniform(0.0, TWO_PI, size=count)]


def closure_residual(chain, starts, rounds, tol, seed=0, concyclic_anchor=None):
    """Largest distance between start and end vertex over seeded random starts."""
    worst = 0.0
    for start_index, start in enumerate(sample_starts(chain.circles[0], starts, seed)):
        try:
            trace = iterate(chain, start, rounds, tol, concyclic_anchor)
        except IterationError as exc:
            exc.start_index = start_index
            raise
        worst = max(worst, trace.vertices[-1].distance(trace.vertices[0]))
    return worst


def closure_order(chain, max_k, tol, seed=0):
    """
    Smallest number of rounds after which the chain map is the identity.

    Args:
        chain (Chain): A closed chain
        max_k (int): Largest number of rounds to consider
        tol (Tolerance): Scene tolerance
        seed (int, optional): Seed of the cross-validation start

    Returns:
        int or None: The closure order, or None when no k <= max_k works
    """
    if max_k < 1:
        raise ValueError(f"max_k must be at least 1, got {max_k}")
    report = transfer_report(chain, tol)
    n = chain.joint_count
    start = sample_starts(chain.circles[0], 1, seed)[0]
    for k in range(1, max_k + 1):
        turned = k * report.total
        defect = turned - TWO_PI * round(turned / TWO_PI)
        if abs(defect) > k * n * tol.rel:
            continue
        trace = iterate(chain, start, k, tol)
        gap = trace.vertices[-1].distance(start)
        if gap <= 2 * k * n * tol.abs:
            return k
        logger.warning(f"Angle sum suggests closure after {k} rounds but the trace misses by {gap:.3e}")
    return None


def central_angle_drift(chain, start_a, start_b, tol):
    """
    Largest change of the central angle between two traces along one round.

    The pivot maps rotate every circle's angular coordinate by a fixed
    amount, so the oriented angle X_i M_i X_i' is the same at every index.
    """
    first = iterate(chain, start_a, 1, tol)
    second = iterate(chain, start_b, 1, tol)
    reference = None
    drift = 0.0
    for index, (p, q) in enumerate(zip(first.vertices, second.vertices)):
        center = chain.circles[index % chain.n].center
        angle = oriented_angle(p - center, q - center)
        if reference is None:
            reference = angle
        drift = max(drift, abs(normalize_angle(angle - reference)))
    return drift


# ---------------------------------------------------------------------------
# Derived chains
# ---------------------------------------------------------------------------

def _return_pivot(choice, c_from, c_to, tol, companion):
    if isinstance(choice, PivotSide):
        # reversing the joint swaps left and right
        return choice if companion else choice.flipped()
    if not companion:
        return choice
    point = other_common_point(c_from, c_to, Point(*choice.point), tol)
    return ExplicitPivot(point)


def doubled_chain(open_chain, companion=False, tol=None):
    """
    Closed chain C_1 ... C_n C_(n-1) ... C_2 walking the open chain forth and back.

    Args:
        open_chain (Chain): An open chain of n >= 2 circles
        companion (bool, optional): Use the companion intersection on the return leg
        tol (Tolerance, optional): Tolerance for explicit pivots

    Returns:
        Chain: Closed chain of 2n - 2 joints
    """
    if open_chain.closed:
        raise CircleChainError("doubled chain needs an open chain")
    if tol is None:
        tol = Tolerance.for_circles(open_chain.circles)
    circles = list(open_chain.circles) + list(reversed(open_chain.circles[1:-1]))
    pivots = list(open_chain.pivots)
    for index in reversed(range(open_chain.joint_count)):
        c_from, c_to = open_chain.joint(index)
        pivots.append(_return_pivot(open_chain.pivots[index], c_from, c_to, tol, companion))
    return Chain(tuple(circles), tuple(pivots), closed=True, doubled=True)


def ab_chain(chain, tol=None):
    """Two rounds of a closed chain: its own pivots first, then the companion pivots."""
    if not chain.closed:
        raise CircleChainError("AB chain needs a closed chain")
    if tol is None:
        tol = Tolerance.for_circles(chain.circles)
    companions = []
    for index, choice in enumerate(chain.pivots):
        if isinstance(choice, PivotSide):
            companions.append(choice.flipped())
        else:
            c_from, c_to = chain.joint(index)
            companions.append(ExplicitPivot(other_common_point(c_from, c_to, Point(*choice.point), tol)))
    return Chain(chain.circles * 2, chain.pivots + tuple(companions), closed=True)
