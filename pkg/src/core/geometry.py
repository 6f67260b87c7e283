"""
Geometry Core

Points, circles, lines and oriented angles, together with the intersection
routines and incidence predicates the chain calculus is built on. All values
are immutable; every function is pure.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from src.core.exceptions import DegenerateGeometryError, IncidenceError

# Configure logging
logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class Point(NamedTuple):
    """A point (or free vector) in the plane."""

    x: float
    y: float

    def __add__(self, other):
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Point(self.x - other.x, self.y - other.y)

    def __mul__(self, factor):
        return Point(self.x * factor, self.y * factor)

    __rmul__ = __mul__

    def __neg__(self):
        return Point(-self.x, -self.y)

    def dot(self, other):
        return self.x * other.x + self.y * other.y

    def cross(self, other):
        return self.x * other.y - self.y * other.x

    def norm(self):
        return math.hypot(self.x, self.y)

    def distance(self, other):
        return math.hypot(self.x - other.x, self.y - other.y)

    def perp(self):
        """Counterclockwise quarter turn."""
        return Point(-self.y, self.x)

    def unit(self):
        length = self.norm()
        if length == 0.0:
            raise DegenerateGeometryError("zero vector has no direction")
        return Point(self.x / length, self.y / length)

    def is_finite(self):
        return math.isfinite(self.x) and math.isfinite(self.y)


def polar(angle, length=1.0):
    """Vector of the given length pointing at ``angle``."""
    return Point(length * math.cos(angle), length * math.sin(angle))


# Angles are plain floats normalized to (-pi, pi].
Angle = float


def normalize_angle(value):
    """
    Normalize an angle to the half-open interval (-pi, pi].

    Args:
        value (float): Angle in radians

    Returns:
        float: Equivalent angle with pi (never -pi) as representative
    """
    result = math.remainder(value, TWO_PI)
    if result <= -math.pi:
        result += TWO_PI
    return result


def ccw_angle(u, v):
    """Counterclockwise rotation from ``u`` to ``v`` in [0, 2pi)."""
    value = math.atan2(u.cross(v), u.dot(v))
    if value < 0.0:
        value += TWO_PI
    return value


@dataclass(frozen=True)
class Circle:
    """
    Circle with center and strictly positive radius.

    Args:
        center (Point): Center of the circle
        radius (float): Radius in scene units
    """

    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.center.is_finite():
            raise DegenerateGeometryError(f"circle center must be finite, got {self.center}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DegenerateGeometryError(f"circle radius must be positive, got {self.radius}")

    def point_at(self, angle):
        """Point of the circle at polar angle ``angle`` about the center."""
        return self.center + polar(angle, self.radius)

    def angle_of(self, point):
        """Polar angle of ``point`` about the center."""
        offset = point - self.center
        return math.atan2(offset.y, offset.x)

    def defect(self, point):
        """Distance of ``point`` from the circle."""
        return abs(point.distance(self.center) - self.radius)

    def contains(self, point, tol):
        """Whether ``point`` lies on the circle within the absolute tolerance."""
        return self.defect(point) <= tol.abs


@dataclass(frozen=True)
class Line:
    """
    Line given by an anchor point and a unit direction.

    Args:
        anchor (Point): Any point of the line
        direction (Point): Unit direction vector
    """

    anchor: Point
    direction: Point

    def __post_init__(self):
        object.__setattr__(self, "anchor", Point(*self.anchor))
        object.__setattr__(self, "direction", Point(*self.direction))
        if abs(self.direction.norm() - 1.0) > 1e-9:
            raise DegenerateGeometryError(f"line direction must be a unit vector, got {self.direction}")

    @classmethod
    def through(cls, p, q):
        """Line through two distinct points, directed from ``p`` to ``q``."""
        return cls(p, (q - p).unit())

    @classmethod
    def from_vector(cls, anchor, vector):
        return cls(anchor, Point(*vector).unit())

    @classmethod
    def from_coefficients(cls, a, b, c):
        """Line ``a*x + b*y = c``."""
        length_sq = a * a + b * b
        if length_sq == 0.0:
            raise DegenerateGeometryError("line coefficients a and b cannot both vanish")
        anchor = Point(a * c / length_sq, b * c / length_sq)
        return cls.from_vector(anchor, Point(b, -a))

    def coefficients(self):
        """Coefficients ``(a, b, c)`` with unit normal such that ``a*x + b*y = c``."""
        normal = self.direction.perp()
        return normal.x, normal.y, normal.dot(self.anchor)

    def distance(self, point):
        """Unsigned distance of ``point`` from the line."""
        return abs(self.direction.cross(point - self.anchor))

    def point_at(self, t):
        return self.anchor + self.direction * t


# ---------------------------------------------------------------------------
# Circle relations
# ---------------------------------------------------------------------------

class CircleRelation:
    """Base class of the possible relations between two circles."""

    has_common_point = False


@dataclass(frozen=True)
class Disjoint(CircleRelation):
    pass


@dataclass(frozen=True)
class Nested(CircleRelation):
    pass


@dataclass(frozen=True)
class Coincident(CircleRelation):
    pass


@dataclass(frozen=True)
class Tangent(CircleRelation):
    """Touching circles; ``internal`` when one circle lies inside the other."""

    contact: Point
    internal: bool = False
    has_common_point = True


@dataclass(frozen=True)
class Intersecting(CircleRelation):
    """Two crossing points: ``a`` left of the directed center line, ``b`` right of it."""

    a: Point
    b: Point
    has_common_point = True


def intersect_circles(c1, c2, tol):
    """
    Classify two circles and compute their common points.

    Args:
        c1 (Circle): First circle
        c2 (Circle): Second circle
        tol (Tolerance): Scene tolerance

    Returns:
        CircleRelation: Disjoint, Nested, Coincident, Tangent or Intersecting
    """
    offset = c2.center - c1.center
    d = offset.norm()
    r1, r2 = c1.radius, c2.radius
    eps = tol.abs

    if d <= eps:
        if abs(r1 - r2) <= eps:
            return Coincident()
        return Nested()

    u = offset * (1.0 / d)
    if abs(d - (r1 + r2)) <= eps:
        return Tangent(c1.center + u * (0.5 * (d + r1 - r2)))
    if abs(d - abs(r1 - r2)) <= eps:
        if r1 >= r2:
            return Tangent(c1.center + u * (0.5 * (r1 + d + r2)), internal=True)
        return Tangent(c1.center + u * (0.5 * (d - r1 - r2)), internal=True)
    if d > r1 + r2:
        return Disjoint()
    if d < abs(r1 - r2):
        return Nested()

    # distance from c1.center to the radical line along the center line
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h = math.sqrt(max((r1 - a) * (r1 + a), 0.0))
    base = c1.center + u * a
    lift = u.perp() * h
    return Intersecting(base + lift, base - lift)


def second_intersection(carrier, circle, known, tol):
    """
    Second intersection of a line with a circle, given one intersection.

    The non-trivial root is taken from the larger-magnitude root of the
    quadratic; the known root is its partner through the root product, so
    neither suffers cancellation.

    Args:
        carrier (Line): Line through ``known``
        circle (Circle): Circle through ``known``
        known (Point): The known intersection
        tol (Tolerance): Scene tolerance

    Returns:
        Point: The other intersection (``known`` itself for a tangent carrier)
    """
    if not circle.contains(known, tol):
        raise IncidenceError(f"point {tuple(known)} is not on circle {circle} (defect {circle.defect(known):.3e})")
    if carrier.distance(known) > tol.abs:
        raise IncidenceError(f"carrier line does not pass through {tuple(known)}")

    w = known - circle.center
    half_b = w.dot(carrier.direction)
    c = w.dot(w) - circle.radius * circle.radius
    disc = max(half_b * half_b - c, 0.0)
    q = -(half_b + math.copysign(math.sqrt(disc), half_b))
    return known + carrier.direction * q


def circumcircle(p, q, r, tol):
    """
    Circle through three points.

    Args:
        p (Point): First point
        q (Point): Second point
        r (Point): Third point
        tol (Tolerance): Scene tolerance

    Returns:
        Circle: The circumcircle
    """
    if p.distance(q) <= tol.abs or q.distance(r) <= tol.abs or r.distance(p) <= tol.abs:
        raise DegenerateGeometryError("circumcircle needs three distinct points")
    b = q - p
    c = r - p
    denom = 2.0 * b.cross(c)
    if abs(denom) <= 2.0 * tol.rel * b.norm() * c.norm():
        raise DegenerateGeometryError(f"points {tuple(p)}, {tuple(q)}, {tuple(r)} are collinear")
    bb = b.dot(b)
    cc = c.dot(c)
    offset = Point((c.y * bb - b.y * cc) / denom, (b.x * cc - c.x * bb) / denom)
    return Circle(p + offset, offset.norm())


def oriented_angle(u, v):
    """
    Oriented angle from ``u`` to ``v``.

    Args:
        u (Point): First vector
        v (Point): Second vector

    Returns:
        float: Angle in (-pi, pi], positive when ``v`` is counterclockwise from ``u``
    """
    if u.norm() == 0.0 or v.norm() == 0.0:
        raise DegenerateGeometryError("oriented angle of a zero vector")
    return normalize_angle(math.atan2(u.cross(v), u.dot(v)))


def tangent_line(circle, at, tol):
    """
    Tangent of ``circle`` at the point ``at``.

    The direction is the outward radial direction turned a quarter
    counterclockwise.
    """
    if not circle.contains(at, tol):
        raise IncidenceError(f"point {tuple(at)} is not on circle {circle}")
    radial = (at - circle.center).unit()
    return Line(at, radial.perp())


def intersect_lines(l1, l2, tol):
    """Unique common point of two lines."""
    denom = l1.direction.cross(l2.direction)
    if abs(denom) <= tol.rel:
        raise DegenerateGeometryError("lines are parallel")
    t = (l2.anchor - l1.anchor).cross(l2.direction) / denom
    return l1.point_at(t)


def reflect_across(point, a, b):
    """Mirror image of ``point`` in the line through ``a`` and ``b``."""
    direction = (b - a).unit()
    offset = point - a
    along = direction * offset.dot(direction)
    return a + along * 2.0 - offset


def other_common_point(c1, c2, known, tol):
    """
    Second common point of two circles through ``known``.

    It is the mirror image of ``known`` in the line of centers, so it
    equals ``known`` when the circles touch there.
    """
    if c1.center.distance(c2.center) <= tol.abs:
        raise DegenerateGeometryError("circles are concentric; no second common point")
    return reflect_across(known, c1.center, c2.center)


def fit_circle(points, tol):
    """
    Algebraic least-squares circle fit.

    Solves ``x^2 + y^2 + D x + E y + F = 0`` in the least-squares sense on
    centered and scaled coordinates.

    Args:
        points (list): At least three points
        tol (Tolerance): Scene tolerance

    Returns:
        tuple: (Circle, residual) with residual the largest radial distance
    """
    if len(points) < 3:
        raise DegenerateGeometryError(f"circle fit needs at least 3 points, got {len(points)}")
    xy = np.asarray([(p.x, p.y) for p in points], dtype=float)
    mean = xy.mean(axis=0)
    shifted = xy - mean
    spread = np.abs(shifted).max()
    if spread <= tol.abs:
        raise DegenerateGeometryError("circle fit on coincident points")
    shifted = shifted / spread

    design = np.column_stack([shifted, np.ones(len(shifted))])
    rhs = -(shifted ** 2).sum(axis=1)
    solution, _, rank, singular = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < 3 or singular[-1] <= tol.rel * singular[0]:
        raise DegenerateGeometryError("circle fit on collinear points")

    d_coef, e_coef, f_coef = solution
    cx, cy = -0.5 * d_coef, -0.5 * e_coef
    radius_sq = cx * cx + cy * cy - f_coef
    if radius_sq <= 0:
        raise DegenerateGeometryError("circle fit produced an imaginary circle")
    circle = Circle(Point(cx * spread + mean[0], cy * spread + mean[1]), math.sqrt(radius_sq) * spread)
    residual = max(circle.defect(p) for p in points)
    logger.debug(f"Fitted circle {circle} to {len(points)} points, residual {residual:.3e}")
    return circle, residual


def point_line_defect(point, p, q):
    """Distance of ``point`` from the line through ``p`` and ``q`` (0 if p == q)."""
    chord = q - p
    length = chord.norm()
    if length == 0.0:
        return 0.0
    return abs(chord.cross(point - p)) / length
