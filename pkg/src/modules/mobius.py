"""
Mobius Module

Fractional-linear maps on points and generalized circles, inversions, and
the conformal-invariance checks of the chain calculus.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.checks import check, check_flag
from src.core.exceptions import DegenerateGeometryError, PoleError
from src.core.geometry import TWO_PI, Circle, Line, Point, circumcircle, normalize_angle, polar
from src.core.tolerance import Tolerance
from src.modules.chain import (
    Chain,
    ExplicitPivot,
    is_closing,
    pivot_map,
    pivot_map_concyclic,
    transfer_angle_formula,
)

# Configure logging
logger = logging.getLogger(__name__)


def _to_complex(p):
    return complex(p[0], p[1])


def _to_point(z):
    return Point(z.real, z.imag)


@dataclass(frozen=True)
class MobiusMap:
    """
    The map z -> (a z + b) / (c z + d) on the complex plane.

    Args:
        a (complex): Coefficient a
        b (complex): Coefficient b
        c (complex): Coefficient c
        d (complex): Coefficient d
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        det = self.determinant
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0.0 or abs(det) <= 1e-14 * scale * scale:
            raise DegenerateGeometryError(f"Mobius map is singular (ad - bc = {det})")

    @property
    def determinant(self):
        return self.a * self.d - self.b * self.c

    @property
    def pole(self):
        """Preimage of infinity, or None for an affine map."""
        if self.c == 0:
            return None
        return _to_point(-self.d / self.c)

    @property
    def image_of_infinity(self):
        """Image of infinity, or None for an affine map."""
        if self.c == 0:
            return None
        return _to_point(self.a / self.c)

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    def compose(self, other):
        """The map ``self`` after ``other``."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self):
        return MobiusMap(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class GeneralizedCircle:
    """
    Circle or line alpha (x^2 + y^2) + beta x + gamma y + delta = 0.

    Coefficients are scaled so that the largest magnitude is 1 and that
    coefficient is positive; alpha == 0 encodes a line.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        coefs = [float(v) for v in (self.alpha, self.beta, self.gamma, self.delta)]
        biggest = max(coefs, key=abs)
        if biggest == 0.0:
            raise DegenerateGeometryError("generalized circle with all coefficients zero")
        coefs = [v / biggest for v in coefs]
        alpha, beta, gamma, delta = coefs
        if beta * beta + gamma * gamma - 4.0 * alpha * delta <= 0.0:
            raise DegenerateGeometryError("generalized circle has no real points")
        for name, value in zip(("alpha", "beta", "gamma", "delta"), coefs):
            object.__setattr__(self, name, value)

    @classmethod
    def from_circle(cls, circle):
        cx, cy = circle.center
        return cls(1.0, -2.0 * cx, -2.0 * cy, cx * cx + cy * cy - circle.radius * circle.radius)

    @classmethod
    def from_line(cls, line):
        a, b, c = line.coefficients()
        return cls(0.0, a, b, -c)

    def is_line(self, eps=1e-12):
        return abs(self.alpha) <= eps

    def to_circle(self):
        if self.is_line():
            raise DegenerateGeometryError("generalized circle is a line")
        cx = -self.beta / (2.0 * self.alpha)
        cy = -self.gamma / (2.0 * self.alpha)
        radius = math.sqrt(max(cx * cx + cy * cy - self.delta / self.alpha, 0.0))
        return Circle(Point(cx, cy), radius)

    def to_line(self):
        if not self.is_line():
            raise DegenerateGeometryError("generalized circle is a proper circle")
        return Line.from_coefficients(self.beta, self.gamma, -self.delta)


def apply_point(m, p, tol=None):
    """
    Image of ``p`` under ``m``.

    Raises:
        PoleError: If ``p`` is the pole of ``m``
    """
    z = _to_complex(p)
    denominator = m.c * z + m.d
    eps = 1e-15 if tol is None else tol.rel
    if abs(denominator) <= eps * (abs(m.c) * abs(z) + abs(m.d)):
        raise PoleError(f"point {tuple(p)} is the pole of the map")
    return _to_point((m.a * z + m.b) / denominator)


def maps_to_line(m, circle, tol):
    """Whether the pole of ``m`` lies on ``circle``."""
    pole = m.pole
    return pole is not None and circle.contains(pole, tol)


def apply_circle(m, circle, tol):
    """
    Image of a circle as a generalized circle.

    Three well-spread points away from the pole are mapped and refitted;
    when the pole lies on the circle the image is the line through the
    images of two points.

    Args:
        m (MobiusMap): The map
        circle (Circle): Source circle
        tol (Tolerance): Scene tolerance

    Returns:
        GeneralizedCircle: The image
    """
    pole = m.pole
    if pole is None or pole.distance(circle.center) <= tol.abs:
        base = 0.0
    else:
        base = circle.angle_of(pole)

    if maps_to_line(m, circle, tol):
        p = apply_point(m, circle.point_at(base + 2.0 * math.pi / 3.0))
        q = apply_point(m, circle.point_at(base - 2.0 * math.pi / 3.0))
        logger.debug(f"Circle {circle} maps to a line")
        return GeneralizedCircle.from_line(Line.through(p, q))

    offsets = (math.pi, math.pi / 3.0, -math.pi / 3.0) if pole is not None else (0.0, TWO_PI / 3.0, -TWO_PI / 3.0)
    images = [apply_point(m, circle.point_at(base + offset)) for offset in offsets]
    image_tol = Tolerance.for_circles((), rel=tol.rel, points=images)
    return GeneralizedCircle.from_circle(circumcircle(*images, image_tol))


def apply_scene(m, chain, tol):
    """
    Image of a chain under ``m``.

    Pivots become explicit image points since the left/right labelling is
    not preserved by Mobius maps.

    Raises:
        PoleError: Listing every circle that would map to a line
    """
    to_lines = [index for index, circle in enumerate(chain.circles) if maps_to_line(m, circle, tol)]
    if to_lines:
        names = ", ".join(f"C{index + 1}" for index in to_lines)
        raise PoleError(f"circles map to lines: {names}")
    circles = tuple(apply_circle(m, circle, tol).to_circle() for circle in chain.circles)
    pivots = tuple(ExplicitPivot(apply_point(m, p)) for p in chain.resolved_pivots(tol))
    return Chain(circles, pivots, closed=chain.closed, doubled=chain.doubled)


def random_mobius(seed, scene_scale, center=Point(0.0, 0.0)):
    """
    Seeded orientation-preserving map z -> alpha + beta / (z - p).

    The pole ``p`` lies between 2.5 and 5 scene scales from ``center``,
    outside twice the bounding disk of a scene of that scale, so no scene
    circle maps to a line and interiors map to interiors.

    Args:
        seed (int): Seed of the generator
        scene_scale (float): Scene diameter
        center (Point, optional): Center of the scene

    Returns:
        MobiusMap: The map
    """
    rng = np.random.default_rng(seed)
    pole = Point(*center) + polar(rng.uniform(0.0, TWO_PI), scene_scale * rng.uniform(2.5, 5.0))
    alpha = complex(*polar(rng.uniform(0.0, TWO_PI), scene_scale * rng.uniform(0.0, 1.0)))
    beta = complex(*polar(rng.uniform(0.0, TWO_PI), scene_scale * scene_scale * rng.uniform(0.5, 2.0)))
    p = _to_complex(pole)
    return MobiusMap(alpha, beta - alpha * p, 1.0, -p)


def invert_point(p, center, power=1.0):
    """Inversion of ``p`` in the circle of the given center and power."""
    offset = Point(*p) - center
    norm2 = offset.dot(offset)
    if norm2 == 0.0:
        raise PoleError(f"point {tuple(p)} is the inversion center")
    return center + offset * (power / norm2)


def invert_circle(circle, center, power=1.0, tol=None):
    """
    Inversion of a circle not passing through ``center``.

    Raises:
        PoleError: If the circle passes through the inversion center
    """
    tol = tol or Tolerance.for_circles((circle,), points=(center,))
    offset = circle.center - center
    denominator = offset.dot(offset) - circle.radius * circle.radius
    if circle.contains(center, tol) or denominator == 0.0:
        raise PoleError("circle through the inversion center maps to a line")
    return Circle(center + offset * (power / denominator), abs(power) * circle.radius / abs(denominator))


def conjugated_pivot_map(c_from, c_to, pivot, anchor_i, x, tol):
    """Pivot map conjugated by the inversion at ``anchor_i``."""
    inv_from = invert_circle(c_from, anchor_i, tol=tol)
    inv_to = invert_circle(c_to, anchor_i, tol=tol)
    inv_tol = Tolerance.for_circles((inv_from, inv_to), rel=tol.rel)
    image = pivot_map(inv_from, inv_to, invert_point(pivot, anchor_i), invert_point(x, anchor_i), inv_tol)
    return invert_point(image, anchor_i)


def invariance_report(chain, m, anchor, tol, probes=4, seed=0):
    """
    Conformal invariance checks of a chain under ``m``.

    Checks per joint: the transfer angle, commutation of the pivot map with
    ``m`` and, when ``anchor`` is given, the inversion conjugacy of the
    concyclic pivot map. Finally the closing decision itself.

    Args:
        chain (Chain): A closed chain
        m (MobiusMap): The map
        anchor (Point, optional): Anchor I of the concyclic pivot maps
        tol (Tolerance): Scene tolerance
        probes (int, optional): Probe points per joint
        seed (int, optional): Seed of the probe positions

    Returns:
        list: CheckResult records
    """
    image = apply_scene(m, chain, tol)
    image_tol = Tolerance.for_circles(image.circles, rel=tol.rel)
    angle_bound = 10.0 * tol.rel
    rng = np.random.default_rng(seed)

    results = []
    pivots = chain.resolved_pivots(tol)
    image_pivots = image.resolved_pivots(image_tol)
    # m carries the chord through the pivot to a circle through the image of infinity
    image_anchor = m.image_of_infinity

    for index, pivot in enumerate(pivots):
        c_from, c_to = chain.joint(index)
        i_from, i_to = image.joint(index)
        before = transfer_angle_formula(c_from, c_to, pivot, tol).mu
        after = transfer_angle_formula(i_from, i_to, image_pivots[index], image_tol).mu
        results.append(
            check(f"joint {index + 1} transfer angle", abs(normalize_angle(after - before)), angle_bound, value=after)
        )

        worst = 0.0
        worst_conjugacy = 0.0
        for angle in rng.uniform(0.0, TWO_PI, size=probes):
            x = c_from.point_at(angle)
            y = pivot_map(c_from, c_to, pivot, x, tol)
            mx = apply_point(m, x)
            if image_anchor is None:
                expected = pivot_map(i_from, i_to, image_pivots[index], mx, image_tol)
            else:
                expected = pivot_map_concyclic(i_from, i_to, image_pivots[index], image_anchor, mx, image_tol)
            worst = max(worst, apply_point(m, y).distance(expected))
            if anchor is not None:
                direct = pivot_map_concyclic(c_from, c_to, pivot, anchor, x, tol)
                conjugated = conjugated_pivot_map(c_from, c_to, pivot, anchor, x, tol)
                worst_conjugacy = max(worst_conjugacy, direct.distance(conjugated))
        results.append(check(f"joint {index + 1} pivot map commutation", worst, 10.0 * image_tol.abs))
        if anchor is not None:
            results.append(check(f"joint {index + 1} concyclic conjugacy", worst_conjugacy, 10.0 * tol.abs))

    if chain.closed:
        before = is_closing(chain, tol)
        after = is_closing(image, image_tol)
        results.append(check_flag("closing preserved", before == after, value=float(after)))
    logger.debug(f"Invariance report: {sum(r.passed for r in results)}/{len(results)} checks passed")
    return results
