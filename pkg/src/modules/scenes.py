"""
Scene Generators

Seeded generators for every named chain configuration. Each output
satisfies the closing statement it illustrates by construction, so the
generators never consult the closing criterion they are used to test.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.exceptions import CircleChainError, DegenerateGeometryError, GenerationError
from src.core.geometry import (
    TWO_PI,
    Circle,
    Intersecting,
    Line,
    Point,
    Tangent,
    circumcircle,
    intersect_circles,
    intersect_lines,
    normalize_angle,
    oriented_angle,
    polar,
    reflect_across,
)
from src.core.tolerance import Tolerance
from src.modules.chain import (
    Chain,
    ExplicitPivot,
    PivotSide,
    label_pivot,
    transfer_angle_formula,
)

# Configure logging
logger = logging.getLogger(__name__)

MAX_RETRIES = 200
MAX_RADIUS = 20.0
EXTENSION_PROBABILITY = 0.2


class SceneKind(str, Enum):
    POLYGON = "polygon"
    COMMON_POINT = "common_point"
    TOUCHING = "touching"
    QUADRILATERAL = "quadrilateral"
    N_LINES = "n_lines"
    RATIONAL = "rational"
    OPEN_POLYGON = "open_polygon"
    RANDOM = "random"


MIN_CIRCLES = {
    SceneKind.POLYGON: 3,
    SceneKind.COMMON_POINT: 3,
    SceneKind.TOUCHING: 3,
    SceneKind.QUADRILATERAL: 4,
    SceneKind.N_LINES: 4,
    SceneKind.RATIONAL: 3,
    SceneKind.OPEN_POLYGON: 2,
    SceneKind.RANDOM: 3,
}


@dataclass(frozen=True)
class SceneSpec:
    """
    What to generate.

    Args:
        kind (SceneKind): Generator kind
        n (int): Number of circles
        seed (int): Seed of the generator
        params (dict, optional): Kind-specific parameters (``p``, ``q``, ``companion``)
    """

    kind: SceneKind
    n: int
    seed: int
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", SceneKind(self.kind))
        minimum = MIN_CIRCLES[self.kind]
        if self.n < minimum:
            raise GenerationError(f"{self.kind.value} scenes need n >= {minimum}, got {self.n}")
        if self.kind is SceneKind.QUADRILATERAL and self.n != 4:
            raise GenerationError(f"quadrilateral scenes have n = 4, got {self.n}")
        if self.kind is SceneKind.RATIONAL:
            _check_ratio(int(self.params.get("p", 1)), int(self.params.get("q", 3)))
        if self.kind is SceneKind.OPEN_POLYGON and self.params.get("companion") and self.n < 3:
            raise GenerationError(f"companion open chains need n >= 3, got {self.n}")


def _check_ratio(p, q):
    if q < 1 or math.gcd(p, q) != 1 or (q == 1 and p != 0):
        raise GenerationError(f"rational scenes need coprime p/q with q >= 2 (or 0/1), got {p}/{q}")


@dataclass(frozen=True)
class LineArrangement:
    """
    Lines in general position, directed along the polygon of consecutive meets.

    Args:
        lines (tuple): l_1 ... l_n
        exterior_angles (tuple): omega_i at the vertex A_i = l_i meet l_(i+1)
        half_turns (tuple): 0 or 1 per vertex, see exterior_half_turns
    """

    lines: Tuple[Line, ...]
    exterior_angles: Tuple[float, ...]
    half_turns: Tuple[int, ...] = ()

    def vertex(self, index, tol):
        n = len(self.lines)
        return intersect_lines(self.lines[index % n], self.lines[(index + 1) % n], tol)


@dataclass(frozen=True)
class GeneratedScene:
    """A generated chain with its start point and generator metadata."""

    spec: SceneSpec
    chain: Chain
    start: Point
    witness: Optional[Point] = None
    arrangement: Optional[LineArrangement] = None
    meta: Dict[str, object] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------

def _star_polygon(rng, n, radius_range=(0.5, 1.5)):
    """Vertices at sorted random angles; rejects crowded angle sets."""
    while True:
        angles = np.sort(rng.uniform(0.0, TWO_PI, size=n))
        gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
        if gaps.min() >= 0.25 * TWO_PI / n:
            break
    radii = rng.uniform(*radius_range, size=n)
    return [polar(a, r) for a, r in zip(angles, radii)]


def _side_parameter(rng):
    if rng.random() < EXTENSION_PROBABILITY:
        if rng.random() < 0.5:
            return rng.uniform(1.15, 1.6)
        return rng.uniform(-0.6, -0.15)
    return rng.uniform(0.15, 0.85)


def _circle_through(p, q, r, tol):
    """Circumcircle of a well-conditioned triple, else None."""
    b = q - p
    c = r - p
    if min(b.norm(), c.norm(), (r - q).norm()) <= 1e-3:
        return None
    if abs(b.cross(c)) <= 1e-3 * b.norm() * c.norm():
        return None
    circle = circumcircle(p, q, r, tol)
    if circle.radius > MAX_RADIUS:
        return None
    return circle


def _joint_ok(c_from, c_to, pivot, tol, margin=1e-2):
    """Genuinely intersecting joint whose two common points are well apart."""
    relation = intersect_circles(c_from, c_to, tol)
    if not isinstance(relation, Intersecting):
        return False
    if relation.a.distance(relation.b) <= margin * min(c_from.radius, c_to.radius):
        return False
    return min(relation.a.distance(pivot), relation.b.distance(pivot)) <= 1e3 * tol.abs


def _labelled_pivots(circles, points, closed=True):
    n = len(circles)
    count = n if closed else n - 1
    return tuple(label_pivot(circles[i], circles[(i + 1) % n], points[i]) for i in range(count))


def _seeded_start(rng, circle):
    return circle.point_at(rng.uniform(0.0, TWO_PI))


def _retry(name, attempt_fn, rng):
    for attempt in range(MAX_RETRIES):
        try:
            result = attempt_fn(rng)
        except (DegenerateGeometryError, CircleChainError) as exc:
            logger.debug(f"{name}: attempt {attempt + 1} rejected ({exc})")
            continue
        if result is not None:
            if attempt:
                logger.debug(f"{name}: accepted after {attempt + 1} attempts")
            return result
    raise GenerationError(f"{name}: no valid scene after {MAX_RETRIES} attempts")


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def gen_polygon_chain(n, seed):
    """
    Closed chain built around a closed polygon X_1 ... X_n.

    A pivot A_i is placed on every (extended) side X_i X_(i+1) and
    C_i = circumcircle(A_(i-1), X_i, A_i). The pivot maps send X_i to
    X_(i+1), so the chain closes at the witness X_1.

    Args:
        n (int): Number of circles, at least 3
        seed (int): Seed of the generator

    Returns:
        tuple: (Chain, witness)
    """
    if n < 3:
        raise GenerationError(f"polygon chains need n >= 3, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        vertices = _star_polygon(rng, n)
        pivots = [vertices[i] + (vertices[(i + 1) % n] - vertices[i]) * _side_parameter(rng) for i in range(n)]
        tol = Tolerance.for_circles((), points=vertices + pivots)
        circles = []
        for i in range(n):
            circle = _circle_through(pivots[i - 1], vertices[i], pivots[i], tol)
            if circle is None:
                return None
            circles.append(circle)
        tol = Tolerance.for_circles(circles)
        if not all(_joint_ok(circles[i], circles[(i + 1) % n], pivots[i], tol) for i in range(n)):
            return None
        return Chain(tuple(circles), _labelled_pivots(circles, pivots)), vertices[0]

    return _retry("gen_polygon_chain", attempt, rng)


def gen_open_polygon(n, seed, companion=False):
    """
    Open chain built around an open polygon X_1 ... X_n.

    With ``companion`` the last circle is tuned inside the family of
    circles through A_(n-1) and X_n until the forward transfer angles sum
    to a multiple of pi, which makes the companion doubling close as well.

    Args:
        n (int): Number of circles, at least 2
        seed (int): Seed of the generator
        companion (bool, optional): Tune for the companion-pivot return leg

    Returns:
        tuple: (Chain, witness)
    """
    if n < 2:
        raise GenerationError(f"open polygon chains need n >= 2, got {n}")
    if companion and n < 3:
        # a single forward joint sums to a multiple of pi only when it touches
        raise GenerationError(f"companion open chains need n >= 3, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        vertices = _star_polygon(rng, n + 1)[:n]
        pivots = [vertices[i] + (vertices[i + 1] - vertices[i]) * _side_parameter(rng) for i in range(n - 1)]
        first_extra = vertices[0] + polar(rng.uniform(0.0, TWO_PI), rng.uniform(0.5, 1.5))
        last_extra = vertices[-1] + polar(rng.uniform(0.0, TWO_PI), rng.uniform(0.5, 1.5))
        tol = Tolerance.for_circles((), points=vertices + pivots + [first_extra, last_extra])

        triples = []
        for i in range(n):
            before = first_extra if i == 0 else pivots[i - 1]
            after = last_extra if i == n - 1 else pivots[i]
            triples.append((before, vertices[i], after))
        circles = [_circle_through(*triple, tol) for triple in triples]
        if any(circle is None for circle in circles):
            return None

        if companion:
            fixed = [
                transfer_angle_formula(circles[i], circles[i + 1], pivots[i], tol).mu for i in range(n - 2)
            ]

            def objective(candidate):
                local = Tolerance.for_circles(circles[:-1] + [candidate])
                if not _joint_ok(circles[-2], candidate, pivots[-1], local):
                    return None
                mu = transfer_angle_formula(circles[-2], candidate, pivots[-1], local).mu
                return normalize_angle(2.0 * (math.fsum(fixed) + mu))

            tuned = _solve_family(pivots[-1], vertices[-1], objective, circles[-1])
            if tuned is None:
                return None
            circles[-1] = tuned

        tol = Tolerance.for_circles(circles)
        if not all(_joint_ok(circles[i], circles[i + 1], pivots[i], tol) for i in range(n - 1)):
            return None
        chain = Chain(tuple(circles), _labelled_pivots(circles, pivots, closed=False), closed=False)
        return chain, vertices[0]

    return _retry("gen_open_polygon", attempt, rng)


def gen_common_point(n, seed):
    """
    Closed chain of circles through one common point B; pivots are the other intersections.

    Args:
        n (int): Number of circles, at least 3
        seed (int): Seed of the generator

    Returns:
        Chain: The chain
    """
    if n < 3:
        raise GenerationError(f"common point chains need n >= 3, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        common = Point(*rng.uniform(-1.0, 1.0, size=2))
        angles = rng.uniform(0.0, TWO_PI, size=n)
        radii = rng.uniform(0.5, 1.5, size=n)
        circles = [Circle(common + polar(a, r), r) for a, r in zip(angles, radii)]
        # neighbouring centers collinear with B would make the circles touch at B
        for i in range(n):
            if abs(math.sin(angles[(i + 1) % n] - angles[i])) < 0.1:
                return None
        pivots = [reflect_across(common, circles[i].center, circles[(i + 1) % n].center) for i in range(n)]
        tol = Tolerance.for_circles(circles)
        if not all(_joint_ok(circles[i], circles[(i + 1) % n], pivots[i], tol) for i in range(n)):
            return None
        return Chain(tuple(circles), _labelled_pivots(circles, pivots)), common

    chain, common = _retry("gen_common_point", attempt, rng)
    logger.debug(f"Common point chain through {tuple(common)}")
    return chain


def gen_touching_chain(n, seed):
    """
    Closed chain of neighbouring circles touching externally.

    Radii come first; the centers form a cyclic polygon with sides
    r_i + r_(i+1), whose circumradius solves sum 2 asin(L_i / 2R) = 2 pi.

    Args:
        n (int): Number of circles, at least 3
        seed (int): Seed of the generator

    Returns:
        Chain: The chain; every joint is a Tangent joint
    """
    if n < 3:
        raise GenerationError(f"touching chains need n >= 3, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        radii = rng.uniform(0.5, 1.5, size=n)
        sides = radii + np.roll(radii, -1)
        longest = sides.max()

        def excess(big_r):
            return float(np.sum(2.0 * np.arcsin(np.clip(sides / (2.0 * big_r), -1.0, 1.0)))) - TWO_PI

        # the circumcenter has to lie inside the center polygon
        if excess(0.5 * longest) <= 0.0:
            return None
        big_r = brentq(excess, 0.5 * longest, float(sides.sum()), xtol=1e-15, rtol=4 * np.finfo(float).eps)
        turn = rng.uniform(0.0, TWO_PI)
        origin = Point(*rng.uniform(-1.0, 1.0, size=2))
        steps = 2.0 * np.arcsin(np.clip(sides / (2.0 * big_r), -1.0, 1.0))
        angles = turn + np.concatenate([[0.0], np.cumsum(steps)[:-1]])
        circles = [Circle(origin + polar(a, big_r), r) for a, r in zip(angles, radii)]

        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                gap = circles[i].center.distance(circles[j].center) - circles[i].radius - circles[j].radius
                if gap <= 1e-2:
                    return None
        tol = Tolerance.for_circles(circles)
        for i in range(n):
            relation = intersect_circles(circles[i], circles[(i + 1) % n], tol)
            if not isinstance(relation, Tangent):
                return None
        return Chain(tuple(circles), (PivotSide.A,) * n)

    return _retry("gen_touching_chain", attempt, rng)


def _exterior_angles(vertices):
    n = len(vertices)
    return tuple(
        oriented_angle(vertices[(i + 1) % n] - vertices[i], vertices[i] - vertices[i - 1]) for i in range(n)
    )


def exterior_half_turns(vertices, tol):
    """
    Half turns separating each transfer angle from its exterior-angle value.

    With l_i directed from A_(i-1) to A_i, mu_i equals
    2 pi - (omega_(i-1) + omega_i + omega_(i+1)) exactly when the meet of
    l_i and l_(i+2) lies ahead of A_i and the lines turn the same way from
    l_(i-1) to l_(i+1) as from l_(i+1) to l_(i+2). Each condition that fails
    adds pi.

    Args:
        vertices (list): The polygon A_1 ... A_n, at least four vertices
        tol (Tolerance): Tolerance of the line meets

    Returns:
        tuple: 0 or 1 per vertex
    """
    n = len(vertices)
    turns = []
    for i in range(n):
        prev2, prev, here = vertices[i - 2], vertices[i - 1], vertices[i]
        after, after2 = vertices[(i + 1) % n], vertices[(i + 2) % n]
        meet = intersect_lines(Line.through(prev, here), Line.through(after, after2), tol)
        behind = (meet - here).dot(here - prev) < 0.0
        outer = (prev - prev2).cross(after - here) < 0.0
        inner = (after - here).cross(after2 - after) < 0.0
        turns.append(int(behind ^ (outer != inner)))
    return tuple(turns)



def _general_position(lines, tol):
    n = len(lines)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(lines[i].direction.cross(lines[j].direction)) <= 1e-2:
                return False
    for i in range(n):
        for j in range(i + 1, n):
            meet = intersect_lines(lines[i], lines[j], tol)
            for k in range(j + 1, n):
                if lines[k].distance(meet) <= 1e-3:
                    return False
    return True


def gen_line_arrangement(n, seed):
    """
    Chain of the triangle circumcircles of n lines in general position.

    Pivots are A_i = l_i meet l_(i+1) and C_i is the circumcircle of the
    triangle l_(i-1), l_i, l_(i+1).

    Args:
        n (int): Number of lines, at least 4
        seed (int): Seed of the generator

    Returns:
        tuple: (LineArrangement, Chain)
    """
    if n < 4:
        raise GenerationError(f"line arrangements need n >= 4, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        vertices = _star_polygon(rng, n)
        lines = [Line.through(vertices[i - 1], vertices[i]) for i in range(n)]
        tol = Tolerance.for_circles((), points=vertices)
        if not _general_position(lines, tol):
            return None
        # A_i = l_i meet l_(i+1) is vertices[i] with this indexing
        pivots = [vertices[i] for i in range(n)]
        circles = []
        for i in range(n):
            apex = intersect_lines(lines[i - 1], lines[(i + 1) % n], tol)
            circle = _circle_through(pivots[i - 1], pivots[i], apex, tol)
            if circle is None:
                return None
            circles.append(circle)
        tol = Tolerance.for_circles(circles)
        if not all(_joint_ok(circles[i], circles[(i + 1) % n], pivots[i], tol) for i in range(n)):
            return None
        arrangement = LineArrangement(tuple(lines), _exterior_angles(vertices), exterior_half_turns(vertices, tol))
        return arrangement, Chain(tuple(circles), _labelled_pivots(circles, pivots))

    return _retry("gen_line_arrangement", attempt, rng)


def _random_cyclic_circles(rng, n):
    """Circles around a unit circle whose neighbours genuinely intersect."""
    chord = 2.0 * math.sin(math.pi / n)
    angles = TWO_PI * np.arange(n) / n + rng.uniform(-0.15, 0.15, size=n) * math.pi / n
    radii = rng.uniform(0.7, 1.1, size=n) * chord
    origin = Point(*rng.uniform(-1.0, 1.0, size=2))
    return [Circle(origin + polar(a, 1.0), r) for a, r in zip(angles, radii)]


def gen_random_chain(n, seed):
    """
    Arbitrary closed chain with genuinely intersecting neighbours and random pivot labels.

    No closing property holds in general.
    """
    if n < 3:
        raise GenerationError(f"random chains need n >= 3, got {n}")
    rng = np.random.default_rng(seed)

    def attempt(rng):
        circles = _random_cyclic_circles(rng, n)
        sides = tuple(PivotSide.A if bit else PivotSide.B for bit in rng.integers(0, 2, size=n))
        chain = Chain(tuple(circles), sides)
        tol = Tolerance.for_circles(circles)
        points = chain.resolved_pivots(tol)
        if not all(_joint_ok(circles[i], circles[(i + 1) % n], points[i], tol) for i in range(n)):
            return None
        return chain

    return _retry("gen_random_chain", attempt, rng)


def _family_circle(p1, p2, curvature):
    """Circle through p1 and p2 with the given signed curvature (positive: center left of p1->p2)."""
    half = 0.5 * p1.distance(p2)
    radius = 1.0 / abs(curvature)
    offset = math.copysign(math.sqrt(max(radius * radius - half * half, 0.0)), curvature)
    normal = (p2 - p1).unit().perp()
    return Circle((p1 + p2) * 0.5 + normal * offset, radius)


def _solve_family(p1, p2, objective, reference=None, samples=400):
    """
    Root of a wrapped angle objective over the circles through p1 and p2.

    The signed curvature is scanned on a grid; brackets whose ends straddle
    zero away from the wrap-around are refined with brentq. Among the roots
    the circle closest in curvature to ``reference`` wins.

    Args:
        p1 (Point): First fixed point
        p2 (Point): Second fixed point
        objective (callable): Circle -> wrapped value in (-pi, pi], or None if invalid
        reference (Circle, optional): Preferred family member
        samples (int, optional): Grid size

    Returns:
        Circle or None: The solution
    """
    half = 0.5 * p1.distance(p2)
    limit = (1.0 - 1e-6) / half
    grid = np.linspace(-limit, limit, samples)
    grid = grid[np.abs(grid) >= 1.0 / MAX_RADIUS]

    def value(kappa):
        try:
            result = objective(_family_circle(p1, p2, kappa))
        except (DegenerateGeometryError, CircleChainError):
            return None
        return None if result is None else float(result)

    def strict(kappa):
        result = value(kappa)
        if result is None:
            raise ValueError(f"objective undefined at curvature {kappa}")
        return result

    values = [value(k) for k in grid]
    target = 0.0
    if reference is not None:
        side = (p2 - p1).cross(reference.center - p1)
        target = math.copysign(1.0 / reference.radius, side if side != 0 else 1.0)

    roots = []
    for k0, k1, v0, v1 in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if v0 is None or v1 is None or k0 * k1 <= 0:
            continue
        if v0 == 0.0:
            roots.append(k0)
            continue
        if v0 * v1 > 0 or abs(v0 - v1) > math.pi:
            continue
        try:
            root = brentq(strict, k0, k1, xtol=1e-15)
        except ValueError:
            continue
        residual = value(root)
        if residual is not None and abs(residual) <= 1e-9:
            roots.append(root)
    if not roots:
        return None
    best = min(roots, key=lambda k: abs(k - target))
    return _family_circle(p1, p2, best)


def gen_rational_chain(n, p, q, seed):
    """
    Closed chain whose transfer angles sum to 2 pi p / q.

    The first n - 1 circles and both boundary pivots are random; the last
    circle is solved for in the family of circles through the two boundary
    pivots. The chain closes after exactly q rounds.

    Args:
        n (int): Number of circles, at least 3
        p (int): Numerator
        q (int): Denominator, coprime to p
        seed (int): Seed of the generator

    Returns:
        Chain: The chain; the last two pivots are explicit points
    """
    if n < 3:
        raise GenerationError(f"rational chains need n >= 3, got {n}")
    _check_ratio(p, q)
    rng = np.random.default_rng(seed)
    goal = TWO_PI * p / q

    def attempt(rng):
        circles = _random_cyclic_circles(rng, n)
        sides = [PivotSide.A if bit else PivotSide.B for bit in rng.integers(0, 2, size=n)]
        chain = Chain(tuple(circles), tuple(sides))
        tol = Tolerance.for_circles(circles)
        points = chain.resolved_pivots(tol)
        enter, leave = points[n - 2], points[n - 1]
        fixed = math.fsum(
            transfer_angle_formula(circles[i], circles[i + 1], points[i], tol).mu for i in range(n - 2)
        )

        def objective(candidate):
            local = Tolerance.for_circles(circles[:-1] + [candidate])
            if not (_joint_ok(circles[-2], candidate, enter, local) and _joint_ok(candidate, circles[0], leave, local)):
                return None
            total = (
                fixed
                + transfer_angle_formula(circles[-2], candidate, enter, local).mu
                + transfer_angle_formula(candidate, circles[0], leave, local).mu
            )
            return normalize_angle(total - goal)

        last = _solve_family(enter, leave, objective, circles[-1])
        if last is None:
            return None
        circles[-1] = last
        pivots = tuple(sides[: n - 2]) + (ExplicitPivot(enter), ExplicitPivot(leave))
        return Chain(tuple(circles), pivots)

    return _retry("gen_rational_chain", attempt, rng)


def generate(spec):
    """
    Dispatch a SceneSpec to its generator.

    Args:
        spec (SceneSpec): What to generate

    Returns:
        GeneratedScene: Chain, start point and metadata
    """
    logger.info(f"Generating {spec.kind.value} scene n={spec.n} seed={spec.seed}")
    meta = {"kind": spec.kind.value, "n": spec.n, "seed": spec.seed}
    witness = None
    arrangement = None

    if spec.kind is SceneKind.POLYGON:
        chain, witness = gen_polygon_chain(spec.n, spec.seed)
    elif spec.kind is SceneKind.OPEN_POLYGON:
        companion = bool(spec.params.get("companion", False))
        chain, witness = gen_open_polygon(spec.n, spec.seed, companion=companion)
        meta["companion"] = companion
    elif spec.kind is SceneKind.COMMON_POINT:
        chain = gen_common_point(spec.n, spec.seed)
    elif spec.kind is SceneKind.TOUCHING:
        chain = gen_touching_chain(spec.n, spec.seed)
    elif spec.kind in (SceneKind.QUADRILATERAL, SceneKind.N_LINES):
        arrangement, chain = gen_line_arrangement(spec.n, spec.seed)
        meta["lines"] = [list(line.coefficients()) for line in arrangement.lines]
        meta["exterior_angles"] = list(arrangement.exterior_angles)
        meta["half_turns"] = list(arrangement.half_turns)
    elif spec.kind is SceneKind.RATIONAL:
        p, q = int(spec.params.get("p", 1)), int(spec.params.get("q", 3))
        chain = gen_rational_chain(spec.n, p, q, spec.seed)
        meta.update(p=p, q=q)
    elif spec.kind is SceneKind.RANDOM:
        chain = gen_random_chain(spec.n, spec.seed)
    else:
        raise ValueError(f"Unknown scene kind: {spec.kind}")

    if witness is not None:
        start = witness
        meta["witness"] = [witness.x, witness.y]
    else:
        # independent stream so the start does not perturb the scene itself
        start = _seeded_start(np.random.default_rng([spec.seed, 1]), chain.circles[0])
    return GeneratedScene(spec, chain, start, witness, arrangement, meta)
