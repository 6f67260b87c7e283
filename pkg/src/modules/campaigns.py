"""
Verification Campaigns

The theorem suite of every scene kind and the seeded sweep that runs it
over many generated scenes.
"""

import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional

import numpy as np
from tqdm import tqdm

from src.core.checks import check, check_flag
from src.core.exceptions import CircleChainError
from src.core.geometry import TWO_PI, Line, Point, normalize_angle, oriented_angle, other_common_point
from src.core.tolerance import DEFAULT_REL, Tolerance
from src.modules.chain import (
    PivotSide,
    ab_chain,
    central_angle_drift,
    closure_order,
    closure_residual,
    doubled_chain,
    is_closing,
    iterate,
    sample_starts,
    transfer_angle_formula,
    transfer_angle_measured,
    transfer_angle_tangent,
    transfer_report,
)
from src.modules.incidence import steiner_report
from src.modules.scenes import SceneKind, SceneSpec, exterior_half_turns, generate

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_STARTS = 20
SWEEP_KINDS = tuple(kind.value for kind in SceneKind)
SIZE_RANGES = {
    SceneKind.POLYGON: (3, 12),
    SceneKind.COMMON_POINT: (3, 5),
    SceneKind.TOUCHING: (3, 8),
    SceneKind.QUADRILATERAL: (4, 4),
    SceneKind.N_LINES: (4, 6),
    SceneKind.RATIONAL: (3, 5),
    SceneKind.OPEN_POLYGON: (3, 6),
    SceneKind.RANDOM: (3, 8),
}
RATIONAL_DENOMINATORS = (2, 3, 5, 7)


def closing_checks(chain, tol, starts=DEFAULT_STARTS, seed=0):
    """
    The closing decision of a chain and, when it closes, the polygon closure from seeded starts.

    Open chains are decided through their doubled chain.
    """
    if not chain.closed:
        chain = doubled_chain(chain, tol=tol)
    report = transfer_report(chain, tol)
    n = chain.joint_count
    results = [check("closing defect", abs(report.closing_defect), n * tol.rel, value=report.total)]
    if results[0].passed:
        residual = closure_residual(chain, starts, 1, tol, seed=seed)
        results.append(check("polygon closes", residual, n * tol.abs))
    return results


def _route_checks(chain, tol, pivots):
    worst_routes = 0.0
    worst_antisymmetry = 0.0
    for index, pivot in enumerate(pivots):
        c_from, c_to = chain.joint(index)
        formula = transfer_angle_formula(c_from, c_to, pivot, tol).mu
        measured = transfer_angle_measured(c_from, c_to, pivot, tol)
        tangent = transfer_angle_tangent(c_from, c_to, pivot, tol)
        for a, b in ((formula, measured), (formula, tangent), (measured, tangent)):
            worst_routes = max(worst_routes, abs(normalize_angle(a - b)))
        other = other_common_point(c_from, c_to, pivot, tol)
        if other.distance(pivot) > tol.abs:
            mirrored = transfer_angle_formula(c_from, c_to, other, tol).mu
            worst_antisymmetry = max(worst_antisymmetry, abs(normalize_angle(formula + mirrored)))
    return [
        check("transfer angle routes agree", worst_routes, 10.0 * tol.rel),
        check("transfer angle antisymmetry", worst_antisymmetry, 10.0 * tol.rel),
    ]


def _regular_visits(chain, q, p, tol, seed):
    start = sample_starts(chain.circles[0], 1, seed)[0]
    trace = iterate(chain, start, q, tol)
    center = chain.circles[0].center
    visits = trace.vertices[:: chain.joint_count]
    step = normalize_angle(TWO_PI * p / q)
    worst = 0.0
    for a, b in zip(visits[:-1], visits[1:]):
        if a.distance(b) <= tol.abs:
            angle = 0.0
        else:
            angle = oriented_angle(a - center, b - center)
        worst = max(worst, abs(normalize_angle(angle - step)))
    return worst


def _exterior_angle_checks(chain, tol, pivots, omegas):
    n = len(omegas)
    turns = exterior_half_turns(pivots, tol)
    worst = 0.0
    for i in range(n):
        mu = transfer_angle_formula(*chain.joint(i), pivots[i], tol).mu
        expected = TWO_PI - (omegas[i - 1] + omegas[i] + omegas[(i + 1) % n]) + math.pi * turns[i]
        worst = max(worst, abs(normalize_angle(mu - expected)))
    total = math.fsum(omegas)
    return [
        check("transfer angle from exterior angles", worst, 10.0 * tol.rel),
        check("exterior angles sum to whole turns", abs(normalize_angle(total)), 0.1 * tol.rel, value=total),
    ]


def sample_anchor(chain, tol, seed):
    """Seeded anchor well away from every circle of the chain."""
    rng = np.random.default_rng([seed, 7])
    centers = [c.center for c in chain.circles]
    middle = Point(sum(p.x for p in centers) / len(centers), sum(p.y for p in centers) / len(centers))
    for _ in range(100):
        anchor = middle + Point(*rng.uniform(-0.5, 0.5, size=2)) * tol.scene_scale
        if all(abs(circle.center.distance(anchor) - circle.radius) > 0.05 * tol.scene_scale for circle in chain.circles):
            return anchor
    return None


def verify_scene_checks(kind, chain, tol, meta=None, start=None, anchor=None, starts=DEFAULT_STARTS, seed=0):
    """
    Run the theorem suite of a scene kind.

    Args:
        kind (str): Scene kind; unknown kinds get the generic closing checks
        chain (Chain): The scene chain
        tol (Tolerance): Scene tolerance
        meta (dict, optional): Generator metadata (p, q, lines, exterior angles, witness)
        start (Point, optional): Scene start on the first circle
        anchor (Point, optional): Anchor of the concyclic pivot maps
        starts (int, optional): Seeded starts per closure check
        seed (int, optional): Seed of the starts

    Returns:
        list: CheckResult records
    """
    meta = meta or {}
    try:
        kind = SceneKind(kind)
    except ValueError:
        return closing_checks(chain, tol, starts, seed)

    if kind is SceneKind.OPEN_POLYGON:
        return _open_chain_checks(chain, tol, meta, start, starts, seed)

    n = chain.joint_count
    bound = n * tol.abs
    pivots = chain.resolved_pivots(tol)
    report = transfer_report(chain, tol)
    results = []
    touching = kind is SceneKind.TOUCHING
    expect_closing = kind is not SceneKind.RANDOM and not (touching and n % 2)
    if kind is SceneKind.RATIONAL:
        expect_closing = int(meta.get("q", 1)) == 1

    if expect_closing:
        results += closing_checks(chain, tol, starts, seed)
    if start is not None and kind is SceneKind.POLYGON:
        trace = iterate(chain, start, 1, tol)
        results.append(check("witness returns", trace.vertices[-1].distance(start), bound))

    results += _route_checks(chain, tol, pivots)
    a, b = sample_starts(chain.circles[0], 2, seed)
    results.append(check("central angle drift", central_angle_drift(chain, a, b, tol), 10.0 * tol.rel))

    if not touching:
        ab = ab_chain(chain, tol)
        results.append(check("AB composition returns", closure_residual(ab, starts, 1, tol, seed=seed), 2 * bound))
        if expect_closing and all(isinstance(p, PivotSide) for p in chain.pivots):
            flipped = chain.flipped()
            results.append(check_flag("B pivots close", is_closing(flipped, tol)))
            results.append(check("B polygon closes", closure_residual(flipped, starts, 1, tol, seed=seed), bound))

    if touching:
        if n % 2:
            results.append(
                check("odd touching defect is pi", abs(abs(report.closing_defect) - math.pi), n * tol.rel)
            )
            order = closure_order(chain, 4, tol, seed=seed)
            results.append(check_flag("odd touching closes after two rounds", order == 2, value=order or 0))
        results.append(check("touching total is n pi", abs(report.total - n * math.pi), n * tol.rel, value=report.total))

    if kind is SceneKind.RATIONAL:
        p, q = int(meta.get("p", 0)), int(meta.get("q", 1))
        order = closure_order(chain, 2 * q, tol, seed=seed)
        results.append(check_flag(f"closes after exactly {q} rounds", order == q, value=order or 0))
        results.append(check("visits form a regular polygon", _regular_visits(chain, q, p, tol, seed), 10.0 * tol.rel))

    if kind in (SceneKind.QUADRILATERAL, SceneKind.N_LINES) and "exterior_angles" in meta:
        results += _exterior_angle_checks(chain, tol, pivots, [float(w) for w in meta["exterior_angles"]])

    if kind is SceneKind.QUADRILATERAL and "lines" in meta:
        lines = [Line.from_coefficients(*coefs) for coefs in meta["lines"]]
        for position in sample_starts(chain.circles[0], max(1, starts // 2), seed):
            steiner = steiner_report(lines, position, tol)
            results += [r._replace(name=f"steiner {r.name}") for r in steiner.checks(10.0 * tol.abs)]

    if expect_closing:
        if anchor is None and kind is SceneKind.COMMON_POINT:
            anchor = sample_anchor(chain, tol, seed)
        if anchor is not None:
            residual = closure_residual(chain, starts, 1, tol, seed=seed, concyclic_anchor=anchor)
            results.append(check("concyclic polygon closes", residual, 10.0 * bound))
    return results


def _open_chain_checks(chain, tol, meta, start, starts, seed):
    results = []
    doubled = doubled_chain(chain, tol=tol)
    results.append(check_flag("doubled chain closes", is_closing(doubled, tol)))
    bound = doubled.joint_count * tol.abs
    results.append(check("doubled polygon closes", closure_residual(doubled, starts, 1, tol, seed=seed), bound))
    if start is not None:
        trace = iterate(doubled, start, 1, tol)
        results.append(check("witness round trip", trace.vertices[-1].distance(start), bound))
    if meta.get("companion"):
        companion = doubled_chain(chain, companion=True, tol=tol)
        results.append(check_flag("companion doubled chain closes", is_closing(companion, tol)))
        results.append(
            check("companion polygon closes", closure_residual(companion, starts, 1, tol, seed=seed), bound)
        )
    return results


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

class SweepJob(NamedTuple):
    kind: SceneKind
    n: int
    seed: int
    p: int = 0
    q: int = 1
    companion: bool = False

    def spec(self):
        params = {}
        if self.kind is SceneKind.RATIONAL:
            params = {"p": self.p, "q": self.q}
        if self.companion:
            params["companion"] = True
        return SceneSpec(self.kind, self.n, self.seed, params)

    def command(self, rel):
        parts = [f"circle-chains generate --kind {self.kind.value} --n {self.n} --seed {self.seed}"]
        if self.kind is SceneKind.RATIONAL:
            parts.append(f"--p {self.p} --q {self.q}")
        if self.companion:
            parts.append("--companion")
        return " ".join(parts) + f" | circle-chains verify --suite --tol {rel!r}"


class SweepOutcome(NamedTuple):
    job: SweepJob
    failed: tuple
    error: Optional[str] = None

    @property
    def passed(self):
        return not self.failed and self.error is None


def plan_sweep(kinds, count, seed):
    """Deterministic job list: kinds round-robin, sizes and seeds from one generator."""
    rng = np.random.default_rng(seed)
    kinds = [SceneKind(kind) for kind in kinds]
    jobs = []
    for index in range(count):
        kind = kinds[index % len(kinds)]
        low, high = SIZE_RANGES[kind]
        n = int(rng.integers(low, high + 1))
        scene_seed = int(rng.integers(0, 2**31 - 1))
        p, q, companion = 0, 1, False
        if kind is SceneKind.RATIONAL:
            q = int(rng.choice(RATIONAL_DENOMINATORS))
            p = int(rng.choice([k for k in range(1, q) if math.gcd(k, q) == 1]))
        if kind is SceneKind.OPEN_POLYGON:
            companion = bool(rng.integers(0, 2))
        jobs.append(SweepJob(kind, n, scene_seed, p, q, companion))
    return jobs


def run_job(job, rel=DEFAULT_REL, starts=DEFAULT_STARTS):
    """Generate one scene and run its suite; every error becomes a failed outcome."""
    try:
        scene = generate(job.spec())
        tol = Tolerance.for_circles(scene.chain.circles, rel=rel)
        results = verify_scene_checks(
            job.kind.value, scene.chain, tol, meta=scene.meta, start=scene.start, starts=starts, seed=job.seed
        )
    except CircleChainError as exc:
        logger.warning(f"{job.kind.value} n={job.n} seed={job.seed}: {exc}")
        return SweepOutcome(job, (), error=str(exc))
    failed = tuple(r for r in results if not r.passed)
    return SweepOutcome(job, failed)


def run_sweep(kinds, count, seed, rel=DEFAULT_REL, workers=4, starts=DEFAULT_STARTS):
    """
    Run the theorem suites over ``count`` generated scenes.

    Jobs run on a thread pool; ``map`` keeps the outcomes in job order so
    the report does not depend on scheduling.

    Args:
        kinds (list): Scene kinds, visited round-robin
        count (int): Number of scenes
        seed (int): Seed of the job plan
        rel (float, optional): Relative tolerance
        workers (int, optional): Worker threads
        starts (int, optional): Seeded starts per closure check

    Returns:
        tuple: (per-kind CheckResult records, failure records)
    """
    jobs = plan_sweep(kinds, count, seed)
    logger.info(f"Sweep of {count} scenes over {len(set(j.kind for j in jobs))} kinds with {workers} workers")
    progress = tqdm(total=len(jobs), file=sys.stderr, disable=not sys.stderr.isatty(), desc="sweep")
    outcomes = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for outcome in pool.map(lambda job: run_job(job, rel, starts), jobs):
            outcomes.append(outcome)
            progress.update(1)
    progress.close()

    results = []
    failures = []
    for kind in dict.fromkeys(job.kind for job in jobs):
        mine = [o for o in outcomes if o.job.kind is kind]
        bad = [o for o in mine if not o.passed]
        results.append(check(f"{kind.value}: {len(mine) - len(bad)}/{len(mine)} passed", len(bad), 0, value=len(mine)))
    for outcome in outcomes:
        if outcome.passed:
            continue
        failures.append(
            {
                "kind": outcome.job.kind.value,
                "n": outcome.job.n,
                "seed": outcome.job.seed,
                "error": outcome.error,
                "failed_checks": [{"name": r.name, "defect": r.defect} for r in outcome.failed],
                "command": outcome.job.command(rel),
            }
        )
    logger.info(f"Sweep finished: {len(outcomes) - len(failures)}/{len(outcomes)} scenes passed")
    return results, failures
