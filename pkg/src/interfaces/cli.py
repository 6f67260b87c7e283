"""
Command-Line Interface

The ``circle-chains`` commands: generate, verify, iterate, incidence,
steiner, mobius, render and sweep. Data goes to stdout, diagnostics to
stderr. Exit code 0 means every check passed, 1 a failed check and 2 an
input error.
"""

import argparse
import logging
import sys

from src.core.exceptions import CircleChainError
from src.core.geometry import Line, Point, Tangent, intersect_circles
from src.core.tolerance import DEFAULT_REL, Tolerance
from src.modules.campaigns import (
    DEFAULT_STARTS,
    SWEEP_KINDS,
    closing_checks,
    run_sweep,
    sample_anchor,
    verify_scene_checks,
)
from src.modules.chain import ab_chain, iterate, sample_starts, transfer_report
from src.modules.incidence import (
    caption_tangency,
    four_touching_report,
    lighthouse_sweep,
    quadrilateral_circles,
    steiner_report,
    three_touching_report,
)
from src.modules.mobius import apply_scene, invariance_report, random_mobius
from src.modules.scenes import SceneKind, SceneSpec, generate
from src.utils.config import Settings
from src.utils.scene_format import (
    build_report,
    chain_to_document,
    dump_json,
    lighthouse_data,
    parse_scene,
    scene_to_chain,
    steiner_data,
    touching_data,
    trace_data,
    write_report,
    write_scene,
)
from src.utils.svg_render import render_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad command-line input."""


def parse_lines(text):
    """Parse ``a,b,c;a,b,c;...`` into lines a x + b y = c."""
    lines = []
    for index, part in enumerate(text.split(";"), start=1):
        values = [v.strip() for v in part.split(",")]
        if len(values) != 3:
            raise InputError(f"--lines entry {index} needs three numbers a,b,c, got {part!r}")
        try:
            a, b, c = (float(v) for v in values)
        except ValueError:
            raise InputError(f"--lines entry {index} is not numeric: {part!r}") from None
        lines.append(Line.from_coefficients(a, b, c))
    return lines


class CommandLineInterface:
    """
    Argument parsing and command dispatch.

    Args:
        settings (Settings, optional): Runtime settings
        stdin: Binary stream scenes are read from when the path is ``-``
        stdout: Binary stream data is written to
    """

    def __init__(self, settings=None, stdin=None, stdout=None):
        self.settings = settings or Settings()
        self.stdin = stdin if stdin is not None else sys.stdin.buffer
        self.stdout = stdout if stdout is not None else sys.stdout.buffer
        self.parser = self._build_parser()

    def _build_parser(self):
        parser = argparse.ArgumentParser(prog="circle-chains", description="Closing theorems for chains of circles")
        sub = parser.add_subparsers(dest="command", required=True)

        def scene_arg(p):
            p.add_argument("scene", nargs="?", default="-", help="scene JSON file, '-' for stdin")

        def tol_arg(p):
            p.add_argument("--tol", type=float, default=DEFAULT_REL, help="relative tolerance")

        generate_parser = sub.add_parser("generate", help="generate a scene")
        generate_parser.add_argument("--kind", required=True, choices=[k.value for k in SceneKind])
        generate_parser.add_argument("--n", type=int, required=True)
        generate_parser.add_argument("--seed", type=int, default=0)
        generate_parser.add_argument("--p", type=int, default=1)
        generate_parser.add_argument("--q", type=int, default=3)
        generate_parser.add_argument("--companion", action="store_true")
        generate_parser.add_argument("--out")

        verify_parser = sub.add_parser("verify", help="closing criterion of a scene")
        scene_arg(verify_parser)
        tol_arg(verify_parser)
        verify_parser.add_argument("--starts", type=int, default=DEFAULT_STARTS)
        verify_parser.add_argument("--seed", type=int, default=0)
        verify_parser.add_argument("--suite", action="store_true", help="run the theorem suite of the scene kind")

        iterate_parser = sub.add_parser("iterate", help="polygon of a scene")
        scene_arg(iterate_parser)
        tol_arg(iterate_parser)
        iterate_parser.add_argument("--rounds", type=int, default=1)
        iterate_parser.add_argument("--starts", type=int, default=0, help="seeded starts instead of the scene start")
        iterate_parser.add_argument("--seed", type=int, default=0)
        iterate_parser.add_argument("--concyclic", action="store_true", help="use the scene anchor")

        incidence_parser = sub.add_parser("incidence", help="lighthouse circles or touching report")
        scene_arg(incidence_parser)
        tol_arg(incidence_parser)
        incidence_parser.add_argument("--starts", type=int, default=16)
        incidence_parser.add_argument("--seed", type=int, default=0)

        steiner_parser = sub.add_parser("steiner", help="complete quadrilateral report")
        steiner_parser.add_argument("scene", nargs="?", default=None)
        tol_arg(steiner_parser)
        steiner_parser.add_argument("--lines", help="a,b,c;a,b,c;a,b,c;a,b,c with a x + b y = c")
        steiner_parser.add_argument("--seed", type=int, default=0)

        mobius_parser = sub.add_parser("mobius", help="conformal invariance report")
        scene_arg(mobius_parser)
        tol_arg(mobius_parser)
        mobius_parser.add_argument("--seed", type=int, default=0)
        mobius_parser.add_argument("--out", help="write the image scene here")

        render_parser = sub.add_parser("render", help="SVG figure of a scene")
        scene_arg(render_parser)
        tol_arg(render_parser)
        render_parser.add_argument("--trace", action="store_true")
        render_parser.add_argument("--incidence", action="store_true")
        render_parser.add_argument("--rounds", type=int, default=1)
        render_parser.add_argument("--out")

        sweep_parser = sub.add_parser("sweep", help="theorem suites over generated scenes")
        tol_arg(sweep_parser)
        sweep_parser.add_argument("--kinds", default=",".join(SWEEP_KINDS))
        sweep_parser.add_argument("--count", type=int, default=500)
        sweep_parser.add_argument("--seed", type=int, default=0)
        sweep_parser.add_argument("--starts", type=int, default=DEFAULT_STARTS)
        sweep_parser.add_argument("--workers", type=int, default=None)
        return parser

    # ------------------------------------------------------------------
    # I/O helpers
    # ------------------------------------------------------------------

    def _read(self, path):
        if path in (None, "-"):
            return self.stdin.read()
        with open(path, "rb") as fh:
            return fh.read()

    def _emit(self, data, out=None):
        if out:
            with open(out, "wb") as fh:
                fh.write(data)
        else:
            self.stdout.write(data)
            self.stdout.flush()

    def _load(self, args):
        doc = parse_scene(self._read(args.scene), rel=args.tol)
        chain, tol, start, anchor = scene_to_chain(doc, rel=args.tol)
        return doc, chain, tol, start, anchor

    def _report(self, report, out=None):
        self._emit(write_report(report), out)
        return EXIT_OK if report.overall else EXIT_FAILED

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def generate_command(self, args):
        params = {"companion": True} if args.companion else {}
        if args.kind == SceneKind.RATIONAL.value:
            params.update(p=args.p, q=args.q)
        scene = generate(SceneSpec(SceneKind(args.kind), args.n, args.seed, params))
        doc = chain_to_document(scene.chain, start=scene.start, meta=scene.meta)
        self._emit(write_scene(doc), args.out)
        return EXIT_OK

    def verify_command(self, args):
        doc, chain, tol, start, anchor = self._load(args)
        if args.suite:
            kind = doc.meta.get("kind", "")
            checks = verify_scene_checks(kind, chain, tol, doc.meta, start, anchor, args.starts, args.seed)
        else:
            checks = closing_checks(chain, tol, args.starts, args.seed)
        data = {}
        if chain.closed:
            report = transfer_report(chain, tol)
            data = {
                "joints": [joint._asdict() for joint in report.joints],
                "total": report.total,
                "winding": report.winding,
                "closing_defect": report.closing_defect,
            }
        return self._report(build_report("verify", tol, checks, doc, data))

    def iterate_command(self, args):
        doc, chain, tol, start, anchor = self._load(args)
        if args.concyclic and anchor is None:
            raise InputError("--concyclic needs an anchor_i in the scene")
        if args.starts > 0:
            starts = sample_starts(chain.circles[0], args.starts, args.seed)
        elif start is not None:
            starts = [start]
        else:
            starts = sample_starts(chain.circles[0], 1, args.seed)
        traces = [
            trace_data(iterate(chain, s, args.rounds, tol, anchor if args.concyclic else None)) for s in starts
        ]
        self._emit(dump_json({"tolerance": tol.rel, "traces": traces}))
        return EXIT_OK

    def incidence_command(self, args):
        doc, chain, tol, _, _ = self._load(args)
        bound = 10.0 * tol.abs
        touching = chain.closed and all(
            isinstance(intersect_circles(*chain.joint(i), tol), Tangent) for i in range(chain.joint_count)
        )
        if touching and chain.n == 3:
            report = three_touching_report(chain, args.starts, tol, seed=args.seed)
            return self._report(build_report("incidence", tol, report.checks(tol), doc, touching_data(report)))
        if touching and chain.n == 4:
            report = four_touching_report(chain, args.starts, tol, seed=args.seed)
            return self._report(build_report("incidence", tol, report.checks(tol), doc, touching_data(report)))

        data = {}
        if chain.closed and chain.n == 3:
            chain = ab_chain(chain, tol)
        sweep = lighthouse_sweep(chain, args.starts, tol, seed=args.seed)
        data["lighthouse"] = lighthouse_data(sweep)
        if chain.joint_count == 6 and chain.circles[:3] == chain.circles[3:]:
            data["caption_tangency"] = [
                {"outer": list(outer), "inner": list(inner), "defect": defect}
                for outer, inner, defect in caption_tangency(sweep, tol)
            ]
        return self._report(build_report("incidence", tol, sweep.checks(bound), doc, data))

    def steiner_command(self, args):
        doc = None
        start = None
        if args.lines:
            lines = parse_lines(args.lines)
        else:
            if args.scene is None:
                raise InputError("steiner needs --lines or a quadrilateral scene")
            doc = parse_scene(self._read(args.scene), rel=args.tol)
            if "lines" not in doc.meta:
                raise InputError("scene has no lines in its meta")
            lines = [Line.from_coefficients(*coefs) for coefs in doc.meta["lines"]]
            _, _, start, _ = scene_to_chain(doc, rel=args.tol)
        if len(lines) != 4:
            raise InputError(f"steiner needs exactly 4 lines, got {len(lines)}")
        tol = Tolerance(rel=args.tol)
        if start is None:
            _, _, _, circles = quadrilateral_circles(lines, tol)
            start = sample_starts(circles[0], 1, args.seed)[0]
        report = steiner_report(lines, start, tol)
        scene_tol = Tolerance.for_circles(report.circles, rel=args.tol)
        checks = report.checks(10.0 * scene_tol.abs)
        return self._report(build_report("steiner", scene_tol, checks, doc, steiner_data(report)))

    def mobius_command(self, args):
        doc, chain, tol, _, anchor = self._load(args)
        centers = [c.center for c in chain.circles]
        center = Point(sum(p.x for p in centers) / len(centers), sum(p.y for p in centers) / len(centers))
        m = random_mobius(args.seed, tol.scene_scale, center)
        if anchor is None and chain.closed:
            anchor = sample_anchor(chain, tol, args.seed)
        checks = invariance_report(chain, m, anchor, tol, seed=args.seed)
        data = {
            "map": {name: [getattr(m, name).real, getattr(m, name).imag] for name in ("a", "b", "c", "d")},
            "anchor": None if anchor is None else [anchor.x, anchor.y],
        }
        if args.out:
            image = apply_scene(m, chain, tol)
            self._emit(write_scene(chain_to_document(image, meta={"mobius_seed": args.seed})), args.out)
        return self._report(build_report("mobius", tol, checks, doc, data))

    def render_command(self, args):
        doc, chain, tol, start, _ = self._load(args)
        trace = None
        if args.trace:
            trace = iterate(chain, start or sample_starts(chain.circles[0], 1, 0)[0], args.rounds, tol)
        derived = []
        if args.incidence and chain.closed:
            try:
                derived = list(lighthouse_sweep(chain, 16, tol).fitted.values())
            except CircleChainError as exc:
                logger.warning(f"No derived circles: {exc}")
        self._emit(render_svg(doc, trace, derived), args.out)
        return EXIT_OK

    def sweep_command(self, args):
        kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
        unknown = [k for k in kinds if k not in SWEEP_KINDS]
        if unknown or not kinds:
            raise InputError(f"unknown sweep kinds: {unknown}")
        if args.count < 1:
            raise InputError("--count must be at least 1")
        workers = args.workers or self.settings.sweep_workers
        results, failures = run_sweep(kinds, args.count, args.seed, args.tol, workers, args.starts)
        for failure in failures:
            logger.warning(f"reproduce: {failure['command']}")
        tol = Tolerance(rel=args.tol)
        data = {"count": args.count, "seed": args.seed, "kinds": kinds, "failures": failures}
        return self._report(build_report("sweep", tol, results, None, data))

    def run(self, argv=None):
        """Parse ``argv`` and run the command; returns the exit code."""
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_INPUT
        handler = getattr(self, f"{args.command}_command")
        try:
            return handler(args)
        except (CircleChainError, InputError, ValueError, OSError) as exc:
            logger.error(f"{args.command}: {exc}", exc_info=logger.isEnabledFor(logging.DEBUG))
            return EXIT_INPUT


def cli_main(argv=None, settings=None):
    return CommandLineInterface(settings).run(argv)
