"""
Scene Format

Pydantic documents for scenes and reports, their canonical JSON form, and
the conversions between scene documents and chains.
"""

import hashlib
import json
import logging
import math
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.exceptions import CircleChainError, SceneFormatError
from src.core.geometry import Circle, Point
from src.core.tolerance import DEFAULT_REL, Tolerance
from src.modules.chain import Chain, ExplicitPivot, PivotSide

# Configure logging
logger = logging.getLogger(__name__)

SCENE_VERSION = "1"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class XY(_Strict):
    x: float
    y: float

    @field_validator("x", "y")
    @classmethod
    def _finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("coordinate must be finite")
        return value


class CircleEntry(_Strict):
    id: str
    cx: float
    cy: float
    r: float

    @field_validator("cx", "cy", "r")
    @classmethod
    def _finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("value must be finite")
        return value

    @field_validator("r")
    @classmethod
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("radius must be positive")
        return value


class PivotEntry(_Strict):
    choice: Union[Literal["A", "B"], XY]


class ChainEntry(_Strict):
    order: List[str]
    closed: bool = True
    pivots: List[PivotEntry]


class StartEntry(_Strict):
    circle: str
    x: float
    y: float


class SceneDocument(BaseModel):
    """
    A chain scene. Unknown top-level keys are kept in ``meta``.
    """

    model_config = ConfigDict(extra="forbid")

    version: str = SCENE_VERSION
    circles: List[CircleEntry]
    chain: ChainEntry
    start: Optional[StartEntry] = None
    anchor_i: Optional[XY] = None
    meta: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _collect_unknown(cls, data):
        if not isinstance(data, dict):
            return data
        known = set(cls.model_fields)
        unknown = {key: value for key, value in data.items() if key not in known}
        if not unknown:
            return data
        data = {key: value for key, value in data.items() if key in known}
        meta = dict(data.get("meta") or {})
        meta.update(unknown)
        data["meta"] = meta
        return data


class CheckRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    value: Optional[float] = None
    defect: Optional[float] = None
    passed: bool = Field(alias="pass")


class ReportDocument(BaseModel):
    """A verification report; ``overall`` is the conjunction of the check flags."""

    model_config = ConfigDict(populate_by_name=True)

    kind: str
    tolerance: float
    scene_hash: Optional[str] = None
    checks: List[CheckRecord] = Field(default_factory=list)
    overall: bool = True
    data: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _overall(self):
        self.overall = all(record.passed for record in self.checks)
        return self


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _json_path(loc):
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        elif part in ("literal['A','B']", "XY") or "[" in str(part):
            continue
        else:
            path += f".{part}" if path else str(part)
    return path


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite_or_none(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(item) for item in value]
    return value


def dump_json(data):
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    text = json.dumps(_finite_or_none(data), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")


def parse_scene(text, rel=DEFAULT_REL):
    """
    Parse and validate a scene document.

    Args:
        text (bytes or str): UTF-8 JSON
        rel (float, optional): Relative tolerance for the start-point check

    Returns:
        SceneDocument: The validated document

    Raises:
        SceneFormatError: With the JSON path of the offending value
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneFormatError("", f"scene is not UTF-8: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise SceneFormatError("", "scene must be a JSON object")
    try:
        doc = SceneDocument.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise SceneFormatError(_json_path(error["loc"]), error["msg"]) from None
    _check_document(doc, rel)
    return doc


def _check_document(doc, rel):
    ids = {}
    for index, entry in enumerate(doc.circles):
        if entry.id in ids:
            raise SceneFormatError(f"circles[{index}].id", f"duplicate circle id {entry.id!r}")
        ids[entry.id] = entry

    order = doc.chain.order
    for index, circle_id in enumerate(order):
        if circle_id not in ids:
            raise SceneFormatError(f"chain.order[{index}]", f"unknown circle id {circle_id!r}")
    if len(order) < 2:
        raise SceneFormatError("chain.order", "a chain needs at least 2 circles")
    expected = len(order) if doc.chain.closed else len(order) - 1
    if len(doc.chain.pivots) != expected:
        kind = "closed" if doc.chain.closed else "open"
        raise SceneFormatError(
            "chain.pivots",
            f"{kind} chain of {len(order)} circles needs {expected} pivots, got {len(doc.chain.pivots)}",
        )

    if doc.start is not None:
        if doc.start.circle not in ids:
            raise SceneFormatError("start.circle", f"unknown circle id {doc.start.circle!r}")
        circles = [_circle(entry) for entry in doc.circles]
        tol = Tolerance.for_circles(circles, rel=rel)
        circle = _circle(ids[doc.start.circle])
        point = Point(doc.start.x, doc.start.y)
        if not circle.contains(point, tol):
            raise SceneFormatError(
                "start", f"start is off circle {doc.start.circle!r} (defect {circle.defect(point):.3e})"
            )


def write_scene(doc):
    """Canonical bytes of a scene document."""
    return dump_json(doc.model_dump(mode="json", exclude_none=True))


def scene_hash(doc):
    return hashlib.sha256(write_scene(doc)).hexdigest()


def write_report(report):
    return dump_json(report.model_dump(mode="json", by_alias=True))


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def _circle(entry):
    return Circle(Point(entry.cx, entry.cy), entry.r)


def scene_to_chain(doc, rel=DEFAULT_REL):
    """
    Resolve a scene document into a chain and its tolerance.

    Args:
        doc (SceneDocument): Validated document
        rel (float, optional): Relative tolerance

    Returns:
        tuple: (Chain, Tolerance, start or None, anchor or None)
    """
    by_id = {entry.id: _circle(entry) for entry in doc.circles}
    circles = tuple(by_id[circle_id] for circle_id in doc.chain.order)
    pivots = []
    for entry in doc.chain.pivots:
        if isinstance(entry.choice, XY):
            pivots.append(ExplicitPivot(Point(entry.choice.x, entry.choice.y)))
        else:
            pivots.append(PivotSide(entry.choice))
    try:
        chain = Chain(circles, tuple(pivots), closed=doc.chain.closed)
    except CircleChainError as exc:
        raise SceneFormatError("chain", str(exc)) from None
    tol = Tolerance.for_circles(chain.circles, rel=rel)
    start = Point(doc.start.x, doc.start.y) if doc.start is not None else None
    anchor = Point(doc.anchor_i.x, doc.anchor_i.y) if doc.anchor_i is not None else None
    return chain, tol, start, anchor


def chain_to_document(chain, start=None, anchor=None, meta=None):
    """
    Scene document of a chain; equal circles share one id.

    Args:
        chain (Chain): The chain
        start (Point, optional): Start on the first circle
        anchor (Point, optional): Anchor of the concyclic pivot maps
        meta (dict, optional): Free-form metadata

    Returns:
        SceneDocument: The document
    """
    ids = {}
    entries = []
    order = []
    for circle in chain.circles:
        if circle not in ids:
            ids[circle] = f"C{len(ids) + 1}"
            entries.append(CircleEntry(id=ids[circle], cx=circle.center.x, cy=circle.center.y, r=circle.radius))
        order.append(ids[circle])
    pivots = []
    for choice in chain.pivots:
        if isinstance(choice, ExplicitPivot):
            pivots.append(PivotEntry(choice=XY(x=choice.point[0], y=choice.point[1])))
        else:
            pivots.append(PivotEntry(choice=choice.value))
    return SceneDocument(
        circles=entries,
        chain=ChainEntry(order=order, closed=chain.closed, pivots=pivots),
        start=None if start is None else StartEntry(circle=order[0], x=start.x, y=start.y),
        anchor_i=None if anchor is None else XY(x=anchor.x, y=anchor.y),
        meta=_finite_or_none(meta or {}),
    )


def build_report(kind, tol, checks, doc=None, data=None):
    """
    Report document from CheckResult records.

    Args:
        kind (str): Report kind, e.g. ``verify``
        tol (Tolerance): Tolerance used
        checks (list): CheckResult records
        doc (SceneDocument, optional): Scene the checks ran on
        data (dict, optional): Extra payload

    Returns:
        ReportDocument: The report
    """
    records = [
        CheckRecord(
            name=result.name,
            value=None if result.value is None or not math.isfinite(result.value) else result.value,
            defect=result.defect if math.isfinite(result.defect) else None,
            passed=result.passed,
        )
        for result in checks
    ]
    return ReportDocument(
        kind=kind,
        tolerance=tol.rel,
        scene_hash=scene_hash(doc) if doc is not None else None,
        checks=records,
        data=_finite_or_none(data or {}),
    )


def point_data(point):
    return None if point is None else [point.x, point.y]


def circle_data(circle):
    return None if circle is None else {"cx": circle.center.x, "cy": circle.center.y, "r": circle.radius}


def trace_data(trace):
    return {
        "rounds": trace.rounds,
        "vertices": [point_data(v) for v in trace.vertices],
        "side_lines": [
            {"anchor": point_data(line.anchor), "direction": point_data(line.direction)} for line in trace.side_lines
        ],
    }


def _pair_key(key):
    return ",".join(str(i) for i in key)


def lighthouse_data(report):
    return {
        "starts": report.starts_used,
        "fitted": {_pair_key(k): circle_data(c) for k, c in sorted(report.fitted.items())},
        "residuals": {_pair_key(k): v for k, v in sorted(report.residuals.items())},
        "pivot_defects": {_pair_key(k): v for k, v in sorted(report.pivot_defects.items())},
        "concurrency": {
            _pair_key(k): {"point": point_data(p), "spread": s} for k, (p, s) in sorted(report.concurrency.items())
        },
        "half_planes": {_pair_key(k): list(v) for k, v in sorted(report.half_planes.items())},
    }


def touching_data(report):
    data = {
        "n": report.n,
        "base_circle": circle_data(report.base_circle),
        "membership_defects": list(report.membership_defects),
    }
    if report.n == 3:
        data.update(
            x135=point_data(report.x135),
            x246=point_data(report.x246),
            orthogonality_defects=list(report.orthogonality_defects),
            midpoint_defect=report.midpoint_defect,
            concurrency_defects=list(report.concurrency_defects),
            diameter_defects=list(report.diameter_defects),
        )
    else:
        data.update(
            x13=point_data(report.x13),
            x24=point_data(report.x24),
            contact_defect=report.contact_defect,
            closure_defect=report.closure_defect,
        )
    return data


def steiner_data(report):
    return {
        "steiner_point": point_data(report.steiner_point),
        "p_point": point_data(report.p_point),
        "q_point": point_data(report.q_point),
        "circles": [circle_data(c) for c in report.circles],
        "circle_c13": circle_data(report.circle_c13),
        "circle_c24": circle_data(report.circle_c24),
        "circle_c": circle_data(report.circle_c),
        "circle_d": circle_data(report.circle_d),
        "x_point": point_data(report.x_point),
        "vertices": [point_data(v) for v in report.vertices],
        "collinearity_defects": list(report.collinearity_defects),
        "steiner_spread": report.steiner_spread,
        "defects": dict(report.defects),
        "collapsed": report.collapsed,
        "vacuous": list(report.vacuous),
    }
