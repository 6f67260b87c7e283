"""
SVG Rendering

Deterministic figures of chain scenes: black chain circles, the red
polygon, blue derived circles and white pivot dots.
"""

import logging
from dataclasses import dataclass

import drawsvg as draw

from src.core.exceptions import CircleChainError
from src.utils.scene_format import scene_to_chain

# Configure logging
logger = logging.getLogger(__name__)

DECIMALS = 6
MARGIN = 0.05
DEFAULT_BOX = (-1.0, -1.0, 2.0, 2.0)


@dataclass(frozen=True)
class StyleOptions:
    """
    Figure style; lengths are fractions of the larger viewBox side.

    Args:
        stroke (float): Line width
        pivot_radius (float): Radius of the pivot dots
        show_pivots (bool): Draw the pivot dots
        circle_color (str): Chain circles
        polygon_color (str): Trace polygon
        derived_color (str): Derived circles
        pivot_fill (str): Pivot dot fill
    """

    stroke: float = 0.003
    pivot_radius: float = 0.006
    show_pivots: bool = True
    circle_color: str = "black"
    polygon_color: str = "red"
    derived_color: str = "blue"
    pivot_fill: str = "white"


def _num(value):
    # adding 0.0 turns a rounded -0.0 into 0.0
    return round(float(value), DECIMALS) + 0.0


def _view_box(circles, points):
    xs = []
    ys = []
    for circle in circles:
        xs += [circle.center.x - circle.radius, circle.center.x + circle.radius]
        ys += [circle.center.y - circle.radius, circle.center.y + circle.radius]
    for point in points:
        xs.append(point.x)
        ys.append(point.y)
    if not xs:
        return DEFAULT_BOX
    width = max(xs) - min(xs)
    height = max(ys) - min(ys)
    side = max(width, height) or 1.0
    margin = MARGIN * side
    # svg y grows downwards
    return (min(xs) - margin, -max(ys) - margin, width + 2 * margin, height + 2 * margin)


def render_svg(doc, trace=None, incidence=(), style=StyleOptions()):
    """
    Render a scene document as a standalone SVG.

    Args:
        doc (SceneDocument): The scene
        trace (Trace, optional): Polygon drawn in red
        incidence (iterable, optional): Derived circles drawn in blue
        style (StyleOptions, optional): Figure style

    Returns:
        bytes: UTF-8 SVG, identical for identical inputs
    """
    circles = []
    pivots = []
    if doc.circles:
        chain, tol, _, _ = scene_to_chain(doc)
        circles = list(dict.fromkeys(chain.circles))
        if style.show_pivots:
            try:
                pivots = list(chain.resolved_pivots(tol))
            except CircleChainError as exc:
                logger.warning(f"Pivots not drawn: {exc}")
    vertices = list(trace.vertices) if trace is not None else []
    incidence = list(incidence)

    x0, y0, width, height = _view_box(circles + incidence, vertices + pivots)
    unit = max(width, height)
    drawing = draw.Drawing(_num(width), _num(height), origin=(_num(x0), _num(y0)))

    for circle in circles:
        drawing.append(
            draw.Circle(
                _num(circle.center.x),
                _num(-circle.center.y),
                _num(circle.radius),
                fill="none",
                stroke=style.circle_color,
                stroke_width=_num(style.stroke * unit),
            )
        )
    for circle in incidence:
        drawing.append(
            draw.Circle(
                _num(circle.center.x),
                _num(-circle.center.y),
                _num(circle.radius),
                fill="none",
                stroke=style.derived_color,
                stroke_width=_num(style.stroke * unit),
            )
        )
    if len(vertices) >= 2:
        coords = []
        for vertex in vertices:
            coords += [_num(vertex.x), _num(-vertex.y)]
        drawing.append(
            draw.Lines(
                *coords,
                close=False,
                fill="none",
                stroke=style.polygon_color,
                stroke_width=_num(style.stroke * unit),
            )
        )
    for pivot in pivots:
        drawing.append(
            draw.Circle(
                _num(pivot.x),
                _num(-pivot.y),
                _num(style.pivot_radius * unit),
                fill=style.pivot_fill,
                stroke=style.circle_color,
                stroke_width=_num(0.5 * style.stroke * unit),
            )
        )
    logger.debug(f"Rendered {len(circles)} circles, {len(vertices)} vertices, {len(pivots)} pivots")
    return drawing.as_svg().encode("utf-8")
