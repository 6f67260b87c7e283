import re

from src.core.geometry import Circle, Point
from src.modules.chain import iterate
from src.modules.scenes import SceneSpec, generate
from src.utils.scene_format import ChainEntry, SceneDocument, chain_to_document
from src.utils.svg_render import DEFAULT_BOX, StyleOptions, _num, _view_box, render_svg


def test_empty_scene_uses_the_default_box():
    doc = SceneDocument(circles=[], chain=ChainEntry(order=[], pivots=[]))
    svg = render_svg(doc).decode("utf-8")
    assert svg.startswith("<?xml")
    assert "<circle" not in svg
    assert _view_box([], []) == DEFAULT_BOX


def test_rendering_is_deterministic():
    scene = generate(SceneSpec("polygon", 5, 4))
    doc = chain_to_document(scene.chain, start=scene.start)
    assert render_svg(doc) == render_svg(doc)


def test_scene_elements(polygon_chain):
    chain, witness, tol = polygon_chain
    doc = chain_to_document(chain, start=witness)
    trace = iterate(chain, witness, 1, tol)
    svg = render_svg(doc, trace=trace, incidence=[chain.circles[0]]).decode("utf-8")
    # chain circles, one derived circle and one dot per pivot
    assert svg.count("<circle") == 2 * chain.n + 1
    assert svg.count('stroke="red"') == 1
    assert svg.count('stroke="blue"') == 1
    assert svg.count('fill="white"') == chain.n
    assert "<path" in svg or "<polyline" in svg


def test_pivots_can_be_hidden(polygon_chain):
    chain, _, _ = polygon_chain
    svg = render_svg(chain_to_document(chain), style=StyleOptions(show_pivots=False)).decode("utf-8")
    assert svg.count("<circle") == chain.n


def test_numbers_are_rounded_and_y_is_flipped(polygon_chain):
    chain, _, _ = polygon_chain
    svg = render_svg(chain_to_document(chain), style=StyleOptions(show_pivots=False)).decode("utf-8")
    for number in re.findall(r'c[xy]="(-?[0-9.e-]+)"', svg):
        assert len(number.split(".")[-1]) <= 6
    first = chain.circles[0]
    assert f'cy="{_num(-first.center.y)}"' in svg
    assert _num(-0.0000001) == 0.0 and str(_num(-0.0000001)) == "0.0"


def test_derived_circles_stay_inside_the_view_box(polygon_chain):
    chain, _, _ = polygon_chain
    far = Circle(Point(50.0, 50.0), 5.0)
    svg = render_svg(chain_to_document(chain), incidence=[far]).decode("utf-8")
    x0, y0, width, height = (float(v) for v in re.search(r'viewBox="([^"]+)"', svg).group(1).split())
    assert x0 + width >= 55.0
    # y is flipped, so the top of the circle sits at -55
    assert y0 <= -55.0
