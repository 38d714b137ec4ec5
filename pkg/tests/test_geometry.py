import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_piston import geometry
from casimir_piston.geometry import GeometryError


def test_rectangle_is_one_quarter_for_any_aspect():
    for b, c in [(1, 1), (1, 3), (0.2, 7.5)]:
        assert geometry.chi(geometry.rectangle(b, c)).chi == 0.25


def test_right_angle_corner_term():
    assert geometry.corner_term(math.pi / 2) == pytest.approx(1 / 16, abs=1e-16)


def test_smooth_shapes_are_one_sixth():
    for cs in [geometry.circle(0.3), geometry.stadium(1.0, 4.0), geometry.oval(0.5, 2.0, 0.6)]:
        value = geometry.chi(cs)
        assert value.chi == pytest.approx(1 / 6, abs=1e-12)
        assert value.corner_contribution == 0.0


def test_triangles_and_hexagon():
    assert geometry.chi(geometry.regular_polygon(3)).chi == pytest.approx(1 / 3, abs=1e-12)
    right = geometry.polygon([(0, 0), (1, 0), (0, 1)])
    expected = geometry.corner_term(math.pi / 2) + 2 * geometry.corner_term(math.pi / 4)
    assert geometry.chi(right).chi == pytest.approx(expected, abs=1e-14)
    hexagon = geometry.regular_polygon(6, 2.0)
    assert hexagon.area == pytest.approx(3 * math.sqrt(3) / 2 * 4, rel=1e-14)
    assert geometry.chi(hexagon).chi == pytest.approx(6 * geometry.corner_term(2 * math.pi / 3), abs=1e-14)


def test_stadium_area_and_perimeter():
    cs = geometry.stadium(1.0, 2.0)
    assert cs.area == pytest.approx(math.pi + 4)
    assert cs.perimeter == pytest.approx(2 * math.pi + 4)


def test_oval_area_reduces_to_circle():
    cs = geometry.oval(1.0, 1.0, 0.7)
    assert cs.area == pytest.approx(math.pi, rel=1e-14)


def test_reentrant_corner_is_flagged():
    cs = geometry.polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    assert "reentrant-corner" in cs.flags
    assert cs.area == 3.0
    value = geometry.chi(cs)
    assert "reentrant-corner" in value.flags
    assert value.chi == pytest.approx(5 * geometry.corner_term(math.pi / 2) + geometry.corner_term(1.5 * math.pi))


def test_orientation_does_not_matter():
    pts = [(0, 0), (3, 0), (4, 2), (1, 3)]
    a = geometry.polygon(pts)
    b = geometry.polygon(pts[::-1])
    assert geometry.chi(a).chi == pytest.approx(geometry.chi(b).chi, abs=1e-15)
    assert a.area == b.area


def test_collinear_vertices_are_merged():
    cs = geometry.polygon([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)])
    assert len(cs.corners) == 4
    assert geometry.chi(cs).chi == 0.25


@settings(max_examples=50, deadline=None)
@given(factor=st.floats(1e-3, 1e3))
def test_chi_is_scale_invariant(factor):
    for cs in [geometry.stadium(0.4, 1.1), geometry.regular_polygon(5)]:
        scaled = cs.scaled(factor)
        assert geometry.chi(scaled).chi == pytest.approx(geometry.chi(cs).chi, abs=1e-14)
        assert scaled.area == pytest.approx(cs.area * factor**2, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    angles=st.lists(st.floats(0.0, 2 * math.pi), min_size=3, max_size=9, unique=True),
    radii=st.lists(st.floats(0.5, 2.0), min_size=9, max_size=9),
)
def test_star_shaped_polygons_close(angles, radii):
    angles = sorted(angles)
    gaps = [b - a for a, b in zip(angles, angles[1:] + [angles[0] + 2 * math.pi])]
    if min(gaps) < 1e-2 or max(gaps) > math.pi - 1e-2:
        return
    pts = [(r * math.cos(t), r * math.sin(t)) for t, r in zip(angles, radii)]
    try:
        cs = geometry.polygon(pts)
    except GeometryError:
        return
    assert cs.total_turning == pytest.approx(2 * math.pi, abs=1e-9)
    assert sum(math.pi - a for a in cs.corners) == pytest.approx(2 * math.pi, abs=1e-9)


def test_document_round_trip():
    cs = geometry.stadium(0.5, 1.5)
    again = geometry.parse_cross_section(json.dumps(geometry.to_document(cs)))
    assert again == cs


def test_vertices_document(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"name": "tri", "vertices": [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]}))
    cs = geometry.load_cross_section(path)
    assert cs.name == "tri"
    assert geometry.chi(cs).chi == pytest.approx(1 / 3, abs=1e-12)


def test_perimeter_defaults_to_arc_lengths():
    doc = {"corners": [], "arcs": [{"length": 2 * math.pi, "curvature": 1.0}], "area": math.pi}
    assert geometry.parse_cross_section(doc).perimeter == pytest.approx(2 * math.pi)


@pytest.mark.parametrize(
    "doc, match",
    [
        ("{not json", "malformed"),
        ("[1, 2]", "top level"),
        ({"corners": [], "arcs": [{"length": 1.0}]}, "area"),
        ({"corners": [{"angle": 1}], "area": 1, "perimeter": 1}, "malformed"),
        ({"corners": [], "arcs": [], "area": 1, "perimeter": 4, "colour": "red"}, "unknown keys"),
        ({"corners": [{"interior_angle": 0.0}] * 4, "area": 1, "perimeter": 4}, "cusp"),
        ({"corners": [{"interior_angle": math.pi}] * 4, "area": 1, "perimeter": 4}, "alpha = pi"),
        ({"corners": [{"interior_angle": 7.0}], "area": 1, "perimeter": 4}, "2\\*pi"),
        ({"corners": [{"interior_angle": math.pi / 2}] * 3, "area": 1, "perimeter": 3}, "closure"),
        ({"corners": [{"interior_angle": math.pi / 2}] * 4, "area": -1, "perimeter": 4}, "area"),
        ({"corners": [{"interior_angle": math.pi / 2}] * 4, "area": 1, "perimeter": 0}, "perimeter"),
        ({"corners": [], "arcs": [{"length": -1.0, "curvature": 1}], "area": 1}, "arc length"),
        ({"vertices": [[0, 0], [1, 0]]}, "three"),
        ({"vertices": [[0, 0], [1, 0], [2, 0]]}, "degenerate"),
        ({"vertices": [[0, 0], [0, 0], [1, 0], [0, 1]]}, "repeated"),
    ],
)
def test_parse_errors(doc, match):
    with pytest.raises(GeometryError, match=match):
        geometry.parse_cross_section(doc)


def test_oval_rejects_bad_angle():
    with pytest.raises(GeometryError):
        geometry.oval(1.0, 2.0, 2.0)


def test_scale_factor_must_be_positive():
    with pytest.raises(GeometryError):
        geometry.square(1.0).scaled(0.0)
