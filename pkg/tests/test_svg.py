import math
import xml.etree.ElementTree as ET

import pytest

from causalprofit.boundary import build_boundary, cost_insensitive_boundary
from causalprofit.exceptions import EmptyCurve
from causalprofit.svg import emit_boundary_chart, emit_line_chart

from conftest import make_spec

SVG_NS = "{http://www.w3.org/2000/svg}"


def texts(document):
    root = ET.fromstring(document)
    return [element.text for element in root.iter(f"{SVG_NS}text")]


class TestLineChart:
    def chart(self, points=((0.0, 0.0), (0.5, 1.0), (1.0, 0.0))):
        return emit_line_chart(list(points), "demo", "share", "value")

    def test_byte_identical_across_calls(self):
        assert self.chart() == self.chart()

    def test_empty_curve_refused(self):
        with pytest.raises(EmptyCurve):
            emit_line_chart([], "demo", "x", "y")

    def test_non_finite_points_refused(self):
        with pytest.raises(ValueError, match="non-finite"):
            emit_line_chart([(0.0, math.nan)], "demo", "x", "y")
        with pytest.raises(ValueError, match="non-finite"):
            emit_line_chart([(math.inf, 0.0)], "demo", "x", "y")

    def test_is_wellformed_xml_with_fixed_viewbox(self):
        document = self.chart()
        root = ET.fromstring(document)
        assert root.tag == f"{SVG_NS}svg"
        assert root.get("viewBox") == "0 0 800.00 600.00"
        assert document.endswith("</svg>\n")

    def test_polyline_pixels_for_a_known_triangle(self):
        # x maps [0, 1] onto [80, 770]; y maps [0, 1] onto [530, 50].
        document = self.chart()
        assert 'points="80.00,530.00 425.00,50.00 770.00,530.00"' in document
        assert document.count("<polyline") == 1

    def test_flat_zero_curve_gets_a_padded_range(self):
        # A constant value widens the y range to [-1, 1], putting the
        # horizontal line in the vertical middle of the plot area.
        document = emit_line_chart([(0.0, 0.0), (1.0, 0.0)], "flat", "x", "y")
        assert 'points="80.00,290.00 770.00,290.00"' in document

    def test_single_point_padded_on_both_axes(self):
        document = emit_line_chart([(0.5, 2.0)], "dot", "x", "y")
        assert 'points="425.00,290.00"' in document

    def test_tick_labels_and_axis_labels(self):
        labels = texts(self.chart())
        assert len(labels) == 13
        assert labels[0] == "demo"
        for expected in ("0", "0.25", "0.5", "0.75", "1"):
            assert expected in labels
        assert "share" in labels and "value" in labels

    def test_title_is_escaped(self):
        document = emit_line_chart([(0.0, 0.0), (1.0, 1.0)], 'a<b & "c"', "x", "y")
        assert "a&lt;b &amp;" in document
        assert texts(document)[0] == 'a<b & "c"'


class TestBoundaryChart:
    def test_scenario1_line_endpoints(self, scenario1):
        # Intercept 0.1, slope -0.2: the line runs from (0, 0.1) to
        # (1, -0.1), i.e. pixels (80, 266) to (770, 314).
        document = emit_boundary_chart(build_boundary(scenario1), "plan")
        assert 'points="80.00,266.00 770.00,314.00"' in document

    def test_infeasible_regions_are_shaded(self, scenario1):
        document = emit_boundary_chart(build_boundary(scenario1), "plan")
        assert '<polygon points="80.00,290.00 80.00,50.00 770.00,50.00"' in document
        assert '<polygon points="80.00,530.00 770.00,530.00 770.00,290.00"' in document
        assert document.count("<polygon") == 2

    def test_cost_insensitive_line_is_horizontal_at_zero(self):
        document = emit_boundary_chart(cost_insensitive_boundary(), "plan")
        assert 'points="80.00,290.00 770.00,290.00"' in document

    def test_steep_line_is_clipped_to_the_frame(self):
        # Slope -5 leaves the effect range at p = 0.2.
        boundary = build_boundary(make_spec(b10=10, b11=60))
        assert boundary.slope == -5.0
        document = emit_boundary_chart(boundary, "steep")
        assert 'points="80.00,290.00 218.00,530.00"' in document

    def test_line_outside_the_frame_is_omitted(self):
        # Intercept 3 with slope 0 never enters the effect range.
        boundary = build_boundary(make_spec(b10=10, c01=30, c11=20))
        assert boundary.intercept == 3.0
        assert boundary.slope == 0.0
        document = emit_boundary_chart(boundary, "afar")
        assert "<polyline" not in document

    def test_byte_identical_and_wellformed(self, scenario2):
        boundary = build_boundary(scenario2)
        first = emit_boundary_chart(boundary, "plan")
        assert first == emit_boundary_chart(boundary, "plan")
        labels = texts(first)
        assert len(labels) == 13
        for expected in ("-1", "-0.5", "0", "0.5", "1"):
            assert expected in labels
