"""Deterministic SVG line charts, suitable for golden-file comparison.

All geometry is formatted to two decimals and every document is a pure
function of its arguments: no timestamps, no ids, no randomness.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .boundary import COST_INSENSITIVE, DecisionBoundary
from .exceptions import EmptyCurve

__all__ = ["emit_line_chart", "emit_boundary_chart"]

_WIDTH = 800.0
_HEIGHT = 600.0
_MARGIN_LEFT = 80.0
_MARGIN_RIGHT = 30.0
_MARGIN_TOP = 50.0
_MARGIN_BOTTOM = 70.0
_TICK_COUNT = 5
_TICK_LENGTH = 6.0

_LINE_COLOR = "#1f6fb5"
_AXIS_COLOR = "#222222"
_SHADE_COLOR = "#cccccc"


def _coordinate(value: float) -> str:
    # Normalize negative zero so identical geometry yields identical text.
    text = format(value, ".2f")
    return "0.00" if text == "-0.00" else text


def _axis_range(low: float, high: float) -> tuple[float, float]:
    if not (math.isfinite(low) and math.isfinite(high)):
        raise ValueError(f"axis range [{low!r}, {high!r}] is not finite")
    if low == high:
        return low - 1.0, high + 1.0
    return low, high


class _Frame:
    """Maps data coordinates onto the fixed plot rectangle."""

    def __init__(self, x_low: float, x_high: float, y_low: float, y_high: float):
        self.x_low, self.x_high = _axis_range(x_low, x_high)
        self.y_low, self.y_high = _axis_range(y_low, y_high)
        self.left = _MARGIN_LEFT
        self.right = _WIDTH - _MARGIN_RIGHT
        self.top = _MARGIN_TOP
        self.bottom = _HEIGHT - _MARGIN_BOTTOM

    def x(self, value: float) -> float:
        share = (value - self.x_low) / (self.x_high - self.x_low)
        return self.left + share * (self.right - self.left)

    def y(self, value: float) -> float:
        share = (value - self.y_low) / (self.y_high - self.y_low)
        return self.bottom - share * (self.bottom - self.top)

    def ticks(self, low: float, high: float) -> list[float]:
        step = (high - low) / (_TICK_COUNT - 1)
        return [low + index * step for index in range(_TICK_COUNT)]


def _header(title: str) -> list[str]:
    return [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {_coordinate(_WIDTH)} {_coordinate(_HEIGHT)}">',
        f'<rect x="0" y="0" width="{_coordinate(_WIDTH)}" '
        f'height="{_coordinate(_HEIGHT)}" fill="#ffffff"/>',
        f'<text x="{_coordinate(_WIDTH / 2)}" y="30.00" text-anchor="middle" '
        f'font-family="sans-serif" font-size="18">{escape(title)}</text>',
    ]


def _axes(frame: _Frame, x_label: str, y_label: str) -> list[str]:
    parts = [
        f'<line x1="{_coordinate(frame.left)}" y1="{_coordinate(frame.bottom)}" '
        f'x2="{_coordinate(frame.right)}" y2="{_coordinate(frame.bottom)}" '
        f'stroke="{_AXIS_COLOR}" stroke-width="1"/>',
        f'<line x1="{_coordinate(frame.left)}" y1="{_coordinate(frame.top)}" '
        f'x2="{_coordinate(frame.left)}" y2="{_coordinate(frame.bottom)}" '
        f'stroke="{_AXIS_COLOR}" stroke-width="1"/>',
    ]
    for value in frame.ticks(frame.x_low, frame.x_high):
        pixel = frame.x(value)
        parts.append(
            f'<line x1="{_coordinate(pixel)}" y1="{_coordinate(frame.bottom)}" '
            f'x2="{_coordinate(pixel)}" y2="{_coordinate(frame.bottom + _TICK_LENGTH)}" '
            f'stroke="{_AXIS_COLOR}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_coordinate(pixel)}" y="{_coordinate(frame.bottom + 22.0)}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f'{escape(format(value, ".6g"))}</text>'
        )
    for value in frame.ticks(frame.y_low, frame.y_high):
        pixel = frame.y(value)
        parts.append(
            f'<line x1="{_coordinate(frame.left - _TICK_LENGTH)}" '
            f'y1="{_coordinate(pixel)}" x2="{_coordinate(frame.left)}" '
            f'y2="{_coordinate(pixel)}" stroke="{_AXIS_COLOR}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_coordinate(frame.left - 10.0)}" '
            f'y="{_coordinate(pixel + 4.0)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">'
            f'{escape(format(value, ".6g"))}</text>'
        )
    center_x = (frame.left + frame.right) / 2
    center_y = (frame.top + frame.bottom) / 2
    parts.append(
        f'<text x="{_coordinate(center_x)}" y="{_coordinate(frame.bottom + 45.0)}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="14">'
        f'{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="25.00" y="{_coordinate(center_y)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 25.00 {_coordinate(center_y)})">'
        f'{escape(y_label)}</text>'
    )
    return parts


def _polyline(frame: _Frame, points: Sequence[tuple[float, float]], color: str) -> str:
    pixels = " ".join(
        f"{_coordinate(frame.x(x))},{_coordinate(frame.y(y))}" for x, y in points
    )
    return (
        f'<polyline points="{pixels}" fill="none" stroke="{color}" '
        'stroke-width="2"/>'
    )


def emit_line_chart(
    points: Sequence[tuple[float, float]],
    title: str,
    x_label: str,
    y_label: str,
) -> str:
    """Render one curve as a complete SVG document string."""
    points = [(float(x), float(y)) for x, y in points]
    if not points:
        raise EmptyCurve("cannot chart an empty curve")
    for x, y in points:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"curve contains non-finite point ({x!r}, {y!r})")
    frame = _Frame(
        min(x for x, _ in points),
        max(x for x, _ in points),
        min(y for _, y in points),
        max(y for _, y in points),
    )
    parts = _header(title)
    parts.extend(_axes(frame, x_label, y_label))
    parts.append(_polyline(frame, points, _LINE_COLOR))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clip_segment(
    intercept: float, slope: float, y_low: float, y_high: float
) -> list[tuple[float, float]]:
    # Intersect the line t = intercept + slope * p with the frame
    # [0, 1] x [y_low, y_high]; the horizontal constraint is linear, so
    # the feasible p values form one interval (possibly empty).
    low, high = 0.0, 1.0
    if slope == 0.0:
        if not y_low <= intercept <= y_high:
            return []
    else:
        bound_a = (y_low - intercept) / slope
        bound_b = (y_high - intercept) / slope
        low = max(low, min(bound_a, bound_b))
        high = min(high, max(bound_a, bound_b))
        if low > high:
            return []
    return [(low, intercept + slope * low), (high, intercept + slope * high)]


def emit_boundary_chart(boundary: DecisionBoundary, title: str) -> str:
    """Render a decision boundary in the effect-versus-probability frame.

    The frame is the unit probability interval crossed with effects in
    [-1, 1]. The two shaded triangles are the combinations no
    probability pair can produce (effect above the probability, or below
    the probability minus one); the boundary line is clipped to the
    frame.
    """
    frame = _Frame(0.0, 1.0, -1.0, 1.0)
    parts = _header(title)

    upper = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    lower = [(0.0, -1.0), (1.0, -1.0), (1.0, 0.0)]
    for triangle in (upper, lower):
        pixels = " ".join(
            f"{_coordinate(frame.x(x))},{_coordinate(frame.y(y))}" for x, y in triangle
        )
        parts.append(f'<polygon points="{pixels}" fill="{_SHADE_COLOR}"/>')

    parts.extend(_axes(frame, "probability of positive outcome if treated", "treatment effect"))

    if boundary.mode == COST_INSENSITIVE:
        segment = [(0.0, 0.0), (1.0, 0.0)]
    else:
        segment = _clip_segment(
            float(boundary.intercept), float(boundary.slope), -1.0, 1.0
        )
    if segment:
        parts.append(_polyline(frame, segment, _LINE_COLOR))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
