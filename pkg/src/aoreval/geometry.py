"""Overlap and distance primitives for boxes and rotated (quad) annotations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import GeometryError, NonConvexPolygon

Point = Tuple[float, float]

_EPS = 1e-12


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, ``(x, y)`` is the top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise GeometryError(f"box field {name} is not finite: {value!r}")
            object.__setattr__(self, name, value)
        if self.w < 0 or self.h < 0:
            raise GeometryError(f"negative box size: w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> Point:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

    def to_quad(self) -> "QuadAnnotation":
        x0, y0 = self.x, self.y
        x1, y1 = self.x + self.w, self.y + self.h
        return QuadAnnotation(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def shoelace_area(points: Sequence[Point]) -> float:
    """Signed area; positive for counter-clockwise vertex order."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    # proper or touching intersection of two closed segments
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    return (
        (d1 == 0 and on_segment(q1, q2, p1))
        or (d2 == 0 and on_segment(q1, q2, p2))
        or (d3 == 0 and on_segment(p1, p2, q1))
        or (d4 == 0 and on_segment(p1, p2, q2))
    )


@dataclass(frozen=True)
class QuadAnnotation:
    """Four-corner polygon, stored counter-clockwise."""

    corners: Tuple[Point, Point, Point, Point]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.corners)
        if len(pts) != 4:
            raise GeometryError(f"quad needs exactly 4 corners, got {len(pts)}")
        if not all(math.isfinite(c) for p in pts for c in p):
            raise GeometryError("quad corner is not finite")
        area = shoelace_area(pts)
        if abs(area) <= _EPS:
            raise GeometryError("quad has zero area")
        # opposite edges (0-1, 2-3) and (1-2, 3-0) must not meet
        if _segments_cross(pts[0], pts[1], pts[2], pts[3]) or _segments_cross(
            pts[1], pts[2], pts[3], pts[0]
        ):
            raise GeometryError("quad is self-intersecting")
        if area < 0:
            pts = (pts[0], pts[3], pts[2], pts[1])
        object.__setattr__(self, "corners", pts)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "QuadAnnotation":
        if len(values) != 8:
            raise GeometryError(f"quad needs 8 coordinates, got {len(values)}")
        it = iter(values)
        return cls(tuple(zip(it, it)))

    @property
    def area(self) -> float:
        return shoelace_area(self.corners)

    def is_convex(self) -> bool:
        pts = self.corners
        return all(
            _cross(pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]) >= -_EPS for i in range(4)
        )

    def flat(self):
        return tuple(c for p in self.corners for c in p)


def rect_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two axis-aligned boxes.

    Two zero-area boxes give 0.0 rather than NaN.
    """
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def clip_polygon(subject: Sequence[Point], clip: Sequence[Point]) -> list:
    """Sutherland-Hodgman clipping of ``subject`` against a convex CCW ``clip``."""
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            break
        a, b = clip[i], clip[(i + 1) % n]
        inputs, output = output, []
        prev = inputs[-1]
        prev_side = _cross(a, b, prev)
        for cur in inputs:
            cur_side = _cross(a, b, cur)
            if cur_side >= 0:
                if prev_side < 0:
                    output.append(_intersect(prev, cur, prev_side, cur_side))
                output.append(cur)
            elif prev_side >= 0:
                output.append(_intersect(prev, cur, prev_side, cur_side))
            prev, prev_side = cur, cur_side
    return output


def _intersect(p: Point, q: Point, dp: float, dq: float) -> Point:
    t = dp / (dp - dq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def quad_iou(a: QuadAnnotation, b: QuadAnnotation) -> float:
    """Intersection over union of two convex quads.

    Raises :class:`NonConvexPolygon` if either quad is not convex.
    """
    for q in (a, b):
        if not q.is_convex():
            raise NonConvexPolygon(f"quad {q.flat()} is not convex")
    inter_poly = clip_polygon(a.corners, b.corners)
    inter = abs(shoelace_area(inter_poly)) if len(inter_poly) >= 3 else 0.0
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def quad_to_rect(q: QuadAnnotation) -> BoundingBox:
    xs = [p[0] for p in q.corners]
    ys = [p[1] for p in q.corners]
    x0, y0 = min(xs), min(ys)
    return BoundingBox(x0, y0, max(xs) - x0, max(ys) - y0)


def center_error(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, in pixels."""
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)
