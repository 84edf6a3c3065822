"""2D geometry helpers shared by the world, belief, and planners.

Obstacles are disks or polygons; all queries go through shapely with thin
wrappers so the rest of the stack never touches raw geometry objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, Point, Polygon

_EPS = 1e-12


@dataclass
class Shape:
    """A solid occluder/obstacle: either a disk or a polygon."""

    kind: str  # "disk" | "polygon"
    geom: object  # shapely geometry (Polygon for both; disks keep params)
    center: np.ndarray | None = None
    radius: float | None = None

    @staticmethod
    def disk(center, radius: float) -> "Shape":
        c = np.asarray(center, dtype=float)
        return Shape("disk", Point(c).buffer(radius, quad_segs=32), c, float(radius))

    @staticmethod
    def polygon(vertices) -> "Shape":
        poly = Polygon([tuple(map(float, v)) for v in vertices])
        if not poly.is_valid or poly.area <= 0:
            raise ValueError("polygon must be simple with positive area")
        return Shape("polygon", poly, None, None)

    def distance_to_point(self, p) -> float:
        """Euclidean distance from p to the solid (0 inside)."""
        if self.kind == "disk":
            return max(0.0, float(np.hypot(*(np.asarray(p) - self.center))) - self.radius)
        return float(self.geom.distance(Point(p)))

    def distance_to_segment(self, a, b) -> float:
        if self.kind == "disk":
            return max(0.0, _point_segment_distance(self.center, a, b) - self.radius)
        return float(self.geom.distance(LineString([tuple(a), tuple(b)])))

    def contains_point(self, p, inflate: float = 0.0) -> bool:
        return self.distance_to_point(p) < inflate + _EPS if inflate > 0 else self.distance_to_point(p) <= _EPS

    def blocks_segment(self, a, b) -> bool:
        """True if the open segment a->b passes through the interior."""
        if self.kind == "disk":
            return _point_segment_distance(self.center, a, b) < self.radius - 1e-9
        inter = self.geom.intersection(LineString([tuple(a), tuple(b)]))
        return inter.length > 1e-9

    def boundary_points(self, n: int = 16) -> np.ndarray:
        """Sample of boundary points (vertices for polygons)."""
        if self.kind == "disk":
            ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
            return self.center + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return np.asarray(self.geom.exterior.coords[:-1], dtype=float)

    def nearest_boundary_point(self, p) -> np.ndarray:
        if self.kind == "disk":
            d = np.asarray(p, dtype=float) - self.center
            n = np.hypot(*d)
            if n < _EPS:
                return self.center + np.array([self.radius, 0.0])
            return self.center + d / n * self.radius
        from shapely.ops import nearest_points

        q, _ = nearest_points(self.geom.exterior, Point(p))
        return np.array([q.x, q.y])


def _point_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom < _EPS:
        return float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(p - (a + t * ab))))


class Workspace:
    """Mission boundary polygon.  Convex boundaries (the common case) get a
    pure-numpy half-plane margin; concave ones fall back to shapely.  For
    convex boundaries the margin of an exterior point near a corner is the
    half-plane value, a lower bound on the true distance: the sign, which
    is what collision gating uses, is always exact."""

    def __init__(self, polygon: Polygon):
        self.polygon = polygon
        hull = polygon.convex_hull
        self._convex = abs(hull.area - polygon.area) < 1e-9 * max(polygon.area, 1.0)
        if self._convex:
            coords = np.asarray(hull.exterior.coords[:-1], dtype=float)
            # normalize to CCW via the shoelace sign
            area2 = float(
                np.sum(coords[:, 0] * np.roll(coords[:, 1], -1) - np.roll(coords[:, 0], -1) * coords[:, 1])
            )
            if area2 < 0:
                coords = coords[::-1]
            edges = np.roll(coords, -1, axis=0) - coords
            lengths = np.hypot(edges[:, 0], edges[:, 1])
            # inward normals for a CCW polygon
            normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1) / lengths[:, None]
            self._anchor = coords
            self._normals = normals

    @staticmethod
    def from_vertices(vertices) -> "Workspace":
        poly = Polygon([tuple(map(float, v)) for v in vertices])
        if not poly.is_valid or poly.area <= 0:
            raise ValueError("workspace polygon must be simple with positive area")
        return Workspace(poly)

    def margin(self, p) -> float:
        """Clearance of p to the workspace boundary; negative outside."""
        if self._convex:
            p = np.asarray(p, dtype=float)
            return float(np.min(np.einsum("ij,ij->i", self._normals, p - self._anchor)))
        d = float(self.polygon.exterior.distance(Point(p)))
        return d if self.polygon.contains(Point(p)) else -d

    def margin_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized margin for an (n, 2) array of points."""
        pts = np.asarray(pts, dtype=float)
        if self._convex:
            # distance of each point to each inward half-plane
            diffs = pts[None, :, :] - self._anchor[:, None, :]
            vals = np.einsum("eij,ej->ei", diffs, self._normals)
            return np.min(vals, axis=0)
        return np.array([self.margin(p) for p in pts])

    def contains_disk(self, center, radius: float) -> bool:
        return self.margin(center) >= radius - 1e-9

    def bounds(self):
        return self.polygon.bounds


def segment_blocked(occluders: list[Shape], a, b) -> bool:
    """Line-of-sight test: any occluder interior crossed by segment a->b."""
    for shape in occluders:
        if shape.blocks_segment(a, b):
            return True
    return False


def min_clearance(shapes: list[Shape], p) -> float:
    """Distance from p to the nearest shape; inf with no shapes."""
    if not shapes:
        return float("inf")
    return min(s.distance_to_point(p) for s in shapes)


def segment_clearance(shapes: list[Shape], a, b) -> float:
    if not shapes:
        return float("inf")
    return min(s.distance_to_segment(a, b) for s in shapes)


def polygon_centroid(vertices) -> np.ndarray:
    poly = Polygon([tuple(map(float, v)) for v in vertices])
    c = poly.centroid
    return np.array([c.x, c.y])
