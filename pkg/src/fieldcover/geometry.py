"""Planar environments, disks, covering grids, and disk independence.

Geometry here is deliberately boring: axis-aligned covering grids,
even-odd polygon membership with the boundary counted inside, and a
greedy maximal independent set over equal-radius disks. Every routine
scans in lexicographic (x, y) order so reruns reproduce layouts exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tangent disks count as intersecting. The pad keeps exact tangency
# (routine on sqrt(2)-spaced grids) on the conflict side of the float
# comparison.
_TANGENCY_PAD = 1e-9
_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        cx, cy = self.center
        cx, cy = float(cx), float(cy)
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValueError(f"disk center must be finite, got {(cx, cy)}")
        object.__setattr__(self, "center", (cx, cy))
        r = float(self.radius)
        if not math.isfinite(r) or r <= 0.0:
            raise ValueError(f"disk radius must be finite and > 0, got {r}")
        object.__setattr__(self, "radius", r)

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        d2 = (pts[:, 0] - self.center[0]) ** 2 + (pts[:, 1] - self.center[1]) ** 2
        return d2 <= self.radius**2 * (1.0 + _TANGENCY_PAD)


def disks_intersect(a: Disk, b: Disk) -> bool:
    """Closed-disk intersection; touching counts."""
    dx = a.center[0] - b.center[0]
    dy = a.center[1] - b.center[1]
    reach = a.radius + b.radius
    return dx * dx + dy * dy <= reach * reach * (1.0 + _TANGENCY_PAD)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _within_box(a, b, p) -> bool:
    return (
        min(a[0], b[0]) - 1e-12 <= p[0] <= max(a[0], b[0]) + 1e-12
        and min(a[1], b[1]) - 1e-12 <= p[1] <= max(a[1], b[1]) + 1e-12
    )


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0) and (
        (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0
    ):
        return True
    if d1 == 0 and _within_box(q1, q2, p1):
        return True
    if d2 == 0 and _within_box(q1, q2, p2):
        return True
    if d3 == 0 and _within_box(p1, p2, q1):
        return True
    if d4 == 0 and _within_box(p1, p2, q2):
        return True
    return False


def _polygon_raycast(verts: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    nxt = np.roll(verts, -1, axis=0)
    for (x1, y1), (x2, y2) in zip(verts, nxt):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = (x2 - x1) * (y - y1) / (y2 - y1) + x1
        inside ^= crosses & (x < xi)
    return inside


def _on_polygon_boundary(verts: np.ndarray, pts: np.ndarray) -> np.ndarray:
    on = np.zeros(len(pts), dtype=bool)
    nxt = np.roll(verts, -1, axis=0)
    for a, b in zip(verts, nxt):
        d = b - a
        t = np.clip(((pts - a) @ d) / (d @ d), 0.0, 1.0)
        closest = a + t[:, None] * d
        on |= np.sum((pts - closest) ** 2, axis=1) <= _BOUNDARY_TOL**2
    return on


class Environment:
    """A bounded planar region: axis-aligned rectangle or simple polygon.

    Boundary points are inside. Construct through ``rectangle`` or
    ``polygon``; the constructor validates positive area and, for
    polygons, simplicity (no two non-adjacent edges may touch).
    """

    def __init__(self, kind: str, vertices: np.ndarray):
        if kind not in ("rectangle", "polygon"):
            raise ValueError(f"unknown environment kind {kind!r}")
        self.kind = kind
        self._verts = np.array(vertices, dtype=float)
        xs, ys = self._verts[:, 0], self._verts[:, 1]
        self.bounds = (float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))

    @classmethod
    def rectangle(cls, min_corner, max_corner) -> "Environment":
        x0, y0 = (float(v) for v in min_corner)
        x1, y1 = (float(v) for v in max_corner)
        if not all(math.isfinite(v) for v in (x0, y0, x1, y1)):
            raise ValueError("rectangle corners must be finite")
        if x1 <= x0 or y1 <= y0:
            raise ValueError(
                f"rectangle needs max strictly above min per axis, got {min_corner} / {max_corner}"
            )
        verts = np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        return cls("rectangle", verts)

    @classmethod
    def polygon(cls, vertices) -> "Environment":
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 (x, y) vertices")
        if not np.all(np.isfinite(verts)):
            raise ValueError("polygon vertices must be finite")
        nxt = np.roll(verts, -1, axis=0)
        if np.any(np.all(np.abs(verts - nxt) < 1e-15, axis=1)):
            raise ValueError("polygon has a zero-length edge")
        area2 = float(np.sum(verts[:, 0] * nxt[:, 1] - nxt[:, 0] * verts[:, 1]))
        if area2 == 0.0:
            raise ValueError("polygon area must be positive")
        if area2 < 0.0:
            verts = verts[::-1].copy()
        m = verts.shape[0]
        edges = [(tuple(verts[i]), tuple(verts[(i + 1) % m])) for i in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if _segments_intersect(*edges[i], *edges[j]):
                    raise ValueError(f"polygon is not simple: edges {i} and {j} intersect")
        return cls("polygon", verts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Environment):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self._verts, other._verts)

    def __repr__(self) -> str:
        return f"Environment({self.kind!r}, {self._verts.tolist()!r})"

    @property
    def vertices(self) -> np.ndarray:
        return self._verts.copy()

    @property
    def area(self) -> float:
        nxt = np.roll(self._verts, -1, axis=0)
        return 0.5 * abs(float(np.sum(self._verts[:, 0] * nxt[:, 1] - nxt[:, 0] * self._verts[:, 1])))

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal; an upper bound on point separation."""
        x0, y0, x1, y1 = self.bounds
        return math.hypot(x1 - x0, y1 - y0)

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.kind == "rectangle":
            x0, y0, x1, y1 = self.bounds
            return (
                (pts[:, 0] >= x0 - _BOUNDARY_TOL)
                & (pts[:, 0] <= x1 + _BOUNDARY_TOL)
                & (pts[:, 1] >= y0 - _BOUNDARY_TOL)
                & (pts[:, 1] <= y1 + _BOUNDARY_TOL)
            )
        return _polygon_raycast(self._verts, pts) | _on_polygon_boundary(self._verts, pts)

    def contains_point(self, p) -> bool:
        return bool(self.contains([tuple(p)])[0])

    def grid(self, spacing: float) -> np.ndarray:
        """Points of an axis-aligned grid that fall inside the region.

        Both far edges are always sampled, appended when the spacing does
        not land on them, so boundary extremes are never missed.
        """
        step = float(spacing)
        if not math.isfinite(step) or step <= 0.0:
            raise ValueError(f"grid spacing must be finite and > 0, got {step}")
        x0, y0, x1, y1 = self.bounds

        def axis(lo, hi):
            n = int(math.floor((hi - lo) / step + 1e-12))
            vals = lo + step * np.arange(n + 1)
            if vals[-1] < hi - 1e-9:
                vals = np.append(vals, hi)
            return vals

        xs, ys = axis(x0, x1), axis(y0, y1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return pts[self.contains(pts)]

    def nearest_point(self, p) -> tuple[float, float]:
        """Closest point of the region to ``p`` (``p`` itself when inside)."""
        px, py = float(p[0]), float(p[1])
        if self.kind == "rectangle":
            x0, y0, x1, y1 = self.bounds
            return (min(max(px, x0), x1), min(max(py, y0), y1))
        if self.contains_point((px, py)):
            return (px, py)
        q = np.array([px, py])
        nxt = np.roll(self._verts, -1, axis=0)
        best, best_d2 = None, math.inf
        for a, b in zip(self._verts, nxt):
            d = b - a
            t = min(max(float((q - a) @ d) / float(d @ d), 0.0), 1.0)
            c = a + t * d
            d2 = float(np.sum((q - c) ** 2))
            if d2 < best_d2:
                best, best_d2 = c, d2
        return (float(best[0]), float(best[1]))

    def _square_touches(self, x0: float, y0: float, side: float) -> bool:
        x1, y1 = x0 + side, y0 + side
        ex0, ey0, ex1, ey1 = self.bounds
        if x1 < ex0 or ex1 < x0 or y1 < ey0 or ey1 < y0:
            return False
        if self.kind == "rectangle":
            return True
        corners = np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        if bool(np.any(self.contains(corners))):
            return True
        v = self._verts
        if bool(
            np.any((v[:, 0] >= x0) & (v[:, 0] <= x1) & (v[:, 1] >= y0) & (v[:, 1] <= y1))
        ):
            return True
        sq = [tuple(c) for c in corners]
        m = v.shape[0]
        for i in range(4):
            for j in range(m):
                if _segments_intersect(sq[i], sq[(i + 1) % 4], tuple(v[j]), tuple(v[(j + 1) % m])):
                    return True
        return False


def cover_environment(env: Environment, radius: float) -> list[Disk]:
    """Disks of one radius whose union contains the environment.

    Square grid of side radius*sqrt(2) anchored at the bounding-box
    corner; each square is inscribed in its disk, so keeping every square
    that touches the environment already yields a cover. Output is
    ordered lexicographically by center.
    """
    r = float(radius)
    if not math.isfinite(r) or r <= 0.0:
        raise ValueError(f"cover radius must be finite and > 0, got {r}")
    side = r * math.sqrt(2.0)
    x0, y0, x1, y1 = env.bounds
    nx = max(1, math.ceil((x1 - x0) / side - 1e-9))
    ny = max(1, math.ceil((y1 - y0) / side - 1e-9))
    disks = []
    for i in range(nx):
        for j in range(ny):
            sx, sy = x0 + i * side, y0 + j * side
            if env._square_touches(sx, sy, side):
                disks.append(Disk((sx + side / 2.0, sy + side / 2.0), r))
    return disks


def greedy_mis(disks: list[Disk]) -> list[Disk]:
    """Greedy maximal independent set over equal-radius disks.

    Scans in lexicographic (x, y) center order, keeping any disk that
    intersects no kept disk; tangency counts as intersection. The result
    is a subset whose members every dropped disk touches.
    """
    if not disks:
        return []
    radii = {d.radius for d in disks}
    if len(radii) > 1:
        raise ValueError(f"greedy_mis needs equal radii, got {sorted(radii)}")
    kept: list[Disk] = []
    for d in sorted(disks, key=lambda d: d.center):
        if all(not disks_intersect(d, k) for k in kept):
            kept.append(d)
    return kept


def lawnmower_rows(big: Disk, small_radius: float) -> list[list[tuple[float, float]]]:
    """Row-structured small-disk centers covering one big disk.

    Cells of side sqrt(2)*small_radius (inscribed in the small disks)
    tile the big disk's circumscribing square; cells that miss the disk
    are dropped, and a kept cell whose center lies outside the disk has
    its point pulled radially onto the boundary. Pulling a point inward
    along its radius never increases its distance to any point of the
    disk, so each cell's overlap with the disk stays covered. Rows come
    back bottom to top, each row left to right.
    """
    r = float(small_radius)
    if not math.isfinite(r) or r <= 0.0:
        raise ValueError(f"small radius must be finite and > 0, got {r}")
    big_r = big.radius
    cx, cy = big.center
    if r >= big_r:
        return [[big.center]]
    side = r * math.sqrt(2.0)
    m = max(1, math.ceil(2.0 * big_r / side - 1e-12))
    half = m * side / 2.0
    rows: list[list[tuple[float, float]]] = []
    for j in range(m):
        row: list[tuple[float, float]] = []
        for i in range(m):
            px = cx - half + (i + 0.5) * side
            py = cy - half + (j + 0.5) * side
            gap_x = max(abs(px - cx) - side / 2.0, 0.0)
            gap_y = max(abs(py - cy) - side / 2.0, 0.0)
            if gap_x * gap_x + gap_y * gap_y > big_r * big_r * (1.0 + _TANGENCY_PAD):
                continue
            d = math.hypot(px - cx, py - cy)
            if d > big_r:
                px = cx + (px - cx) * (big_r / d)
                py = cy + (py - cy) * (big_r / d)
            row.append((px, py))
        if row:
            rows.append(row)
    return rows


def cover_disk_lawnmower(big: Disk, small_radius: float) -> list[tuple[float, float]]:
    """Boustrophedon flattening of ``lawnmower_rows``: alternate row direction."""
    pts: list[tuple[float, float]] = []
    for j, row in enumerate(lawnmower_rows(big, small_radius)):
        pts.extend(row if j % 2 == 0 else row[::-1])
    return pts


def mis_tour_lower_bound(mis: list[Disk]) -> float:
    """0.24 * count * radius, defined for pairwise disjoint equal disks."""
    if not mis:
        return 0.0
    radii = {d.radius for d in mis}
    if len(radii) > 1:
        raise ValueError(f"independent set must share one radius, got {sorted(radii)}")
    for i, a in enumerate(mis):
        for b in mis[i + 1 :]:
            if disks_intersect(a, b):
                raise ValueError(f"disks at {a.center} and {b.center} intersect; set is not independent")
    return 0.24 * len(mis) * mis[0].radius
