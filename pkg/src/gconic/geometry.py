"""Planar compact bodies: membership, bounding boxes, slices, cell coverage.

Every body is closed (boundary points are members).  Besides the point
queries, each body can report the exact fraction of every cell of an
axis-aligned grid that it covers; the measure module builds its quadrature
weights from that.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import shapely

from .errors import InvalidBody

Interval = tuple[float, float]


class Point2(NamedTuple):
    x: float
    y: float


def as_point(p) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point coordinates must be finite, got {p!r}")
    return Point2(x, y)


def merge_intervals(intervals: Sequence[Interval]) -> list[Interval]:
    """Union of closed intervals as a sorted list of disjoint ones."""
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _overlap_matrix(edges: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Fraction of each grid cell [edges[i], edges[i+1]] covered by [lo[j], hi[j]]."""
    a = np.maximum(edges[:-1, None], lo[None, :])
    b = np.minimum(edges[1:, None], hi[None, :])
    return np.clip(b - a, 0.0, None) / np.diff(edges)[:, None]


class CompactBody(ABC):
    """A compact planar body K.

    ``declared_connected`` records the caller's claim that K is connected;
    it is never verified.
    """

    declared_connected: bool

    @abstractmethod
    def contains_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorized closed membership test."""

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return bool(self.contains_many(np.array([x]), np.array([y]))[0])

    @abstractmethod
    def bounding_box(self) -> tuple[float, float, float, float]:
        """Tight box (xmin, ymin, xmax, ymax)."""

    @abstractmethod
    def vertical_slice(self, x: float) -> list[Interval]:
        """The section {y : (x, y) in K} as disjoint closed intervals."""

    @abstractmethod
    def horizontal_slice(self, y: float) -> list[Interval]:
        """The section {x : (x, y) in K} as disjoint closed intervals."""

    @abstractmethod
    def area(self) -> float:
        ...

    @abstractmethod
    def coverage(self, x_edges: np.ndarray, y_edges: np.ndarray) -> np.ndarray:
        """Covered fraction of each grid cell, shape (len(x_edges)-1, len(y_edges)-1)."""

    @abstractmethod
    def breakpoints(self, axis: int) -> np.ndarray:
        """Coordinates along ``axis`` where the slice-length profile may have kinks."""

    def slice(self, axis: int, t: float) -> list[Interval]:
        """Section by the line with coordinate ``t`` on ``axis`` (1 = vertical line x=t)."""
        if axis == 1:
            return self.vertical_slice(t)
        if axis == 2:
            return self.horizontal_slice(t)
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")

    def extent(self) -> float:
        xmin, ymin, xmax, ymax = self.bounding_box()
        return max(xmax - xmin, ymax - ymin)


@dataclass(frozen=True)
class Rectangle(CompactBody):
    xmin: float
    ymin: float
    xmax: float
    ymax: float
    declared_connected: bool = True

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBody("rectangle bounds must be finite")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidBody(f"degenerate rectangle {vals}")

    def contains_many(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return (self.xmin <= x) & (x <= self.xmax) & (self.ymin <= y) & (y <= self.ymax)

    def bounding_box(self):
        return (self.xmin, self.ymin, self.xmax, self.ymax)

    def vertical_slice(self, x):
        return [(self.ymin, self.ymax)] if self.xmin <= x <= self.xmax else []

    def horizontal_slice(self, y):
        return [(self.xmin, self.xmax)] if self.ymin <= y <= self.ymax else []

    def area(self):
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def coverage(self, x_edges, y_edges):
        ox = _overlap_matrix(np.asarray(x_edges, float), np.array([self.xmin]), np.array([self.xmax]))
        oy = _overlap_matrix(np.asarray(y_edges, float), np.array([self.ymin]), np.array([self.ymax]))
        return ox @ oy.T

    def breakpoints(self, axis):
        return np.array([self.xmin, self.xmax] if axis == 1 else [self.ymin, self.ymax])


def _disk_quadrant_area(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    """Area of {u <= a, v <= b} inside the disk of radius r centred at the origin."""
    def W(u):  # antiderivative of sqrt(r^2 - u^2)
        return 0.5 * (u * np.sqrt(np.clip(r * r - u * u, 0.0, None))
                      + r * r * np.arcsin(np.clip(u / r, -1.0, 1.0)))

    A = np.clip(a, -r, r)
    B = np.clip(b, -r, r)
    u0 = np.sqrt(np.clip(r * r - B * B, 0.0, None))
    hi = np.clip(A, -u0, u0)
    middle = B * (hi + u0) + W(hi) - W(-u0)
    outer = 2.0 * (W(np.minimum(A, -u0)) - W(-r)) + 2.0 * (W(np.maximum(A, u0)) - W(u0))
    return middle + np.where(B >= 0, outer, 0.0)


@dataclass(frozen=True)
class Disk(CompactBody):
    cx: float
    cy: float
    radius: float
    declared_connected: bool = True

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.cx, self.cy, self.radius)):
            raise InvalidBody("disk parameters must be finite")
        if not self.radius > 0:
            raise InvalidBody(f"disk radius must be positive, got {self.radius}")

    def contains_many(self, x, y):
        dx = np.asarray(x, float) - self.cx
        dy = np.asarray(y, float) - self.cy
        r2 = self.radius * self.radius
        return dx * dx + dy * dy <= r2 * (1.0 + 1e-12)

    def bounding_box(self):
        r = self.radius
        return (self.cx - r, self.cy - r, self.cx + r, self.cy + r)

    def _half_chord(self, d: float) -> float | None:
        if abs(d) > self.radius:
            return None
        return math.sqrt(max(self.radius * self.radius - d * d, 0.0))

    def vertical_slice(self, x):
        h = self._half_chord(x - self.cx)
        return [] if h is None else [(self.cy - h, self.cy + h)]

    def horizontal_slice(self, y):
        h = self._half_chord(y - self.cy)
        return [] if h is None else [(self.cx - h, self.cx + h)]

    def area(self):
        return math.pi * self.radius ** 2

    def coverage(self, x_edges, y_edges):
        xe = np.asarray(x_edges, float) - self.cx
        ye = np.asarray(y_edges, float) - self.cy
        G = _disk_quadrant_area(xe[:, None], ye[None, :], self.radius)
        cell = np.diff(G, axis=0)
        cell = np.diff(cell, axis=1)
        areas = np.diff(xe)[:, None] * np.diff(ye)[None, :]
        return np.clip(cell / areas, 0.0, 1.0)

    def breakpoints(self, axis):
        c = self.cx if axis == 1 else self.cy
        return np.array([c - self.radius, c, c + self.radius])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_segment(p1, p2, q1)) or (o2 == 0 and on_segment(p1, p2, q2))
            or (o3 == 0 and on_segment(q1, q2, p1)) or (o4 == 0 and on_segment(q1, q2, p2)))


def _polygon_section(xs: np.ndarray, ys: np.ndarray, t: float) -> list[Interval]:
    """Closed section at abscissa t of the polygon with vertices (xs, ys).

    Unions the left- and right-limit sections (half-open crossing rules)
    with any edge lying on the line, which recovers the closed set exactly.
    """
    x0, y0 = xs, ys
    x1, y1 = np.roll(xs, -1), np.roll(ys, -1)
    pieces: list[Interval] = []
    for right in (True, False):
        if right:
            hit = ((x0 <= t) & (t < x1)) | ((x1 <= t) & (t < x0))
        else:
            hit = ((x0 < t) & (t <= x1)) | ((x1 < t) & (t <= x0))
        if not hit.any():
            continue
        a0, b0, a1, b1 = x0[hit], y0[hit], x1[hit], y1[hit]
        yc = np.sort(b0 + (t - a0) * (b1 - b0) / (a1 - a0))
        pieces.extend((float(yc[i]), float(yc[i + 1])) for i in range(0, len(yc) - 1, 2))
    on_line = (x0 == t) & (x1 == t)
    for lo, hi in zip(np.minimum(y0, y1)[on_line], np.maximum(y0, y1)[on_line]):
        pieces.append((float(lo), float(hi)))
    return merge_intervals(pieces)


@dataclass(frozen=True)
class SimplePolygon(CompactBody):
    """Simple polygon; vertices may be given in either orientation and are stored counterclockwise."""

    vertices: tuple[tuple[float, float], ...]
    declared_connected: bool = True
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _ys: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidBody("polygon needs at least 3 vertices")
        arr = np.array(verts)
        if not np.isfinite(arr).all():
            raise InvalidBody("polygon vertices must be finite")
        object.__setattr__(self, "_xs", arr[:, 0].copy())
        object.__setattr__(self, "_ys", arr[:, 1].copy())
        if self.signed_area() < 0:
            # stored counterclockwise whatever the input orientation
            verts = verts[::-1]
            object.__setattr__(self, "vertices", verts)
            object.__setattr__(self, "_xs", arr[::-1, 0].copy())
            object.__setattr__(self, "_ys", arr[::-1, 1].copy())
        if not self.signed_area() > 0:
            raise InvalidBody("polygon has zero area")
        n = len(verts)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                    raise InvalidBody(f"polygon edges {i} and {j} intersect")

    def signed_area(self) -> float:
        xs, ys = self._xs, self._ys
        return 0.5 * float(np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys))

    def area(self):
        return self.signed_area()

    def bounding_box(self):
        return (float(self._xs.min()), float(self._ys.min()),
                float(self._xs.max()), float(self._ys.max()))

    def contains_many(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        on_edge = np.zeros_like(inside)
        tol = 1e-12 * self.extent()
        n = len(self._xs)
        for i in range(n):
            ax, ay = self._xs[i], self._ys[i]
            bx, by = self._xs[(i + 1) % n], self._ys[(i + 1) % n]
            crosses = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = ax + (y - ay) * (bx - ax) / (by - ay)
            inside ^= crosses & (x < xint)
            ex, ey = bx - ax, by - ay
            length = math.hypot(ex, ey)
            cross = ex * (y - ay) - ey * (x - ax)
            dot = ex * (x - ax) + ey * (y - ay)
            on_edge |= (np.abs(cross) <= tol * length) & (dot >= -tol * length) \
                & (dot <= length * length + tol * length)
        return inside | on_edge

    def vertical_slice(self, x):
        return _polygon_section(self._xs, self._ys, float(x))

    def horizontal_slice(self, y):
        return _polygon_section(self._ys, self._xs, float(y))

    def coverage(self, x_edges, y_edges):
        xe, ye = np.asarray(x_edges, float), np.asarray(y_edges, float)
        X, Y = np.meshgrid(xe, ye, indexing="ij")
        node_in = self.contains_many(X, Y)
        corners = (node_in[:-1, :-1].astype(int) + node_in[1:, :-1]
                   + node_in[:-1, 1:] + node_in[1:, 1:])
        cov = (corners == 4).astype(float)
        boundary = (corners > 0) & (corners < 4)
        # cells holding a vertex can be partial even when all corners agree
        ix = np.searchsorted(xe, self._xs, side="right") - 1
        iy = np.searchsorted(ye, self._ys, side="right") - 1
        for i, j in zip(ix, iy):
            for di in (-1, 0):
                for dj in (-1, 0):
                    a, b = i + di, j + dj
                    if 0 <= a < len(xe) - 1 and 0 <= b < len(ye) - 1:
                        boundary[a, b] = True
        bi, bj = np.nonzero(boundary)
        if len(bi):
            boxes = shapely.box(xe[bi], ye[bj], xe[bi + 1], ye[bj + 1])
            poly = shapely.Polygon(self.vertices)
            part = shapely.area(shapely.intersection(boxes, poly))
            cov[bi, bj] = part / ((xe[bi + 1] - xe[bi]) * (ye[bj + 1] - ye[bj]))
        return np.clip(cov, 0.0, 1.0)

    def breakpoints(self, axis):
        return np.unique(self._xs if axis == 1 else self._ys)


@dataclass(frozen=True)
class GridMask(CompactBody):
    """Union of closed square cells.

    ``mask[r][c]`` is the cell [x0 + c*s, x0 + (c+1)*s] x [y0 + r*s, y0 + (r+1)*s],
    so row 0 is the bottom row.
    """

    origin: tuple[float, float]
    cell_size: float
    mask: tuple[tuple[bool, ...], ...]
    declared_connected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        rows = tuple(tuple(bool(v) for v in row) for row in self.mask)
        object.__setattr__(self, "mask", rows)
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise InvalidBody("cell_size must be positive")
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise InvalidBody("mask must be a non-empty rectangular array")
        if not any(any(r) for r in rows):
            raise InvalidBody("mask needs at least one true cell")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.mask, dtype=bool)

    def bounding_box(self):
        m = self.array
        rows = np.nonzero(m.any(axis=1))[0]
        cols = np.nonzero(m.any(axis=0))[0]
        x0, y0 = self.origin
        s = self.cell_size
        return (x0 + cols[0] * s, y0 + rows[0] * s, x0 + (cols[-1] + 1) * s, y0 + (rows[-1] + 1) * s)

    def area(self):
        return float(self.array.sum()) * self.cell_size ** 2

    def contains_many(self, x, y):
        m = self.array
        nr, nc = m.shape
        fx = (np.asarray(x, float) - self.origin[0]) / self.cell_size
        fy = (np.asarray(y, float) - self.origin[1]) / self.cell_size
        out = np.zeros(np.broadcast(fx, fy).shape, dtype=bool)
        # on a cell edge both neighbouring cells are candidates
        for cx in (np.floor(fx), np.ceil(fx) - 1):
            for cy in (np.floor(fy), np.ceil(fy) - 1):
                ok = (cx >= 0) & (cx < nc) & (cy >= 0) & (cy < nr)
                ci = np.where(ok, cx, 0).astype(int)
                ri = np.where(ok, cy, 0).astype(int)
                out |= ok & m[ri, ci]
        return out

    def _section(self, t: float, axis: int) -> list[Interval]:
        m = self.array if axis == 1 else self.array.T
        o_along = self.origin[0] if axis == 1 else self.origin[1]
        o_across = self.origin[1] if axis == 1 else self.origin[0]
        s = self.cell_size
        f = (t - o_along) / s
        lines = {int(math.floor(f)), int(math.ceil(f)) - 1}
        pieces = []
        for c in lines:
            if 0 <= c < m.shape[1]:
                for r in np.nonzero(m[:, c])[0]:
                    pieces.append((float(o_across + r * s), float(o_across + (r + 1) * s)))
        return merge_intervals(pieces)

    def vertical_slice(self, x):
        return self._section(float(x), 1)

    def horizontal_slice(self, y):
        return self._section(float(y), 2)

    def coverage(self, x_edges, y_edges):
        m = self.array.astype(float)
        nr, nc = m.shape
        s = self.cell_size
        x0, y0 = self.origin
        cols = x0 + s * np.arange(nc)
        rows = y0 + s * np.arange(nr)
        ox = _overlap_matrix(np.asarray(x_edges, float), cols, cols + s)
        oy = _overlap_matrix(np.asarray(y_edges, float), rows, rows + s)
        return np.clip(ox @ m.T @ oy.T, 0.0, 1.0)

    def breakpoints(self, axis):
        m = self.array
        n = m.shape[1] if axis == 1 else m.shape[0]
        o = self.origin[0] if axis == 1 else self.origin[1]
        return o + self.cell_size * np.arange(n + 1)
