"""Deterministic minimizer: the point whose axis lines bisect the mu-area of K."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conic import ConicFunction
from .errors import DegenerateMeasure
from .geometry import Point2
from .measure import BodyMeasure

MASS_TOLERANCE = 1e-8
UNIQUENESS_TOLERANCE = 1e-6
XRAY_GRID = 2048


def bisect_level(fn: Callable[[float], float], lo: float, hi: float, level: float,
                 edge: str = "left", max_iter: int = 200) -> float:
    """Edge of the level set of a non-decreasing function on [lo, hi].

    ``edge="left"`` returns the smallest c with fn(c) >= level, ``"right"``
    the largest c with fn(c) <= level (both up to floating resolution).
    """
    if edge == "left":
        if fn(lo) >= level:
            return lo
        if fn(hi) < level:
            return hi
    elif edge == "right":
        if fn(hi) <= level:
            return hi
        if fn(lo) > level:
            return lo
    else:
        raise ValueError(f"edge must be 'left' or 'right', got {edge!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if edge == "left":
            if fn(mid) >= level:
                hi = mid
            else:
                lo = mid
        else:
            if fn(mid) <= level:
                lo = mid
            else:
                hi = mid
    return hi if edge == "left" else lo


def bisect_mass(m: BodyMeasure, axis: int) -> tuple[float, tuple[float, float]]:
    """Coordinate c with mu(K <axis c) = mu(K)/2, and the interval of all such c."""
    total = m.total_mass()
    if not total > 0:
        raise DegenerateMeasure("cannot bisect a measure without mass")
    edges = m.x_edges if axis == 1 else m.y_edges
    lo, hi = float(edges[0]), float(edges[-1])

    def imbalance(c):
        return float(m.mass_below(axis, c) - m.mass_above(axis, c))

    tol = MASS_TOLERANCE * total
    root = bisect_level(imbalance, lo, hi, 0.0, "left")
    left = bisect_level(imbalance, lo, hi, -tol, "left")
    right = bisect_level(imbalance, lo, hi, tol, "right")
    return root, (min(left, root), max(right, root))


@dataclass(frozen=True)
class BisectionResult:
    minimizer: Point2
    x_interval: tuple[float, float]
    y_interval: tuple[float, float]
    unique: bool

    def distance(self, x, y):
        """Euclidean distance to the minimizer set (a point, or a rectangle when not unique)."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.unique:
            return np.hypot(x - self.minimizer.x, y - self.minimizer.y)
        dx = np.clip(x, *self.x_interval) - x
        dy = np.clip(y, *self.y_interval) - y
        return np.hypot(dx, dy)


def find_minimizer(f: ConicFunction) -> BisectionResult:
    """Bisect each axis independently (the gradient components decouple)."""
    m = f.measure
    xmin, ymin, xmax, ymax = m.body.bounding_box()
    coords, intervals, flat = [], [], []
    for axis, extent in ((1, xmax - xmin), (2, ymax - ymin)):
        root, (a, b) = bisect_mass(m, axis)
        is_point = (b - a) <= UNIQUENESS_TOLERANCE * extent
        coords.append(root if is_point else 0.5 * (a + b))
        intervals.append((a, b))
        flat.append(is_point)
    return BisectionResult(Point2(*coords), intervals[0], intervals[1], all(flat))


def _xray_grid(f: ConicFunction, g: ConicFunction, axis: int, points: int) -> np.ndarray:
    i, j = (0, 2) if axis == 1 else (1, 3)
    bf, bg = f.body.bounding_box(), g.body.bounding_box()
    lo, hi = min(bf[i], bg[i]), max(bf[j], bg[j])
    return lo + (np.arange(points) + 0.5) * (hi - lo) / points


def xray_discrepancy(f: ConicFunction, g: ConicFunction, points: int = XRAY_GRID) -> tuple[float, float]:
    """Largest gap between the X-ray functions of f and g along each axis."""
    gaps = []
    for axis in (1, 2):
        ts = _xray_grid(f, g, axis, points)
        gaps.append(float(np.max(np.abs(f.measure.xray_many(axis, ts) - g.measure.xray_many(axis, ts)))))
    return gaps[0], gaps[1]


def xray_equivalent(f: ConicFunction, g: ConicFunction, tolerance: float) -> bool:
    return max(xray_discrepancy(f, g)) <= tolerance
