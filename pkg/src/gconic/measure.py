"""Finite measures on compact bodies.

A :class:`BodyMeasure` discretizes mu on an n x n midpoint grid over the
bounding box of its body.  Cell weights combine the exact covered fraction
of every cell with the density, and mass inside a cell is treated as spread
uniformly over it.  Half-plane and moment queries therefore split the cell
holding the threshold proportionally, which keeps them exactly additive and
monotone on the shared grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .densities import Density1D, Density2D
from .errors import (DegenerateMeasure, InvalidMeasure, NotProbabilityMeasure,
                     RejectionStall, UnsupportedMeasureKind)
from .geometry import CompactBody, GridMask, Point2

DEFAULT_RESOLUTION = 1024
MAX_CONSECUTIVE_REJECTIONS = 10**6
PROBABILITY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class UniformOnBody:
    """Density 1/A(K) on K."""


@dataclass(frozen=True)
class GeneralDensity:
    h: Density2D
    sup_bound: float | None = None

    @property
    def bound(self) -> float:
        return float(self.h.sup_bound if self.sup_bound is None else self.sup_bound)


@dataclass(frozen=True)
class ProductDensity:
    """(f1 dx) x (f2 dy) restricted to the body."""

    f1: Density1D
    f2: Density1D


MeasureKind = UniformOnBody | GeneralDensity | ProductDensity


@dataclass(frozen=True)
class HalfPlaneQuery:
    axis: int
    side: Literal["below", "above"]
    threshold: float

    def __post_init__(self):
        if self.axis not in (1, 2):
            raise ValueError(f"axis must be 1 or 2, got {self.axis!r}")
        if self.side not in ("below", "above"):
            raise ValueError(f"side must be 'below' or 'above', got {self.side!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")


def _grid_shape(body: CompactBody, n: int) -> tuple[int, int]:
    if isinstance(body, GridMask):
        # align grid lines with mask cells so flat mass regions stay exactly flat
        xmin, ymin, xmax, ymax = body.bounding_box()
        cols = round((xmax - xmin) / body.cell_size)
        rows = round((ymax - ymin) / body.cell_size)
        return (-(-n // cols) * cols, -(-n // rows) * rows)
    return (n, n)


class BodyMeasure:
    def __init__(self, body: CompactBody, kind: MeasureKind | None = None,
                 resolution: int = DEFAULT_RESOLUTION):
        if resolution < 1:
            raise InvalidMeasure("quadrature resolution must be positive")
        self.body = body
        self.kind = UniformOnBody() if kind is None else kind
        self.resolution = int(resolution)

        xmin, ymin, xmax, ymax = body.bounding_box()
        nx, ny = _grid_shape(body, self.resolution)
        self.x_edges = np.linspace(xmin, xmax, nx + 1)
        self.y_edges = np.linspace(ymin, ymax, ny + 1)
        self.x_centers = 0.5 * (self.x_edges[:-1] + self.x_edges[1:])
        self.y_centers = 0.5 * (self.y_edges[:-1] + self.y_edges[1:])
        self.coverage = body.coverage(self.x_edges, self.y_edges)
        cell_area = np.diff(self.x_edges)[:, None] * np.diff(self.y_edges)[None, :]
        self.weights = self._cell_weights(cell_area)

        total = float(self.weights.sum())
        if not total > 0:
            raise DegenerateMeasure(f"measure has non-positive total mass {total}")
        self._total = 1.0 if isinstance(self.kind, UniformOnBody) else total

        self._col = self.weights.sum(axis=1)
        self._row = self.weights.sum(axis=0)
        self._cum = {1: _prefix(self._col), 2: _prefix(self._row)}
        self._suffix = {1: _suffix(self._col), 2: _suffix(self._row)}
        self._edges = {1: self.x_edges, 2: self.y_edges}
        self._masses = {1: self._col, 2: self._row}
        self._cum2d = np.zeros((nx + 1, ny + 1))
        self._cum2d[1:, 1:] = self.weights.cumsum(axis=0).cumsum(axis=1)

    def _cell_weights(self, cell_area: np.ndarray) -> np.ndarray:
        kind = self.kind
        if isinstance(kind, UniformOnBody):
            raw = self.coverage * cell_area
            self._area = float(raw.sum())
            return raw / self._area
        if isinstance(kind, ProductDensity):
            m1 = kind.f1.mass(self.x_edges[:-1], self.x_edges[1:])
            m2 = kind.f2.mass(self.y_edges[:-1], self.y_edges[1:])
            return self.coverage * np.outer(m1, m2)
        if isinstance(kind, GeneralDensity):
            X, Y = np.meshgrid(self.x_centers, self.y_centers, indexing="ij")
            h = kind.h(X, Y)
            on_body = self.coverage > 0
            if (h[on_body] < 0).any():
                raise InvalidMeasure("density takes negative values on the body")
            if h[on_body].max(initial=0.0) > kind.bound * (1 + 1e-12):
                raise InvalidMeasure("density exceeds its declared sup_bound on the body")
            return h * self.coverage * cell_area
        raise TypeError(f"unknown measure kind {kind!r}")

    # -- masses --------------------------------------------------------

    def total_mass(self) -> float:
        return self._total

    def is_probability(self) -> bool:
        return abs(self._total - 1.0) <= PROBABILITY_TOLERANCE

    def mass_below(self, axis: int, t):
        """mu({K <_axis t}) for scalar or array t."""
        return np.interp(t, self._edges[axis], self._cum[axis])

    def mass_above(self, axis: int, t):
        """mu({t <_axis K}) for scalar or array t."""
        return np.interp(t, self._edges[axis], self._suffix[axis])

    def half_plane_mass(self, q: HalfPlaneQuery) -> float:
        fn = self.mass_below if q.side == "below" else self.mass_above
        return float(fn(q.axis, q.threshold))

    def _moment(self, axis: int, t, below: bool):
        edges, m = self._edges[axis], self._masses[axis]
        t = np.asarray(t, float)
        k = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(m) - 1)
        lo, hi = edges[k], edges[k + 1]
        frac = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
        centers = 0.5 * (edges[:-1] + edges[1:])
        if below:
            full = _prefix(m * centers)[k]
            part = m[k] * frac * 0.5 * (lo + np.clip(t, lo, hi))
        else:
            full = _suffix(m * centers)[k + 1]
            part = m[k] * (1 - frac) * 0.5 * (np.clip(t, lo, hi) + hi)
        return full + part

    def moment_below(self, axis: int, t):
        """Integral of the axis coordinate over {K <_axis t}."""
        return self._moment(axis, t, below=True)

    def moment_above(self, axis: int, t):
        return self._moment(axis, t, below=False)

    def truncated_first_moment(self, q: HalfPlaneQuery) -> float:
        fn = self.moment_below if q.side == "below" else self.moment_above
        return float(fn(q.axis, q.threshold))

    def quadrant_masses(self, x: float, y: float) -> tuple[float, float, float, float]:
        """Masses of {a<=x, b<=y}, {a<=x, b>y}, {a>x, b<=y}, {a>x, b>y}.

        These are the probabilities of the sign vectors (+,+), (+,-), (-,+),
        (-,-) for an iterate at (x, y).
        """
        ll = _bilinear(self._cum2d, self.x_edges, self.y_edges, x, y)
        bx = float(self.mass_below(1, x))
        by = float(self.mass_below(2, y))
        lu = bx - ll
        ul = by - ll
        uu = self._total - ll - lu - ul
        return ll, lu, ul, uu

    def density_values(self, x, y) -> np.ndarray:
        """h(p) * 1_K(p), the function the rejection sampler targets."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        inside = self.body.contains_many(x, y)
        kind = self.kind
        if isinstance(kind, UniformOnBody):
            h = np.full(inside.shape, 1.0 / self._area)
        elif isinstance(kind, ProductDensity):
            h = kind.f1.pdf(x) * kind.f2.pdf(y)
        else:
            h = kind.h(x, y)
        return np.where(inside, h, 0.0)

    def sup_bound(self) -> float:
        kind = self.kind
        if isinstance(kind, UniformOnBody):
            return 1.0 / self._area
        if isinstance(kind, ProductDensity):
            return kind.f1.sup * kind.f2.sup
        return kind.bound

    def positive_on_interior(self) -> bool:
        """Sufficient proxy for positive mass of every ball around K.

        Checks that every grid cell lying fully inside K carries positive
        weight; it does not establish the ball condition itself.
        """
        interior = self.coverage >= 1.0 - 1e-12
        return bool(interior.any() and (self.weights[interior] > 0).all())

    # -- X-rays ----------------------------------------------------------

    def _product(self) -> ProductDensity:
        if not isinstance(self.kind, ProductDensity):
            raise UnsupportedMeasureKind("X-ray functions need a product measure")
        return self.kind

    def xray(self, axis: int, t: float) -> float:
        """Y(t) = mu2(K_t) for axis 1, X(t) = mu1(K^t) for axis 2."""
        kind = self._product()
        across = kind.f2 if axis == 1 else kind.f1
        return float(sum(across.mass(lo, hi) for lo, hi in self.body.slice(axis, t)))

    def xray_many(self, axis: int, ts) -> np.ndarray:
        return np.array([self.xray(axis, float(t)) for t in np.asarray(ts, float)])

    def along_density(self, axis: int) -> Density1D:
        kind = self._product()
        return kind.f1 if axis == 1 else kind.f2

    def cavalieri_integral(self, q: HalfPlaneQuery) -> float:
        """Iterated X-ray integral of the half-plane {K <_axis t} (or its complement)."""
        along = self.along_density(q.axis)
        lo, hi = (self.x_edges if q.axis == 1 else self.y_edges)[[0, -1]]
        if q.side == "below":
            a, b = lo, min(q.threshold, hi)
        else:
            a, b = max(q.threshold, lo), hi
        if b <= a:
            return 0.0
        cuts = np.concatenate([self.body.breakpoints(q.axis), along.breakpoints()])
        cuts = np.unique(cuts[(cuts > a) & (cuts < b)])
        value, _ = integrate.quad(
            lambda s: self.xray(q.axis, s) * float(along.pdf(s)), a, b,
            points=cuts if len(cuts) else None, limit=500, epsabs=1e-11, epsrel=1e-10)
        return float(value)

    def verify_cavalieri(self, q: HalfPlaneQuery) -> tuple[float, float]:
        self._product()
        return self.half_plane_mass(q), self.cavalieri_integral(q)

    # -- sampling ------------------------------------------------------

    def require_probability(self) -> None:
        if not self.is_probability():
            raise NotProbabilityMeasure(
                f"sampling needs a probability measure, total mass is {self._total:.9g}")

    def sample(self, rng: np.random.Generator) -> Point2:
        """One point distributed according to mu (rejection sampling)."""
        x, y = SampleStream(self, rng, block=64).take(1)[0]
        return Point2(float(x), float(y))

    def sample_many(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return SampleStream(self, rng).take(k)


class SampleStream:
    """Accepted rejection samples drawn from fixed-size proposal blocks.

    Proposals are consumed in blocks of ``block`` regardless of how many
    samples are requested at a time, so the sequence of samples is a pure
    function of the generator state.
    """

    def __init__(self, measure: BodyMeasure, rng: np.random.Generator, block: int = 4096):
        measure.require_probability()
        self.measure = measure
        self.rng = rng
        self.block = block
        xmin, ymin, xmax, ymax = measure.body.bounding_box()
        self._box = (xmin, ymin, xmax - xmin, ymax - ymin)
        self._sup = measure.sup_bound()
        self._buffer = np.empty((0, 2))
        self._rejected_run = 0
        self.proposals = 0

    def _refill(self) -> None:
        x0, y0, w, h = self._box
        u = self.rng.random((self.block, 3))
        px = x0 + w * u[:, 0]
        py = y0 + h * u[:, 1]
        ok = u[:, 2] * self._sup < self.measure.density_values(px, py)
        self.proposals += self.block
        hits = np.nonzero(ok)[0]
        if len(hits) == 0:
            self._rejected_run += self.block
        else:
            self._rejected_run += hits[0]
            if self._rejected_run < MAX_CONSECUTIVE_REJECTIONS:
                self._rejected_run = self.block - 1 - hits[-1]
        if self._rejected_run >= MAX_CONSECUTIVE_REJECTIONS:
            raise RejectionStall(
                f"{self._rejected_run} consecutive proposals rejected; sup_bound is too loose")
        self._buffer = np.concatenate([self._buffer, np.column_stack([px[ok], py[ok]])])

    def take(self, k: int) -> np.ndarray:
        while len(self._buffer) < k:
            self._refill()
        out, self._buffer = self._buffer[:k], self._buffer[k:]
        return out


def _prefix(a: np.ndarray) -> np.ndarray:
    out = np.zeros(len(a) + 1)
    np.cumsum(a, out=out[1:])
    return out


def _suffix(a: np.ndarray) -> np.ndarray:
    return _prefix(a[::-1])[::-1]


def _bilinear(C: np.ndarray, xe: np.ndarray, ye: np.ndarray, x: float, y: float) -> float:
    def locate(edges, t):
        t = min(max(t, edges[0]), edges[-1])
        k = min(int(np.searchsorted(edges, t, side="right")) - 1, len(edges) - 2)
        return k, (t - edges[k]) / (edges[k + 1] - edges[k])

    i, fx = locate(xe, x)
    j, fy = locate(ye, y)
    return float((1 - fx) * (1 - fy) * C[i, j] + fx * (1 - fy) * C[i + 1, j]
                 + (1 - fx) * fy * C[i, j + 1] + fx * fy * C[i + 1, j + 1])
