"""Bounded density families used by the measures.

One-dimensional families carry their own exact supremum and closed-form
primitives (mass and first moment up to a point), which the X-ray
computations integrate against slice intervals.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMeasure


class Density1D(ABC):
    @abstractmethod
    def pdf(self, s): ...

    @abstractmethod
    def cdf(self, s):
        """Integral of the density over (-inf, s]."""

    @abstractmethod
    def moment(self, s):
        """Integral of u * density(u) over (-inf, s]."""

    @property
    @abstractmethod
    def sup(self) -> float: ...

    @abstractmethod
    def breakpoints(self) -> np.ndarray: ...

    def mass(self, a, b):
        return self.cdf(b) - self.cdf(a)


@dataclass(frozen=True)
class PiecewiseConstant(Density1D):
    """Density equal to values[i] on [edges[i], edges[i+1]), zero outside."""

    edges: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(v) for v in self.edges)
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "values", v)
        if len(e) != len(v) + 1 or len(v) == 0:
            raise InvalidMeasure("piecewise-constant density needs len(edges) == len(values) + 1")
        if not np.all(np.diff(e) > 0):
            raise InvalidMeasure("density edges must be strictly increasing")
        if not np.all(np.isfinite(e)) or not np.all(np.isfinite(v)):
            raise InvalidMeasure("density table must be finite")
        if min(v) < 0:
            raise InvalidMeasure("density values must be non-negative")

    @classmethod
    def uniform(cls, lo: float, hi: float, height: float | None = None) -> PiecewiseConstant:
        """Constant density on [lo, hi]; height defaults to 1 / (hi - lo)."""
        if not hi > lo:
            raise InvalidMeasure(f"uniform density needs lo < hi, got [{lo}, {hi}]")
        return cls((lo, hi), (1.0 / (hi - lo) if height is None else height,))

    def _parts(self):
        e = np.asarray(self.edges)
        return e[:-1], e[1:], np.asarray(self.values)

    def pdf(self, s):
        s = np.asarray(s, float)
        e = np.asarray(self.edges)
        idx = np.searchsorted(e, s, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        return np.where(inside, np.asarray(self.values)[np.clip(idx, 0, len(self.values) - 1)], 0.0)

    def cdf(self, s):
        lo, hi, v = self._parts()
        s = np.asarray(s, float)[..., None]
        return np.sum(v * np.clip(np.minimum(s, hi) - lo, 0.0, None), axis=-1)

    def moment(self, s):
        lo, hi, v = self._parts()
        s = np.asarray(s, float)[..., None]
        top = np.clip(s, lo, hi)
        return np.sum(v * 0.5 * (top * top - lo * lo), axis=-1)

    @property
    def sup(self):
        return max(self.values)

    def breakpoints(self):
        return np.asarray(self.edges)


@dataclass(frozen=True)
class TruncatedLinear(Density1D):
    """Density intercept + slope * s on [lo, hi], zero outside."""

    lo: float
    hi: float
    intercept: float
    slope: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InvalidMeasure("linear density needs lo < hi")
        if min(self.intercept + self.slope * self.lo, self.intercept + self.slope * self.hi) < 0:
            raise InvalidMeasure("linear density must be non-negative on its support")

    def pdf(self, s):
        s = np.asarray(s, float)
        inside = (s >= self.lo) & (s <= self.hi)
        return np.where(inside, self.intercept + self.slope * s, 0.0)

    def cdf(self, s):
        t = np.clip(np.asarray(s, float), self.lo, self.hi)
        a, b = self.intercept, self.slope
        return a * (t - self.lo) + 0.5 * b * (t * t - self.lo ** 2)

    def moment(self, s):
        t = np.clip(np.asarray(s, float), self.lo, self.hi)
        a, b = self.intercept, self.slope
        return 0.5 * a * (t * t - self.lo ** 2) + b * (t ** 3 - self.lo ** 3) / 3.0

    @property
    def sup(self):
        return max(self.intercept + self.slope * self.lo, self.intercept + self.slope * self.hi)

    def breakpoints(self):
        return np.array([self.lo, self.hi])


class Density2D(ABC):
    """Planar density h with a declared upper bound."""

    sup_bound: float

    @abstractmethod
    def __call__(self, x, y): ...


@dataclass(frozen=True)
class ConstantDensity(Density2D):
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise InvalidMeasure("density must be non-negative")

    @property
    def sup_bound(self):
        return self.value

    def __call__(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(self.value))


@dataclass(frozen=True)
class AffineDensity(Density2D):
    """h(x, y) = a + b*x + c*y, clipped at zero; the bound is taken over a box."""

    a: float
    b: float
    c: float
    box: tuple[float, float, float, float]

    @property
    def sup_bound(self):
        x0, y0, x1, y1 = self.box
        return max(0.0, *(self.a + self.b * x + self.c * y for x in (x0, x1) for y in (y0, y1)))

    def __call__(self, x, y):
        return np.clip(self.a + self.b * np.asarray(x, float) + self.c * np.asarray(y, float), 0.0, None)


@dataclass(frozen=True)
class TableDensity(Density2D):
    """Piecewise-constant density on a rectilinear table; values[i][j] is cell (x_i, y_j)."""

    x_edges: tuple[float, ...]
    y_edges: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "x_edges", tuple(map(float, self.x_edges)))
        object.__setattr__(self, "y_edges", tuple(map(float, self.y_edges)))
        object.__setattr__(self, "values", tuple(tuple(map(float, r)) for r in self.values))
        v = np.asarray(self.values)
        if v.shape != (len(self.x_edges) - 1, len(self.y_edges) - 1):
            raise InvalidMeasure(f"table shape {v.shape} does not match its edges")
        if not (np.all(np.diff(self.x_edges) > 0) and np.all(np.diff(self.y_edges) > 0)):
            raise InvalidMeasure("table edges must be strictly increasing")
        if not np.isfinite(v).all() or (v < 0).any():
            raise InvalidMeasure("table values must be finite and non-negative")

    @property
    def sup_bound(self):
        return float(np.max(self.values))

    def __call__(self, x, y):
        v = np.asarray(self.values)
        xe, ye = np.asarray(self.x_edges), np.asarray(self.y_edges)
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        i = np.searchsorted(xe, x, side="right") - 1
        j = np.searchsorted(ye, y, side="right") - 1
        ok = (i >= 0) & (i < v.shape[0]) & (j >= 0) & (j < v.shape[1])
        return np.where(ok, v[np.clip(i, 0, v.shape[0] - 1), np.clip(j, 0, v.shape[1] - 1)], 0.0)


@dataclass(frozen=True)
class CallableDensity(Density2D):
    """Arbitrary vectorized callable with a caller-supplied bound."""

    func: object
    sup_bound: float

    def __call__(self, x, y):
        return np.asarray(self.func(x, y), float)
