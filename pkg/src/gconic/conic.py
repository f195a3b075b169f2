"""The generalized conic function: mean taxicab distance to mu-distributed points."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateMeasure
from .measure import BodyMeasure


def _coords(p):
    x, y = np.asarray(p[0], float), np.asarray(p[1], float)
    return x, y


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


class ConicFunction:
    """F(x, y) = integral over K of |x - a| + |y - b| dmu(a, b).

    The uniform case F_K is simply a ConicFunction over a
    :class:`~gconic.measure.UniformOnBody` measure.
    """

    def __init__(self, measure: BodyMeasure):
        if not measure.total_mass() > 0:
            raise DegenerateMeasure("conic function needs positive total mass")
        self.measure = measure
        self._lipschitz: float | None = None

    @property
    def body(self):
        return self.measure.body

    def evaluate_direct(self, p) -> float:
        """Quadrature of the taxicab integrand over every grid cell."""
        m = self.measure
        x, y = float(p[0]), float(p[1])
        dist = np.abs(x - m.x_centers)[:, None] + np.abs(y - m.y_centers)[None, :]
        return float(np.sum(m.weights * dist))

    def evaluate_closed_form(self, p):
        """F assembled from half-plane masses and truncated first moments.

        Accepts scalar coordinates or arrays of them.
        """
        m = self.measure
        x, y = _coords(p)
        fx = x * (m.mass_below(1, x) - m.mass_above(1, x)) - (m.moment_below(1, x) - m.moment_above(1, x))
        fy = y * (m.mass_below(2, y) - m.mass_above(2, y)) - (m.moment_below(2, y) - m.moment_above(2, y))
        return _out(fx + fy)

    __call__ = evaluate_closed_form

    def gradient(self, p):
        """(mu(K <1 x) - mu(x <1 K), mu(K <2 y) - mu(y <2 K))."""
        m = self.measure
        x, y = _coords(p)
        g1 = m.mass_below(1, x) - m.mass_above(1, x)
        g2 = m.mass_below(2, y) - m.mass_above(2, y)
        if np.ndim(g1) == 0:
            return float(g1), float(g2)
        return np.stack([g1, g2], axis=-1)

    def lipschitz_bound(self) -> float:
        """2 max(C1 sup Y, C2 sup X) for product measures with bounded densities.

        The suprema are taken over X-ray values at the quadrature grid nodes.
        """
        if self._lipschitz is None:
            m = self.measure
            f1, f2 = m.along_density(1), m.along_density(2)
            sup_y = float(np.max(m.xray_many(1, m.x_edges)))
            sup_x = float(np.max(m.xray_many(2, m.y_edges)))
            self._lipschitz = 2.0 * max(f1.sup * sup_y, f2.sup * sup_x)
        return self._lipschitz
