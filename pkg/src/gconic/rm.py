"""Robbins-Monro sign recursion X_{k+1} = X_k - t_{k+1} Q_{k+1}.

Q_{k+1} compares the current iterate with a fresh mu-distributed sample
componentwise (ties count as +1).  Its conditional mean is the gradient of
the conic function, so the chain drifts to the bisection point.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .conic import ConicFunction
from .errors import PreconditionError, StartNotInBody
from .geometry import CompactBody, Point2, as_point
from .measure import SampleStream

THIN_ABOVE = 10**6
THIN_TARGET = 10**4
BLOCK = 4096


@dataclass(frozen=True)
class StepSchedule:
    """t_k = t1 / k**gamma with gamma in (1/2, 1]."""

    t1: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.t1) and self.t1 > 0):
            raise PreconditionError(f"t1 must be positive, got {self.t1}")
        if not 0.5 < self.gamma <= 1.0:
            raise PreconditionError(
                f"gamma must lie in (1/2, 1] for a divergent, square-summable schedule, got {self.gamma}")

    def step(self, k: int) -> float:
        return float(self.steps(k)[-1])

    def steps(self, n: int) -> np.ndarray:
        """[t_1, ..., t_n]."""
        return self.t1 / np.arange(1, n + 1, dtype=float) ** self.gamma

    def describe(self) -> str:
        return f"power t1={self.t1!r} gamma={self.gamma!r}"


class SignVector(NamedTuple):
    s1: int
    s2: int


def q_vector(x, p) -> SignVector:
    return SignVector(1 if x[0] >= p[0] else -1, 1 if x[1] >= p[1] else -1)


def chain_rng(seed: int, replication: int | None = None) -> np.random.Generator:
    """Philox stream for one chain; replications get keys derived from (seed, r)."""
    if seed < 0:
        raise PreconditionError("seed must be non-negative")
    entropy = [seed] if replication is None else [seed, replication]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def inflated_rectangle(body: CompactBody, schedule: StepSchedule) -> tuple[float, float, float, float]:
    """Bounding box of K grown by t1 * sqrt(2); iterates started in K never leave it."""
    pad = schedule.t1 * math.sqrt(2.0)
    xmin, ymin, xmax, ymax = body.bounding_box()
    return (xmin - pad, ymin - pad, xmax + pad, ymax + pad)


def _step_block(states: np.ndarray, samples: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Advance chains in place; states (M, 2), samples (M, K, 2), steps (K,).

    Returns every visited state, shape (K, M, 2).
    """
    K = len(steps)
    visited = np.empty((K,) + states.shape)
    for k in range(K):
        sign = np.where(states >= samples[:, k, :], 1.0, -1.0)
        states -= steps[k] * sign
        visited[k] = states
    return visited


def check_chain_inputs(f: ConicFunction, x0, n: int) -> Point2:
    x0 = as_point(x0)
    if n < 1:
        raise PreconditionError(f"iteration count must be at least 1, got {n}")
    f.measure.require_probability()
    if not f.body.contains(x0):
        raise StartNotInBody(f"start point {tuple(x0)} is not in the body")
    return x0


@dataclass
class Trajectory:
    indices: np.ndarray
    states: np.ndarray
    seed: int
    schedule: StepSchedule
    iterations: int
    replication: int | None = None
    stride: int = 1
    scene_hash: str | None = field(default=None, compare=False)

    @property
    def final(self) -> Point2:
        return Point2(float(self.states[-1, 0]), float(self.states[-1, 1]))

    def state(self, k: int) -> Point2:
        pos = int(np.searchsorted(self.indices, k))
        if pos >= len(self.indices) or self.indices[pos] != k:
            raise KeyError(f"state {k} was not stored (stride {self.stride})")
        return Point2(float(self.states[pos, 0]), float(self.states[pos, 1]))

    def to_csv(self, path) -> None:
        steps = self.schedule.steps(self.iterations)
        lines = [
            "# gconic trajectory v1",
            f"# seed={self.seed}",
            f"# replication={'' if self.replication is None else self.replication}",
            f"# schedule={self.schedule.describe()}",
            f"# iterations={self.iterations}",
            f"# stride={self.stride}",
            f"# scene_sha256={self.scene_hash or ''}",
            "k,t_k,x1,x2",
        ]
        for k, (a, b) in zip(self.indices.tolist(), self.states.tolist()):
            t = "" if k == 0 else f"{steps[k - 1]:.17g}"
            lines.append(f"{k},{t},{a:.17g},{b:.17g}")
        atomic_write_text(path, "\n".join(lines) + "\n")


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stored_indices(n: int) -> tuple[np.ndarray, int]:
    if n <= THIN_ABOVE:
        return np.arange(n + 1), 1
    stride = -(-n // THIN_TARGET)
    keep = np.union1d(np.arange(0, n + 1, stride), [0, 1, 2, n])
    return keep, stride


def run_chain(f: ConicFunction, x0, schedule: StepSchedule, n: int, seed: int,
              replication: int | None = None) -> Trajectory:
    x0 = check_chain_inputs(f, x0, n)
    stream = SampleStream(f.measure, chain_rng(seed, replication))
    steps = schedule.steps(n)
    keep, stride = _stored_indices(n)
    stored = np.empty((len(keep), 2))
    stored[0] = x0
    pos = 1
    state = np.array([[x0.x, x0.y]])
    for start in range(0, n, BLOCK):
        count = min(BLOCK, n - start)
        visited = _step_block(state, stream.take(count)[None], steps[start:start + count])[:, 0, :]
        ks = np.arange(start + 1, start + count + 1)
        sel = np.isin(ks, keep[pos:pos + count + 1]) if stride > 1 else slice(None)
        chunk = visited[sel]
        stored[pos:pos + len(chunk)] = chunk
        pos += len(chunk)
    return Trajectory(keep, stored, seed, schedule, n, replication, stride)


def conditional_mean_q(f: ConicFunction, x, samples: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of E(Q | X = x), which equals grad F(x)."""
    if samples < 1:
        raise PreconditionError("samples must be at least 1")
    point = as_point(x)
    stream = SampleStream(f.measure, chain_rng(seed))
    P = stream.take(samples)
    q = np.where(np.array(point)[None, :] >= P, 1.0, -1.0)
    m = q.mean(axis=0)
    return float(m[0]), float(m[1])
