"""Replicated chains and Monte Carlo convergence curves.

The convergence theorems are asymptotic, so everything here is a finite
sample surrogate: mean L^q errors and mean F-gaps at log-spaced
checkpoints, plus the fraction of runs ending near the minimizer set.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .conic import ConicFunction
from .errors import NonUniqueMinimizer, PreconditionError
from .measure import SampleStream
from .oracle import find_minimizer
from .rm import BLOCK, StepSchedule, _step_block, atomic_write_text, chain_rng, check_chain_inputs, inflated_rectangle

SCHEMA_VERSION = 1
F_GAP_SLACK = 2e-3


@lru_cache(maxsize=None)
def load_calibration() -> dict:
    """Frozen thresholds from the reference run (radius, fraction, decrease factor)."""
    return json.loads(resources.files("gconic").joinpath("calibration.json").read_text("utf-8"))


def default_checkpoints(n: int) -> list[int]:
    return sorted({c for c in (10**2, 10**3, 10**4) if c < n} | {n})


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float


@dataclass
class ReplicationReport:
    checkpoints: list[int]
    lq_errors: dict[int, list[Estimate]]
    f_errors: list[Estimate]
    m: int
    base_seed: int
    iterations: int
    schedule: StepSchedule
    x0: tuple[float, float]
    minimizer: tuple[float, float]
    minimizer_set: tuple[tuple[float, float], tuple[float, float]]
    unique: bool
    final_errors: list[float]
    tail_improved_fraction: float
    min_f_gap: float
    rectangle: tuple[float, float, float, float]
    rectangle_violations: int
    scene_hash: str | None = field(default=None)

    def means(self, q: int | None = None) -> np.ndarray:
        rows = self.f_errors if q is None else self.lq_errors[q]
        return np.array([e.mean for e in rows])

    def ses(self, q: int | None = None) -> np.ndarray:
        rows = self.f_errors if q is None else self.lq_errors[q]
        return np.array([e.se for e in rows])

    def strictly_decreasing(self, q: int | None = None, k: float = 2.0) -> bool:
        """Every checkpoint-to-checkpoint drop exceeds k combined standard errors.

        ``q=None`` selects the F-gap curve.
        """
        mu, se = self.means(q), self.ses(q)
        drop = mu[:-1] - mu[1:]
        return bool(np.all(drop > k * np.hypot(se[:-1], se[1:])))

    def decreases_by_factor(self, factor: float, q: int | None = 1) -> bool:
        mu = self.means(q)
        return bool(np.all(mu[:-1] >= factor * mu[1:]))

    def non_increasing(self, q: int | None = None, k: float = 2.0) -> bool:
        mu, se = self.means(q), self.ses(q)
        rise = mu[1:] - mu[:-1]
        return bool(np.all(rise <= k * np.hypot(se[:-1], se[1:])))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "surrogate_note": ("finite-sample surrogate for almost-sure and L^q convergence; "
                               "thresholds are calibration values, not theorems"),
            "scene_sha256": self.scene_hash,
            "m": self.m,
            "base_seed": self.base_seed,
            "iterations": self.iterations,
            "schedule": {"family": "power", "t1": self.schedule.t1, "gamma": self.schedule.gamma},
            "x0": list(self.x0),
            "minimizer": list(self.minimizer),
            "minimizer_set": {"x": list(self.minimizer_set[0]), "y": list(self.minimizer_set[1])},
            "unique": self.unique,
            "checkpoints": list(self.checkpoints),
            "lq_errors": {str(q): [asdict(e) for e in rows] for q, rows in sorted(self.lq_errors.items())},
            "f_errors": [asdict(e) for e in self.f_errors],
            "final_errors": list(self.final_errors),
            "tail_improved_fraction": self.tail_improved_fraction,
            "min_f_gap": self.min_f_gap,
            "rectangle": list(self.rectangle),
            "rectangle_violations": self.rectangle_violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        lines = [f"# gconic report v{SCHEMA_VERSION} scene_sha256={self.scene_hash or ''}",
                 "n,l1_mean,l1_se,l2_mean,l2_se,fgap_mean,fgap_se"]
        for i, c in enumerate(self.checkpoints):
            l1, l2, fg = self.lq_errors[1][i], self.lq_errors[2][i], self.f_errors[i]
            lines.append(f"{c},{l1.mean:.12g},{l1.se:.12g},{l2.mean:.12g},{l2.se:.12g},"
                         f"{fg.mean:.12g},{fg.se:.12g}")
        return "\n".join(lines) + "\n"

    def write(self, json_path=None, csv_path=None) -> None:
        if json_path is not None:
            atomic_write_text(json_path, self.to_json())
        if csv_path is not None:
            atomic_write_text(csv_path, self.to_csv())


def _estimate(values: np.ndarray) -> Estimate:
    return Estimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values))))


def replicate(f: ConicFunction, x0, schedule: StepSchedule, n: int, m: int, base_seed: int,
              checkpoints=None, scene_hash: str | None = None) -> ReplicationReport:
    """Run m independent chains (replication r keyed by (base_seed, r)) and summarize.

    The chains advance together as one vectorized array; each one still
    draws from its own sample stream, so replication r reproduces
    ``run_chain(..., seed=base_seed, replication=r)`` exactly.
    """
    x0 = check_chain_inputs(f, x0, n)
    if m < 2:
        raise PreconditionError(f"need at least 2 replications for standard errors, got {m}")
    checkpoints = default_checkpoints(n) if checkpoints is None else sorted({int(c) for c in checkpoints})
    if not checkpoints or checkpoints[0] < 1 or checkpoints[-1] > n:
        raise PreconditionError(f"checkpoints must lie in [1, {n}]")

    best = find_minimizer(f)
    if not best.unique:
        warnings.warn("minimizer is not unique; errors are distances to the minimizer rectangle",
                      NonUniqueMinimizer, stacklevel=2)
    f_best = float(f(best.minimizer))
    rect = inflated_rectangle(f.body, schedule)

    tail = max(n // 10, 1)
    record = sorted(set(checkpoints) | {tail, n})
    snapshots: dict[int, np.ndarray] = {}
    streams = [SampleStream(f.measure, chain_rng(base_seed, r)) for r in range(m)]
    states = np.tile(np.array([x0.x, x0.y]), (m, 1))
    steps = schedule.steps(n)
    violations = 0
    for start in range(0, n, BLOCK):
        count = min(BLOCK, n - start)
        samples = np.stack([s.take(count) for s in streams])
        visited = _step_block(states, samples, steps[start:start + count])
        outside = ((visited[..., 0] < rect[0]) | (visited[..., 0] > rect[2])
                   | (visited[..., 1] < rect[1]) | (visited[..., 1] > rect[3]))
        violations += int(outside.sum())
        for c in record:
            if start < c <= start + count:
                snapshots[c] = visited[c - start - 1].copy()

    lq: dict[int, list[Estimate]] = {1: [], 2: []}
    fe: list[Estimate] = []
    min_gap = math.inf
    for c in checkpoints:
        pts = snapshots[c]
        d = best.distance(pts[:, 0], pts[:, 1])
        for q in (1, 2):
            lq[q].append(_estimate(d ** q))
        gap = np.asarray(f((pts[:, 0], pts[:, 1]))) - f_best
        min_gap = min(min_gap, float(gap.min()))
        fe.append(_estimate(gap))

    final = best.distance(snapshots[n][:, 0], snapshots[n][:, 1])
    at_tail = best.distance(snapshots[tail][:, 0], snapshots[tail][:, 1])
    return ReplicationReport(
        checkpoints=checkpoints, lq_errors=lq, f_errors=fe, m=m, base_seed=base_seed,
        iterations=n, schedule=schedule, x0=(x0.x, x0.y),
        minimizer=(best.minimizer.x, best.minimizer.y),
        minimizer_set=(best.x_interval, best.y_interval), unique=best.unique,
        final_errors=[float(v) for v in final],
        tail_improved_fraction=float(np.mean(final <= at_tail)),
        min_f_gap=min_gap, rectangle=rect, rectangle_violations=violations,
        scene_hash=scene_hash,
    )


def as_convergence_check(report: ReplicationReport, final_radius: float, fraction: float) -> bool:
    """True iff at least ``fraction`` of the runs end strictly within ``final_radius`` of the minimizer set."""
    final = np.asarray(report.final_errors)
    return bool(np.mean(final < final_radius) >= fraction)
