import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gconic import (BodyMeasure, ConicFunction, ConstantDensity, GeneralDensity, NotProbabilityMeasure,
                    PreconditionError, StartNotInBody, StepSchedule, conditional_mean_q, find_minimizer,
                    inflated_rectangle, q_vector, run_chain)
from gconic.rm import THIN_TARGET, _stored_indices, chain_rng

from conftest import SQUARE, random_points_in

ONE_OVER_K = StepSchedule(1.0, 1.0)


def test_q_vector_examples():
    assert q_vector((0.5, 0.5), (0.2, 0.8)) == (1, -1)
    assert q_vector((0, 0), (0, 0)) == (1, 1)


def test_first_step_from_corner(square):
    pts = square.measure.sample_many(chain_rng(0), 1000)
    assert all(q_vector((0, 0), p) == (-1, -1) for p in pts if p[0] > 0 and p[1] > 0)


@pytest.mark.parametrize("seed", [0, 1, 42, 2**40 + 3])
def test_deterministic_first_steps(square, seed):
    traj = run_chain(square, (0, 0), ONE_OVER_K, 2, seed)
    assert traj.state(0) == (0, 0)
    assert traj.state(1) == (1.0, 1.0)
    assert traj.state(2) == (0.5, 0.5)


def test_precondition_errors(square):
    with pytest.raises(PreconditionError):
        run_chain(square, (0, 0), ONE_OVER_K, 0, 1)
    with pytest.raises(StartNotInBody):
        run_chain(square, (2, 2), ONE_OVER_K, 10, 1)
    heavy = ConicFunction(BodyMeasure(SQUARE, GeneralDensity(ConstantDensity(3.0))))
    with pytest.raises(NotProbabilityMeasure):
        run_chain(heavy, (0.5, 0.5), ONE_OVER_K, 10, 1)
    with pytest.raises(PreconditionError):
        run_chain(square, (0, 0), ONE_OVER_K, 10, -1)


@pytest.mark.parametrize("t1,gamma", [(0, 1), (-1, 1), (1, 0.5), (1, 1.2), (float("inf"), 1)])
def test_schedule_validation(t1, gamma):
    with pytest.raises(PreconditionError):
        StepSchedule(t1, gamma)


def test_schedule_values():
    s = StepSchedule(2.0, 0.75)
    assert s.step(1) == 2.0
    assert s.step(16) == pytest.approx(2.0 / 8)
    assert np.all(np.diff(s.steps(100)) < 0)


@pytest.mark.parametrize("name", ["square", "triangle", "disk"])
def test_step_sizes_and_rectangle(uniform_fixtures, name):
    f = uniform_fixtures[name]
    sched = StepSchedule(0.5, 0.8)
    x0 = random_points_in(f.body, np.random.default_rng(1), 1)[0]
    traj = run_chain(f, x0, sched, 20000, 3)
    steps = np.diff(traj.states, axis=0)
    expected = sched.steps(20000)
    assert np.allclose(np.abs(steps[:, 0]), expected, rtol=0, atol=1e-12)
    assert np.allclose(np.abs(steps[:, 1]), expected, rtol=0, atol=1e-12)
    xmin, ymin, xmax, ymax = inflated_rectangle(f.body, sched)
    s = traj.states
    assert np.all((s[:, 0] >= xmin) & (s[:, 0] <= xmax) & (s[:, 1] >= ymin) & (s[:, 1] <= ymax))


def test_seed_determinism(triangle):
    a = run_chain(triangle, (0.1, 0.1), ONE_OVER_K, 5000, 17)
    b = run_chain(triangle, (0.1, 0.1), ONE_OVER_K, 5000, 17)
    c = run_chain(triangle, (0.1, 0.1), ONE_OVER_K, 5000, 18)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_replication_streams_differ(square):
    a = run_chain(square, (0, 0), ONE_OVER_K, 100, 5, replication=0)
    b = run_chain(square, (0, 0), ONE_OVER_K, 100, 5, replication=1)
    assert not np.array_equal(a.states, b.states)


def test_square_chain_converges(square):
    traj = run_chain(square, (0, 0), ONE_OVER_K, 10**5, 42)
    assert math.dist(traj.final, (0.5, 0.5)) < 0.05


def test_thinning_indices():
    keep, stride = _stored_indices(10**6)
    assert stride == 1 and len(keep) == 10**6 + 1
    keep, stride = _stored_indices(3 * 10**6 + 7)
    assert stride == math.ceil((3 * 10**6 + 7) / THIN_TARGET)
    assert {0, 1, 2, 3 * 10**6 + 7} <= set(keep.tolist())
    assert np.all(np.diff(keep) > 0)


def test_thinned_chain_keeps_first_steps(square, monkeypatch):
    import gconic.rm as rm
    monkeypatch.setattr(rm, "THIN_ABOVE", 1000)
    monkeypatch.setattr(rm, "THIN_TARGET", 100)
    full = run_chain(square, (0, 0), ONE_OVER_K, 1000, 4)
    thin = run_chain(square, (0, 0), ONE_OVER_K, 5001, 4)
    assert thin.stride == 51
    assert thin.state(1) == (1.0, 1.0) and thin.state(2) == (0.5, 0.5)
    assert thin.state(51 * 19) == full.state(51 * 19)
    assert thin.indices[-1] == 5001
    with pytest.raises(KeyError):
        thin.state(3)


def test_trajectory_csv(square, tmp_path):
    traj = run_chain(square, (0, 0), ONE_OVER_K, 3, 1)
    traj.scene_hash = "abc"
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# gconic trajectory v1"
    assert "# seed=1" in lines and "# scene_sha256=abc" in lines
    i = lines.index("k,t_k,x1,x2")
    assert lines[i + 1:i + 4] == ["0,,0,0", "1,1,1,1", "2,0.5,0.5,0.5"]
    assert list(tmp_path.iterdir()) == [path]


def test_conditional_mean_examples(square):
    se = math.sqrt(1 - 0.16) / math.sqrt(10**5)
    m1, m2 = conditional_mean_q(square, (0.3, 0.7), 10**5, 1)
    assert abs(m1 + 0.4) <= 4 * se and abs(m2 - 0.4) <= 4 * se
    assert conditional_mean_q(square, (-3, -3), 100, 2) == (-1.0, -1.0)
    m1, m2 = conditional_mean_q(square, find_minimizer(square).minimizer, 10**5, 3)
    assert abs(m1) <= 4 / math.sqrt(10**5) and abs(m2) <= 4 / math.sqrt(10**5)


@pytest.mark.parametrize("name", ["square", "triangle", "disk"])
def test_conditional_mean_is_gradient(uniform_fixtures, name):
    f = uniform_fixtures[name]
    rng = np.random.default_rng(30)
    n = 10**5
    for i, (x, y) in enumerate(random_points_in(f.body, rng, 10)):
        g = f.gradient((x, y))
        m = conditional_mean_q(f, (x, y), n, 100 + i)
        for gi, mi in zip(g, m):
            se = math.sqrt(max(1 - gi * gi, 1e-12) / n)
            assert abs(mi - gi) <= 4 * se


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_q_vector_norm(a, b, c, d):
    q = q_vector((a, b), (c, d))
    assert set(q) <= {-1, 1}
    assert math.hypot(*q) == math.sqrt(2)
