import json
import math

import jsonschema
import numpy as np
import pytest

from gconic import NonUniqueMinimizer, PreconditionError, StepSchedule, as_convergence_check, replicate, run_chain
from gconic.diagnostics import default_checkpoints, load_calibration
from gconic.scene import load_schema

ONE_OVER_K = StepSchedule()


@pytest.fixture(scope="module")
def small_report(request):
    square = request.getfixturevalue("square")
    return replicate(square, (0, 0), ONE_OVER_K, 5000, 30, 11, checkpoints=[10, 100, 1000, 5000])


def test_default_checkpoints():
    assert default_checkpoints(10**5) == [100, 1000, 10000, 100000]
    assert default_checkpoints(500) == [100, 500]
    assert default_checkpoints(50) == [50]


def test_preconditions(square):
    with pytest.raises(PreconditionError):
        replicate(square, (0, 0), ONE_OVER_K, 100, 1, 0)
    with pytest.raises(PreconditionError):
        replicate(square, (0, 0), ONE_OVER_K, 100, 5, 0, checkpoints=[0, 50])
    with pytest.raises(PreconditionError):
        replicate(square, (0, 0), ONE_OVER_K, 100, 5, 0, checkpoints=[200])


def test_replications_match_single_chains(square, small_report):
    for r in (0, 7, 29):
        traj = run_chain(square, (0, 0), ONE_OVER_K, 5000, 11, replication=r)
        assert small_report.final_errors[r] == math.dist(traj.final, (0.5, 0.5))


def test_report_shape(small_report):
    r = small_report
    assert r.checkpoints == [10, 100, 1000, 5000]
    assert all(len(r.lq_errors[q]) == 4 for q in (1, 2))
    assert np.all(r.means(1) >= 0) and np.all(r.means(2) >= 0)
    assert r.min_f_gap >= -2e-3
    assert r.rectangle_violations == 0
    assert r.rectangle == pytest.approx((-math.sqrt(2), -math.sqrt(2), 1 + math.sqrt(2), 1 + math.sqrt(2)))


def test_curves_do_not_increase(small_report):
    for q in (1, 2, None):
        assert small_report.non_increasing(q)


def test_json_matches_schema(small_report):
    doc = json.loads(small_report.to_json())
    jsonschema.validate(doc, load_schema("report"))
    assert doc["schema_version"] == 1
    assert "surrogate" in doc["surrogate_note"]


def test_report_is_reproducible(square, small_report):
    again = replicate(square, (0, 0), ONE_OVER_K, 5000, 30, 11, checkpoints=[10, 100, 1000, 5000])
    assert again.to_json() == small_report.to_json()
    assert again.to_csv() == small_report.to_csv()


def test_csv_export(small_report, tmp_path):
    small_report.write(tmp_path / "r.json", tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[1] == "n,l1_mean,l1_se,l2_mean,l2_se,fgap_mean,fgap_se"
    assert [int(l.split(",")[0]) for l in lines[2:]] == [10, 100, 1000, 5000]
    assert json.loads((tmp_path / "r.json").read_text())["m"] == 30


def test_convergence_check_trivial_cases(small_report):
    assert not as_convergence_check(small_report, 0.0, 0.01)
    xmin, ymin, xmax, ymax = small_report.rectangle
    assert as_convergence_check(small_report, math.hypot(xmax - xmin, ymax - ymin), 1.0)


def test_start_at_minimizer_stays_in_rectangle(triangle):
    from gconic import find_minimizer
    x_star = find_minimizer(triangle).minimizer
    r = replicate(triangle, x_star, ONE_OVER_K, 2000, 10, 3)
    assert r.rectangle_violations == 0


def test_non_unique_warns_and_measures_to_set(two_squares):
    with pytest.warns(NonUniqueMinimizer):
        r = replicate(two_squares, (0.5, 0.5), ONE_OVER_K, 2000, 10, 5)
    assert not r.unique
    assert r.minimizer_set[0] == pytest.approx((1, 2), abs=1e-3)
    assert r.non_increasing(1)


def test_calibration_file():
    cal = load_calibration()
    assert cal["version"] == 1
    assert cal["final_radius"] == 0.05 and cal["fraction"] == 0.9
    assert cal["measured"]["fraction_within_radius"] >= cal["fraction"]


def test_square_reference_run(square):
    cal = load_calibration()
    r = replicate(square, (0, 0), ONE_OVER_K, 10**5, 200, cal["base_seed"])
    assert r.checkpoints == cal["measured"]["checkpoints"]
    assert r.strictly_decreasing(1)
    assert r.decreases_by_factor(cal["decrease_factor"], q=1)
    assert as_convergence_check(r, cal["final_radius"], cal["fraction"])
    assert r.means(1) == pytest.approx(cal["measured"]["l1_mean"], rel=5e-3)
