import math
from pathlib import Path

import numpy as np
import pytest

from gconic import (BodyMeasure, ConicFunction, Disk, GridMask, PiecewiseConstant, ProductDensity,
                    Rectangle, SimplePolygon, TruncatedLinear, UniformOnBody)

SCENES = Path(__file__).resolve().parent.parent / "scenes"
TRIANGLE_MIN = 1 - math.sqrt(2) / 2


def square_formula(x, y):
    return (x - 0.5) ** 2 + (y - 0.5) ** 2 + 0.5


def triangle_formula(x, y):
    return -2 / 3 * (x**3 + y**3) + 2 * (x**2 + y**2) - (x + y) + 2 / 3


def unit(lo, hi):
    return PiecewiseConstant.uniform(lo, hi, 1.0)


SQUARE = Rectangle(0, 0, 1, 1)
TRIANGLE = SimplePolygon(((0, 0), (0, 1), (1, 0)))
DISK = Disk(0, 0, 1)
TWO_SQUARES = GridMask((0, 0), 1, ((True, False, True),))


@pytest.fixture(scope="session")
def square():
    return ConicFunction(BodyMeasure(SQUARE, UniformOnBody()))


@pytest.fixture(scope="session")
def triangle():
    return ConicFunction(BodyMeasure(TRIANGLE, UniformOnBody()))


@pytest.fixture(scope="session")
def disk():
    return ConicFunction(BodyMeasure(DISK, UniformOnBody()))


@pytest.fixture(scope="session")
def two_squares():
    return ConicFunction(BodyMeasure(TWO_SQUARES, UniformOnBody()))


@pytest.fixture(scope="session")
def uniform_fixtures(square, triangle, disk):
    return {"square": square, "triangle": triangle, "disk": disk}


@pytest.fixture(scope="session")
def product_fixtures():
    return {
        "square": ConicFunction(BodyMeasure(SQUARE, ProductDensity(unit(0, 1), unit(0, 1)))),
        "triangle": ConicFunction(BodyMeasure(TRIANGLE, ProductDensity(unit(0, 1), unit(0, 1)))),
        "disk": ConicFunction(BodyMeasure(DISK, ProductDensity(unit(-1, 1), unit(-1, 1)))),
        "triangle_linear": ConicFunction(BodyMeasure(
            TRIANGLE, ProductDensity(TruncatedLinear(0, 1, 2, -2), unit(0, 1)))),
    }


@pytest.fixture(scope="session")
def switch_pair():
    dens = ProductDensity(unit(0, 2), unit(0, 2))
    a = GridMask((0, 0), 1, ((True, False), (False, True)))
    b = GridMask((0, 0), 1, ((False, True), (True, False)))
    return ConicFunction(BodyMeasure(a, dens)), ConicFunction(BodyMeasure(b, dens))


def random_points_in(body, rng, k):
    """k points of the body by rejection from its bounding box."""
    xmin, ymin, xmax, ymax = body.bounding_box()
    out = []
    while len(out) < k:
        p = rng.uniform((xmin, ymin), (xmax, ymax), size=(4 * k, 2))
        out.extend(p[body.contains_many(p[:, 0], p[:, 1])].tolist())
    return np.array(out[:k])


def random_points_near(body, rng, k, pad=0.5):
    xmin, ymin, xmax, ymax = body.bounding_box()
    return rng.uniform((xmin - pad, ymin - pad), (xmax + pad, ymax + pad), size=(k, 2))


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
