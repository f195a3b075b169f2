"""Scene files: JSON descriptions of a body, a measure and optional run parameters."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
from jsonschema.exceptions import best_match
import numpy as np

from .conic import ConicFunction
from .densities import (AffineDensity, ConstantDensity, Density1D, PiecewiseConstant,
                        TableDensity, TruncatedLinear)
from .errors import InvalidBody, InvalidMeasure, SceneError
from .geometry import CompactBody, Disk, GridMask, Rectangle, SimplePolygon
from .measure import DEFAULT_RESOLUTION, BodyMeasure, GeneralDensity, ProductDensity, UniformOnBody


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("gconic").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class Scene:
    body: CompactBody
    measure: BodyMeasure
    run: dict = field(default_factory=dict)
    sha256: str = ""

    @property
    def conic(self) -> ConicFunction:
        return ConicFunction(self.measure)


def scene_hash(data: dict) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_body(desc: dict) -> CompactBody:
    connected = desc.get("declared_connected")
    extra = {} if connected is None else {"declared_connected": connected}
    shape = desc["shape"]
    if shape == "rectangle":
        return Rectangle(desc["xmin"], desc["ymin"], desc["xmax"], desc["ymax"], **extra)
    if shape == "disk":
        return Disk(desc["center"][0], desc["center"][1], desc["radius"], **extra)
    if shape == "polygon":
        return SimplePolygon(tuple(map(tuple, desc["vertices"])), **extra)
    if shape == "grid_mask":
        return GridMask(tuple(desc["origin"]), desc["cell_size"],
                        tuple(tuple(bool(v) for v in row) for row in desc["mask"]), **extra)
    raise SceneError(f"unknown shape {shape!r}")


def _read_1d_table(path: Path) -> PiecewiseConstant:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"lo", "hi", "value"}:
        raise SceneError(f"{path}: expected CSV columns lo,hi,value")
    lo = [float(r["lo"]) for r in rows]
    hi = [float(r["hi"]) for r in rows]
    if any(a != b for a, b in zip(hi[:-1], lo[1:])):
        raise SceneError(f"{path}: table intervals must be contiguous")
    return PiecewiseConstant(tuple(lo) + (hi[-1],), tuple(float(r["value"]) for r in rows))


def build_density1d(desc: dict, base: Path) -> Density1D:
    family = desc["family"]
    if family == "uniform":
        return PiecewiseConstant.uniform(desc["lo"], desc["hi"], desc.get("height"))
    if family == "linear":
        return TruncatedLinear(desc["lo"], desc["hi"], desc["intercept"], desc["slope"])
    if "csv" in desc:
        return _read_1d_table(base / desc["csv"])
    return PiecewiseConstant(tuple(desc["edges"]), tuple(desc["values"]))


def build_measure(desc: dict, body: CompactBody, base: Path) -> BodyMeasure:
    resolution = desc.get("resolution", DEFAULT_RESOLUTION)
    kind = desc["kind"]
    if kind == "uniform":
        return BodyMeasure(body, UniformOnBody(), resolution)
    if kind == "product":
        return BodyMeasure(body, ProductDensity(build_density1d(desc["f1"], base),
                                                build_density1d(desc["f2"], base)), resolution)
    d = desc["density"]
    if d["type"] == "constant":
        h = ConstantDensity(d["value"])
    elif d["type"] == "affine":
        h = AffineDensity(d["a"], d["b"], d["c"], body.bounding_box())
    else:
        values = np.loadtxt(base / d["csv"], delimiter=",", ndmin=2) if "csv" in d else d["values"]
        h = TableDensity(tuple(d["x_edges"]), tuple(d["y_edges"]), tuple(map(tuple, np.asarray(values, float))))
    return BodyMeasure(body, GeneralDensity(h, desc.get("sup_bound")), resolution)


def parse_scene(data, base: Path | str = ".") -> Scene:
    error = best_match(jsonschema.Draft202012Validator(load_schema("scene")).iter_errors(data))
    if error is not None:
        while error.context:
            error = best_match(error.context)
        where = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise SceneError(f"scene invalid at {where}: {error.message}")
    base = Path(base)
    try:
        body = build_body(data["body"])
        measure = build_measure(data["measure"], body, base)
    except (InvalidBody, InvalidMeasure, OSError, ValueError) as exc:
        raise SceneError(f"scene rejected: {exc}") from exc
    return Scene(body, measure, dict(data.get("run", {})), scene_hash(data))


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: malformed JSON ({exc})") from exc
    return parse_scene(data, path.parent)
