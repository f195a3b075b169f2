"""Generalized conic functions on planar compact bodies and their minimization."""
from .conic import ConicFunction
from .densities import (AffineDensity, CallableDensity, ConstantDensity, PiecewiseConstant,
                        TableDensity, TruncatedLinear)
from .diagnostics import ReplicationReport, as_convergence_check, replicate
from .errors import (DegenerateMeasure, GconicError, InvalidBody, InvalidMeasure, NonUniqueMinimizer,
                     NotProbabilityMeasure, PreconditionError, RejectionStall, SceneError,
                     StartNotInBody, UnsupportedMeasureKind)
from .geometry import CompactBody, Disk, GridMask, Point2, Rectangle, SimplePolygon
from .measure import BodyMeasure, GeneralDensity, HalfPlaneQuery, ProductDensity, UniformOnBody
from .oracle import BisectionResult, find_minimizer, xray_discrepancy, xray_equivalent
from .rm import StepSchedule, Trajectory, conditional_mean_q, inflated_rectangle, q_vector, run_chain
from .scene import Scene, load_scene, parse_scene

__version__ = "0.1.0"

__all__ = [
    "AffineDensity", "BisectionResult", "BodyMeasure", "CallableDensity", "CompactBody", "ConicFunction",
    "ConstantDensity", "DegenerateMeasure", "Disk", "GconicError", "GeneralDensity", "GridMask",
    "HalfPlaneQuery", "InvalidBody", "InvalidMeasure", "NonUniqueMinimizer", "NotProbabilityMeasure",
    "PiecewiseConstant", "Point2", "PreconditionError", "ProductDensity", "Rectangle", "RejectionStall",
    "ReplicationReport", "Scene", "SceneError", "SimplePolygon", "StartNotInBody", "StepSchedule",
    "TableDensity", "Trajectory", "TruncatedLinear", "UniformOnBody", "UnsupportedMeasureKind",
    "as_convergence_check", "conditional_mean_q", "find_minimizer", "inflated_rectangle", "load_scene",
    "parse_scene", "q_vector", "replicate", "run_chain", "xray_discrepancy", "xray_equivalent",
]
