"""Numerical laboratory for inverse curvature flows of star-shaped hypersurfaces of revolution."""

from .exceptions import (
    FlowBreakdown,
    IcflowError,
    NumericalDegeneracyError,
    PositivityError,
    SingularWeightError,
)
from .flow import FlowState, QuantitySeries, rescaled, rhs, run, step
from .functionals import SurfaceReport, surface_report
from .geometry import PointFrame, RadialProfile, make_profile, point_frames
from .symmfunc import CurvatureSpectrum, NewtonSpectrum

__version__ = "0.1.0"

__all__ = [
    "CurvatureSpectrum",
    "FlowBreakdown",
    "FlowState",
    "IcflowError",
    "NewtonSpectrum",
    "NumericalDegeneracyError",
    "PointFrame",
    "PositivityError",
    "QuantitySeries",
    "RadialProfile",
    "SingularWeightError",
    "SurfaceReport",
    "make_profile",
    "point_frames",
    "rescaled",
    "rhs",
    "run",
    "step",
    "surface_report",
]
