"""Curve flows on surfaces and in space, the Hasimoto transform, and their solitons."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from ._kernels import BACKEND_NAME
from .curvegeo import (ARCLENGTH, GENERAL, DiscreteCurve, FrenetFrameField, IntrinsicProfile, bending_energy,
                       frenet_analyze, reconstruct_from_intrinsics, resample_arclength, tangent_map)
from .errors import (GeoflowError, TooFewPoints, DegenerateCurve, NotArclength, AllDegenerate, BadFrame, OutOfDomain, InvalidSpec, DegenerateSpeed, BlowUp, StabilityError, TooFewFrames, InvalidParams, NoRoot, DegenerateProfile, ConfigError)
from .flows import (FlowKind, FlowState, SphereMap, StepControl, advance, energy_e1, energy_e2, simulate,
                    stability_bound)
from .hasimoto import (ComplexProfile, GaugeFit, fit_gauge, hasimoto_transform, mkdv_residual, nls_residual,
                       profile_from_sphere_map)
from .report import ResidualReport
from .soliton import (AmbientKilling, ElasticParams, SolitonSpec, evolve_soliton, flow_check,
                      reduced_residual, verify)
from .surface import (ChartCurve, KillingFieldSpec, MagneticFieldSpec, SurfaceOfRevolution, catenoid_band,
                      cylinder, gaussian_bump, sphere)

__all__ = [
    "__version__", "BACKEND_NAME", "ARCLENGTH", "GENERAL", "DiscreteCurve", "FrenetFrameField",
    "IntrinsicProfile", "bending_energy", "frenet_analyze", "reconstruct_from_intrinsics",
    "resample_arclength", "tangent_map", "GeoflowError", "TooFewPoints", "DegenerateCurve",
    "NotArclength", "AllDegenerate", "BadFrame", "OutOfDomain", "InvalidSpec", "DegenerateSpeed",
    "BlowUp", "StabilityError", "TooFewFrames", "InvalidParams", "NoRoot", "DegenerateProfile",
    "ConfigError", "FlowKind", "FlowState", "SphereMap", "StepControl", "advance", "energy_e1",
    "energy_e2", "simulate", "stability_bound", "ComplexProfile", "GaugeFit", "fit_gauge",
    "hasimoto_transform", "mkdv_residual", "nls_residual", "profile_from_sphere_map",
    "ResidualReport", "AmbientKilling", "ElasticParams", "SolitonSpec", "evolve_soliton",
    "flow_check", "reduced_residual", "verify", "ChartCurve", "KillingFieldSpec",
    "MagneticFieldSpec", "SurfaceOfRevolution", "catenoid_band", "cylinder", "gaussian_bump",
    "sphere",
]
