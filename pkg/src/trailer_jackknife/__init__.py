"""Jackknife limits and regions for vehicle-trailer systems under wheel sideslip."""

from .analysis import (
    LIMIT_KINDS,
    LimitKind,
    RegionMap,
    Safety,
    TrailerCategory,
    classify_limit_safety,
    classify_trailer,
    critical_curvature,
    critical_curvature_derivative,
    critical_curvature_extrema,
    critical_hitch_angles,
    is_jackknife_state,
    jackknife_limits,
    region_map,
    uncontrollable_hitch_angles,
)
from .errors import DomainError, InconclusiveError, LowSpeedError, NumericError
from .kinematics import (
    ControlInput,
    SideslipState,
    SystemState,
    VehicleTrailerParams,
    curvature_from_steering,
    hitch_rate,
    hitch_rate_phase_form,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "LIMIT_KINDS", "LimitKind", "RegionMap", "Safety", "TrailerCategory",
    "classify_limit_safety", "classify_trailer", "critical_curvature",
    "critical_curvature_derivative", "critical_curvature_extrema", "critical_hitch_angles",
    "is_jackknife_state", "jackknife_limits", "region_map", "uncontrollable_hitch_angles",
    "DomainError", "InconclusiveError", "LowSpeedError", "NumericError",
    "ControlInput", "SideslipState", "SystemState", "VehicleTrailerParams",
    "curvature_from_steering", "hitch_rate", "hitch_rate_phase_form", "wrap_angle",
]
