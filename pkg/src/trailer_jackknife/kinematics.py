"""Vehicle-trailer kinematics with exogenous wheel sideslip.

Conventions: the hitch angle is ``psi = theta_T - theta_V``, ``hitch_length``
is positive for a hitch behind the rear axle and negative for a front-bumper
hitch, and ``v`` is the signed rear-axle speed (negative when backing).
Curvatures are plain floats; ``math.inf`` / ``-math.inf`` stand for the
unbounded limits of vehicles that can turn in place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

HALF_PI = 0.5 * math.pi
# |L2 cos(beta_T) + L1 cos(psi + beta_T)| at or below this (relative to the
# geometry scale) is treated as an uncontrollable hitch angle.
POLE_RTOL = 1e-12


def wrap_angle(a):
    """Wrap an angle (or array of angles) into (-pi, pi]."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)
    w = np.where(w <= -np.pi, w + 2.0 * np.pi, w)
    if np.ndim(w) == 0:
        return float(w)
    return w


@dataclass(frozen=True)
class SideslipState:
    beta_F: float = 0.0  # front wheel (rad)
    beta_R: float = 0.0  # rear wheel (rad)
    beta_T: float = 0.0  # trailer wheel (rad)

    def __post_init__(self):
        for name in ("beta_F", "beta_R", "beta_T"):
            b = getattr(self, name)
            if not math.isfinite(b) or abs(b) > HALF_PI:
                raise DomainError(f"{name}={b!r} outside [-pi/2, pi/2]")

    @classmethod
    def zero(cls) -> "SideslipState":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def degrees(cls, beta_F=0.0, beta_R=0.0, beta_T=0.0) -> "SideslipState":
        return cls(math.radians(beta_F), math.radians(beta_R), math.radians(beta_T))


@dataclass(frozen=True)
class VehicleTrailerParams:
    """Geometry and steering limits.

    When ``kappa_min``/``kappa_max`` are left as ``None`` the achievable
    curvature range follows from the steering-wheel limit through
    :func:`curvature_from_steering` under the current sideslip.
    """

    wheelbase: float
    hitch_length: float
    tongue_length: float
    steering_ratio: float = 17.6
    steering_wheel_limit: float = math.radians(500.0)
    steering_wheel_rate_limit: float = math.radians(400.0)
    kappa_min: Optional[float] = None
    kappa_max: Optional[float] = None

    def __post_init__(self):
        if not self.wheelbase > 0:
            raise DomainError("wheelbase must be positive")
        if not self.tongue_length > 0:
            raise DomainError("tongue_length must be positive")
        if not math.isfinite(self.hitch_length):
            raise DomainError("hitch_length must be finite")
        if not (self.steering_ratio > 0 and self.steering_wheel_limit > 0
                and self.steering_wheel_rate_limit > 0):
            raise DomainError("steering ratio and limits must be positive")
        if (self.kappa_min is None) != (self.kappa_max is None):
            raise DomainError("give both kappa_min and kappa_max or neither")
        if self.kappa_min is not None:
            if math.isnan(self.kappa_min) or math.isnan(self.kappa_max):
                raise DomainError("curvature limits must not be NaN")
            if not self.kappa_min < self.kappa_max:
                raise DomainError("kappa_min must be below kappa_max")

    @property
    def max_wheel_angle(self) -> float:
        """Road-wheel angle reached at the steering-wheel limit."""
        return self.steering_wheel_limit / self.steering_ratio

    def curvature_limits(self, slip: Optional[SideslipState] = None):
        """Return ``(kappa_min, kappa_max)`` valid under ``slip``."""
        if self.kappa_min is not None:
            return self.kappa_min, self.kappa_max
        slip = slip or SideslipState.zero()
        phi = self.max_wheel_angle
        a = curvature_from_steering(-phi, slip, self.wheelbase)
        b = curvature_from_steering(phi, slip, self.wheelbase)
        return min(a, b), max(a, b)


@dataclass(frozen=True)
class SystemState:
    x: float = 0.0
    y: float = 0.0
    theta_V: float = 0.0
    psi: float = 0.0
    phi: float = 0.0  # road-wheel steering angle

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @property
    def theta_T(self) -> float:
        return self.theta_V + self.psi


@dataclass(frozen=True)
class ControlInput:
    """Signed speed plus exactly one of curvature or heading rate."""

    v: float
    kappa: Optional[float] = None
    omega: Optional[float] = field(default=None)

    def __post_init__(self):
        if (self.kappa is None) == (self.omega is None):
            raise DomainError("command exactly one of kappa or omega")
        if self.kappa is not None and not math.isfinite(self.kappa):
            raise DomainError("unbounded curvature must be commanded as a heading rate")

    @property
    def heading_rate(self) -> float:
        return self.omega if self.omega is not None else self.v * self.kappa


def curvature_from_steering(phi, slip: SideslipState, L: float):
    """Vehicle curvature produced by road-wheel angle ``phi`` under sideslip."""
    arg = np.asarray(phi, dtype=float) + slip.beta_F
    if np.any(np.abs(arg) >= HALF_PI) or abs(slip.beta_R) >= HALF_PI:
        raise DomainError("phi + beta_F and beta_R must lie strictly inside (-pi/2, pi/2)")
    k = (np.tan(arg) * math.cos(slip.beta_R) - math.sin(slip.beta_R)) / L
    return float(k) if np.ndim(k) == 0 else k


def steering_from_curvature(kappa: float, slip: SideslipState, L: float) -> float:
    """Inverse of :func:`curvature_from_steering` (road-wheel angle)."""
    return math.atan((kappa * L + math.sin(slip.beta_R)) / math.cos(slip.beta_R)) - slip.beta_F


def _check_trailer_slip(slip: SideslipState):
    if abs(slip.beta_T) >= HALF_PI:
        raise DomainError("cos(beta_T) must be nonzero")


def curvature_coefficient(psi, p: VehicleTrailerParams, slip: SideslipState):
    """Factor ``L2 cos(beta_T) + L1 cos(psi + beta_T)`` multiplying curvature in the hitch rate."""
    return p.tongue_length * math.cos(slip.beta_T) + p.hitch_length * np.cos(
        np.asarray(psi, dtype=float) + slip.beta_T)


def is_pole(coefficient, p: VehicleTrailerParams):
    scale = p.tongue_length + abs(p.hitch_length)
    return np.abs(coefficient) <= POLE_RTOL * scale


def hitch_rate(kappa, psi, v, p: VehicleTrailerParams, slip: SideslipState):
    """Hitch-angle rate for a finite curvature command. Broadcasts over arrays."""
    _check_trailer_slip(slip)
    kappa = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(kappa)):
        raise DomainError("hitch_rate needs finite curvature; use hitch_rate_omega")
    psi = np.asarray(psi, dtype=float)
    den = p.tongue_length * math.cos(slip.beta_T)
    # group the psi-only factors first so broadcasting over (psi, kappa) grids stays cheap
    coef = 1.0 + p.hitch_length * np.cos(psi + slip.beta_T) / den
    drift = np.sin(psi - slip.beta_R + slip.beta_T) / den
    rate = kappa * coef
    rate += drift
    rate *= -v
    return float(rate) if np.ndim(rate) == 0 else rate


def hitch_rate_omega(omega, psi, v, p: VehicleTrailerParams, slip: SideslipState):
    """Hitch-angle rate with every ``v * kappa`` replaced by the heading rate."""
    _check_trailer_slip(slip)
    psi = np.asarray(psi, dtype=float)
    den = p.tongue_length * math.cos(slip.beta_T)
    rate = -(omega * (1.0 + p.hitch_length * np.cos(psi + slip.beta_T) / den)
             + v * np.sin(psi - slip.beta_R + slip.beta_T) / den)
    return float(rate) if np.ndim(rate) == 0 else rate


def alpha_radius(kappa, p: VehicleTrailerParams, slip: SideslipState):
    """``sqrt(L1^2 k^2 - 2 sin(beta_R) L1 k + 1)``; never zero for |beta_R| < pi/2."""
    L1 = p.hitch_length
    k = np.asarray(kappa, dtype=float)
    return np.sqrt(L1 * L1 * k * k - 2.0 * math.sin(slip.beta_R) * L1 * k + 1.0)


def hitch_rate_phase_form(kappa, psi, v, p: VehicleTrailerParams, slip: SideslipState):
    """Hitch rate written as ``-v a3 [cos(psi + beta_T - a2) - cos(a1)]``.

    ``cos(a1)`` is taken as the arccos operand itself, so the form is valid
    for every finite curvature, including ones with no critical hitch angle.
    """
    _check_trailer_slip(slip)
    kappa = np.asarray(kappa, dtype=float)
    psi = np.asarray(psi, dtype=float)
    r = alpha_radius(kappa, p, slip)
    den = p.tongue_length * math.cos(slip.beta_T)
    a2 = np.arctan2(math.cos(slip.beta_R), p.hitch_length * kappa - math.sin(slip.beta_R))
    a3 = r / den
    cos_a1 = -den * kappa / r
    rate = -v * a3 * (np.cos(psi + slip.beta_T - a2) - cos_a1)
    return float(rate) if np.ndim(rate) == 0 else rate


def state_derivative(state: SystemState, u: ControlInput, p: VehicleTrailerParams,
                     slip: SideslipState) -> np.ndarray:
    """Rates ``(x_dot, y_dot, theta_V_dot, psi_dot)``."""
    _check_trailer_slip(slip)
    heading = state.theta_V + slip.beta_R
    omega = u.heading_rate
    return np.array([
        u.v * math.cos(heading),
        u.v * math.sin(heading),
        omega,
        hitch_rate_omega(omega, state.psi, u.v, p, slip),
    ])
