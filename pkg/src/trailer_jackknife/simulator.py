"""Fixed-step closed-loop simulation of low-speed vehicle-trailer maneuvers."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path as FilePath
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .analysis import (
    LIMIT_KINDS,
    RegionMap,
    critical_curvature,
    is_jackknife_state,
    jackknife_limits,
    region_map,
)
from .circular import Arc, TWO_PI
from .errors import DomainError, NumericError
from .kinematics import (
    ControlInput,
    SideslipState,
    SystemState,
    VehicleTrailerParams,
    curvature_coefficient,
    curvature_from_steering,
    state_derivative,
    steering_from_curvature,
    wrap_angle,
)


# ---------------------------------------------------------------- sideslip

def sideslip_schedule_terrain(theta_V: float, theta_T: float, phi: float,
                              amplitude: float = math.pi / 6) -> SideslipState:
    """Sideslip on a uniform side slope whose fall line is along heading zero."""
    return SideslipState(amplitude * math.cos(theta_V + phi),
                         amplitude * math.cos(theta_V),
                         amplitude * math.cos(theta_T))


@dataclass(frozen=True)
class ConstantSlip:
    slip: SideslipState = field(default_factory=SideslipState.zero)

    def __call__(self, theta_V: float, theta_T: float, phi: float) -> SideslipState:
        return self.slip


@dataclass(frozen=True)
class TerrainSlip:
    amplitude: float = math.pi / 6

    def __call__(self, theta_V: float, theta_T: float, phi: float) -> SideslipState:
        return sideslip_schedule_terrain(theta_V, theta_T, phi, self.amplitude)


# ---------------------------------------------------------------- path

@dataclass(frozen=True)
class Path:
    """Polyline traversed in point order; the end segments extend to infinity."""

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 2:
            raise DomainError("a path needs at least two points")
        object.__setattr__(self, "points", pts)

    @classmethod
    def straight(cls, heading: float, origin=(0.0, 0.0), length: float = 1000.0) -> "Path":
        x0, y0 = origin
        return cls(((x0, y0), (x0 + length * math.cos(heading), y0 + length * math.sin(heading))))

    def project(self, x: float, y: float) -> Tuple[float, float]:
        """Signed lateral error (left of travel positive) and local path heading."""
        best = None
        n = len(self.points) - 1
        for i in range(n):
            (ax, ay), (bx, by) = self.points[i], self.points[i + 1]
            dx, dy = bx - ax, by - ay
            seg = math.hypot(dx, dy)
            if seg == 0.0:
                continue
            ux, uy = dx / seg, dy / seg
            s = (x - ax) * ux + (y - ay) * uy
            lo = -math.inf if i == 0 else 0.0
            hi = math.inf if i == n - 1 else seg
            s_c = min(max(s, lo), hi)
            px, py = ax + s_c * ux, ay + s_c * uy
            dist = math.hypot(x - px, y - py)
            lateral = (x - ax) * -uy + (y - ay) * ux
            if best is None or dist < best[0]:
                best = (dist, lateral, math.atan2(uy, ux))
        if best is None:
            raise DomainError("path has no non-degenerate segment")
        return best[1], best[2]


def trailer_axle_position(state: SystemState, p: VehicleTrailerParams) -> Tuple[float, float]:
    hx = state.x - p.hitch_length * math.cos(state.theta_V)
    hy = state.y - p.hitch_length * math.sin(state.theta_V)
    return (hx - p.tongue_length * math.cos(state.theta_T),
            hy - p.tongue_length * math.sin(state.theta_T))


# ---------------------------------------------------------------- actuator / integrator

def steering_actuator(current: float, command: float, p: VehicleTrailerParams, dt: float) -> float:
    """Steering-wheel angle after one step of rate- and angle-limited tracking."""
    step = p.steering_wheel_rate_limit * dt
    moved = current + min(max(command - current, -step), step)
    return min(max(moved, -p.steering_wheel_limit), p.steering_wheel_limit)


def integrate_step(state: SystemState, u: ControlInput, p: VehicleTrailerParams,
                   slip: SideslipState, dt: float) -> SystemState:
    """Classical RK4 step with control and sideslip held over the step."""
    y0 = np.array([state.x, state.y, state.theta_V, state.psi])

    def f(y):
        return state_derivative(SystemState(y[0], y[1], y[2], y[3], state.phi), u, p, slip)

    try:
        k1 = f(y0)
        k2 = f(y0 + 0.5 * dt * k1)
        k3 = f(y0 + 0.5 * dt * k2)
        k4 = f(y0 + dt * k3)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise NumericError(f"state derivative failed: {exc}") from exc
    y1 = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y1)):
        raise NumericError("non-finite state after integration step")
    return SystemState(y1[0], y1[1], y1[2], y1[3], state.phi)


# ---------------------------------------------------------------- controllers

@dataclass(frozen=True)
class BackingGains:
    """Dimensionless cascade gains; lengths scale with the combination size.

    ``lateral`` maps lateral error over ``|L1| + L2`` to an approach angle,
    ``course`` maps course error to a hitch setpoint, and ``hitch`` sets the
    hitch-loop bandwidth in units of ``|v| / L2``.
    """

    lateral: float = 0.9
    max_approach: float = math.radians(60.0)
    course: float = 2.6
    hitch: float = 1.75
    max_hitch: float = math.radians(80.0)


def clamp_into_arc(psi: float, arc: Arc, margin: float) -> float:
    """Nearest angle to ``psi`` that stays ``margin`` inside ``arc``."""
    if arc.full:
        return psi
    length = arc.length
    if length <= 2.0 * margin:
        return arc.midpoint()
    d = (psi - arc.lo) % TWO_PI
    if margin <= d <= length - margin:
        return psi
    if d < margin or d > 0.5 * (length + TWO_PI):
        d = margin
    else:
        d = length - margin
    return wrap_angle(arc.lo + d)


def active_region(psi: float, regions: RegionMap) -> Optional[Arc]:
    """Non-jackknife arc containing ``psi``, else the one with the nearest edge."""
    if not regions.nonjackknife:
        return None
    for arc in regions.nonjackknife:
        if arc.contains(psi):
            return arc
    return min(regions.nonjackknife,
               key=lambda a: min(abs(wrap_angle(psi - b)) for b in a.boundaries()))


def backing_controller(state: SystemState, path: Path, gains: BackingGains,
                       p: VehicleTrailerParams, v: float,
                       regions: Optional[RegionMap] = None,
                       margin: Optional[float] = None,
                       trailer_course: Optional[float] = None,
                       model_slip: Optional[SideslipState] = None) -> float:
    """Steering-wheel angle command for tracking ``path`` with the trailer axle.

    Cascade: lateral error -> desired trailer course -> desired hitch angle ->
    curvature. ``trailer_course`` is the measured direction of trailer-axle
    motion (defaults to the trailer heading). With ``regions`` and ``margin``
    the hitch setpoint is kept ``margin`` inside the active non-jackknife arc.
    ``model_slip`` is the sideslip assumed by the hitch loop (zero if omitted).
    """
    qx, qy = trailer_axle_position(state, p)
    lateral, path_heading = path.project(qx, qy)
    course = state.theta_T if trailer_course is None else trailer_course
    if v < 0:
        course += math.pi
    size = abs(p.hitch_length) + p.tongue_length
    approach = max(-gains.max_approach,
                   min(gains.max_approach, math.atan(gains.lateral * lateral / size)))
    course_error = wrap_angle(path_heading - approach - course)

    # near straight, the trailer yaw rate is about -v psi / (L1 + L2), so a
    # hitch setpoint proportional to course error turns the trailer toward the path
    speed = v if abs(v) > 1e-6 else math.copysign(1e-6, v or 1.0)
    psi_des = -math.copysign(gains.course, speed) * course_error
    psi_des = max(-gains.max_hitch, min(gains.max_hitch, psi_des))
    if regions is not None and margin is not None:
        arc = active_region(state.psi, regions)
        if arc is not None:
            psi_des = clamp_into_arc(psi_des, arc, margin)
            # keep the error on the same sheet as the measured hitch angle
            psi_des = state.psi + wrap_angle(psi_des - state.psi)

    nominal = model_slip or SideslipState.zero()
    hold = critical_curvature(state.psi, p, nominal)
    coef = float(curvature_coefficient(state.psi, p, nominal)) / p.tongue_length
    if hold is None or abs(coef) < 1e-3:
        hold, coef = 0.0, math.copysign(1e-3, coef or 1.0)
    bandwidth = gains.hitch * abs(speed) / p.tongue_length
    kappa = hold + bandwidth * (state.psi - psi_des) / (speed * coef)
    kmin, kmax = p.curvature_limits(nominal)
    kappa = min(max(kappa, kmin), kmax)
    phi = steering_from_curvature(kappa, nominal, p.wheelbase)
    wheel = phi * p.steering_ratio
    return min(max(wheel, -p.steering_wheel_limit), p.steering_wheel_limit)


@dataclass(frozen=True)
class ConstantSteering:
    steering_wheel: float  # rad, steering-wheel angle


@dataclass(frozen=True)
class BackingControl:
    gains: BackingGains = field(default_factory=BackingGains)
    jackknife_margin: Optional[float] = None
    slip_aware: bool = True


# ---------------------------------------------------------------- scenario

@dataclass
class Scenario:
    params: VehicleTrailerParams
    initial_state: SystemState
    v: float = -1.0
    duration: float = 60.0
    dt: float = 0.01
    slip_schedule: Union[ConstantSlip, TerrainSlip] = field(default_factory=ConstantSlip)
    controller: Union[ConstantSteering, BackingControl] = field(default_factory=BackingControl)
    path: Optional[Path] = None
    name: str = "scenario"

    def validate(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.duration < self.dt:
            raise DomainError("duration must cover at least one step")
        if abs(self.v) * self.dt > self.params.tongue_length / 20.0:
            raise DomainError("|v| dt must not exceed tongue_length / 20")
        if isinstance(self.controller, BackingControl) and self.path is None:
            raise DomainError("backing controller needs a path")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


LOG_COLUMNS = (
    "t", "x", "y", "theta_V", "theta_T", "psi", "steering_wheel", "kappa",
    "beta_F", "beta_R", "beta_T",
    "psi_plus_kmax", "psi_minus_kmax", "psi_plus_kmin", "psi_minus_kmin",
    "jackknife", "lateral_error",
)
ANGLE_COLUMNS = frozenset({
    "theta_V", "theta_T", "psi", "steering_wheel", "beta_F", "beta_R", "beta_T",
    "psi_plus_kmax", "psi_minus_kmax", "psi_plus_kmin", "psi_minus_kmin",
})


def csv_header(name: str) -> str:
    return f"{name}_deg" if name in ANGLE_COLUMNS else name


def format_number(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.12g}"


@dataclass
class TrajectoryLog:
    """Per-step columns in SI units and radians; NaN marks a nonexistent limit."""

    columns: Dict[str, np.ndarray]
    error: Optional[NumericError] = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"])

    def write_csv(self, path) -> None:
        path = FilePath(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([csv_header(c) for c in LOG_COLUMNS])
            for i in range(len(self)):
                row = []
                for c in LOG_COLUMNS:
                    value = float(self.columns[c][i])
                    if c in ANGLE_COLUMNS and not math.isnan(value):
                        value = math.degrees(value)
                    if c == "jackknife":
                        row.append(str(int(value)))
                    else:
                        row.append(format_number(value))
                w.writerow(row)

    @classmethod
    def read_csv(cls, path) -> "TrajectoryLog":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        cols = {}
        for c in LOG_COLUMNS:
            values = [float(r[csv_header(c)]) if r[csv_header(c)] != "" else math.nan for r in rows]
            arr = np.array(values)
            cols[c] = np.radians(arr) if c in ANGLE_COLUMNS else arr
        return cls(cols)


def _controller_regions(scenario: Scenario, slip: SideslipState,
                        nominal_regions: Optional[RegionMap]) -> Optional[RegionMap]:
    ctrl = scenario.controller
    if not isinstance(ctrl, BackingControl) or ctrl.jackknife_margin is None:
        return None
    if ctrl.slip_aware:
        return region_map(scenario.params, slip)
    return nominal_regions


def run_scenario(scenario: Scenario) -> TrajectoryLog:
    """Simulate ``scenario``; on numeric failure the partial log carries the error."""
    scenario.validate()
    p, v, dt = scenario.params, scenario.v, scenario.dt
    state = scenario.initial_state
    wheel = state.phi * p.steering_ratio
    nominal_regions = None
    if isinstance(scenario.controller, BackingControl) and not scenario.controller.slip_aware:
        nominal_regions = region_map(p, SideslipState.zero())

    rows: Dict[str, List[float]] = {c: [] for c in LOG_COLUMNS}
    error = None
    for k in range(scenario.steps + 1):
        slip = scenario.slip_schedule(state.theta_V, state.theta_T, state.phi)
        limits = jackknife_limits(p, slip)
        ctrl = scenario.controller
        if isinstance(ctrl, ConstantSteering):
            command = ctrl.steering_wheel
        else:
            regions = _controller_regions(scenario, slip, nominal_regions)
            course = state.theta_T + slip.beta_T
            assumed = slip if ctrl.slip_aware else None
            command = backing_controller(state, scenario.path, ctrl.gains, p, v,
                                         regions, ctrl.jackknife_margin, course, assumed)
        if k > 0:
            wheel = steering_actuator(wheel, command, p, dt)
        phi = wheel / p.steering_ratio
        state = replace(state, phi=phi)
        kappa = curvature_from_steering(phi, slip, p.wheelbase)
        if p.kappa_min is not None:
            kappa = min(max(kappa, p.kappa_min), p.kappa_max)

        lateral = math.nan
        if scenario.path is not None:
            lateral, _ = scenario.path.project(*trailer_axle_position(state, p))
        values = {
            "t": k * dt, "x": state.x, "y": state.y, "theta_V": state.theta_V,
            "theta_T": wrap_angle(state.theta_T), "psi": state.psi, "steering_wheel": wheel,
            "kappa": kappa, "beta_F": slip.beta_F, "beta_R": slip.beta_R, "beta_T": slip.beta_T,
            "jackknife": float(is_jackknife_state(state.psi, p, slip)),
            "lateral_error": lateral,
        }
        for kind in LIMIT_KINDS:
            psi_lim = limits[kind].psi
            values[kind.value] = math.nan if psi_lim is None else psi_lim
        for c in LOG_COLUMNS:
            rows[c].append(values[c])
        if k == scenario.steps:
            break
        try:
            state = integrate_step(state, ControlInput(v, kappa=kappa), p, slip, dt)
        except NumericError as exc:
            error = NumericError(str(exc), step=k)
            break
    return TrajectoryLog({c: np.asarray(vals, dtype=float) for c, vals in rows.items()}, error)
