"""TOML scenario files. Angles are degrees on disk and radians everywhere else."""
from __future__ import annotations

import math
from typing import Any, Dict, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DomainError
from .kinematics import SideslipState, SystemState, VehicleTrailerParams
from .simulator import (
    BackingControl,
    BackingGains,
    ConstantSlip,
    ConstantSteering,
    Path,
    Scenario,
    TerrainSlip,
)


class ConfigError(DomainError):
    """Scenario file is malformed or inconsistent."""


def load_config(path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _table(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def _number(table: Dict[str, Any], key: str, default=None) -> Optional[float]:
    value = table.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _rad(table, key, default=None) -> Optional[float]:
    value = _number(table, key, default)
    return None if value is None else math.radians(value)


def build_params(raw: Dict[str, Any]) -> VehicleTrailerParams:
    t = _table(raw, "vehicle")
    for key in ("wheelbase", "hitch_length", "tongue_length"):
        if key not in t:
            raise ConfigError(f"[vehicle] needs {key}")
    kmin, kmax = _number(t, "kappa_min"), _number(t, "kappa_max")
    return VehicleTrailerParams(
        wheelbase=_number(t, "wheelbase"),
        hitch_length=_number(t, "hitch_length"),
        tongue_length=_number(t, "tongue_length"),
        steering_ratio=_number(t, "steering_ratio", 17.6),
        steering_wheel_limit=_rad(t, "steering_wheel_limit_deg", 500.0),
        steering_wheel_rate_limit=_rad(t, "steering_wheel_rate_limit_deg", 400.0),
        kappa_min=kmin,
        kappa_max=kmax,
    )


def build_slip_schedule(raw: Dict[str, Any]):
    t = _table(raw, "slip")
    kind = t.get("kind", "constant")
    if kind == "constant":
        return ConstantSlip(SideslipState.degrees(_number(t, "beta_F_deg", 0.0),
                                                  _number(t, "beta_R_deg", 0.0),
                                                  _number(t, "beta_T_deg", 0.0)))
    if kind == "terrain":
        amplitude = _rad(t, "amplitude_deg", 30.0)
        if abs(amplitude) > 0.5 * math.pi:
            raise ConfigError("terrain amplitude must not exceed 90 degrees")
        return TerrainSlip(amplitude)
    raise ConfigError(f"unknown slip kind {kind!r}")


def build_slip(raw: Dict[str, Any]) -> SideslipState:
    """Sideslip for the static verbs: constant slip, or terrain slip at the initial pose."""
    schedule = build_slip_schedule(raw)
    state = build_initial_state(raw)
    return schedule(state.theta_V, state.theta_T, state.phi)


def build_initial_state(raw: Dict[str, Any], params: Optional[VehicleTrailerParams] = None) -> SystemState:
    t = _table(raw, "initial")
    ratio = params.steering_ratio if params else _number(_table(raw, "vehicle"), "steering_ratio", 17.6)
    return SystemState(x=_number(t, "x", 0.0), y=_number(t, "y", 0.0),
                       theta_V=_rad(t, "theta_V_deg", 0.0), psi=_rad(t, "psi_deg", 0.0),
                       phi=_rad(t, "steering_wheel_deg", 0.0) / ratio)


def build_path(raw: Dict[str, Any]) -> Optional[Path]:
    if "path" not in raw:
        return None
    t = _table(raw, "path")
    if "points" in t:
        try:
            return Path(tuple((float(x), float(y)) for x, y in t["points"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError("path points must be [x, y] pairs") from exc
    return Path.straight(_rad(t, "heading_deg", 180.0),
                         (_number(t, "x0", 0.0), _number(t, "y0", 0.0)))


def build_controller(raw: Dict[str, Any]):
    t = _table(raw, "controller")
    kind = t.get("kind", "backing")
    if kind == "constant":
        if "steering_wheel_deg" not in t:
            raise ConfigError("constant controller needs steering_wheel_deg")
        return ConstantSteering(_rad(t, "steering_wheel_deg"))
    if kind == "backing":
        d = BackingGains()
        gains = BackingGains(
            lateral=_number(t, "lateral", d.lateral),
            max_approach=_rad(t, "max_approach_deg", math.degrees(d.max_approach)),
            course=_number(t, "course", d.course),
            hitch=_number(t, "hitch", d.hitch),
            max_hitch=_rad(t, "max_hitch_deg", math.degrees(d.max_hitch)),
        )
        aware = t.get("slip_aware", True)
        if not isinstance(aware, bool):
            raise ConfigError("slip_aware must be true or false")
        return BackingControl(gains, _rad(t, "jackknife_margin_deg"), aware)
    raise ConfigError(f"unknown controller kind {kind!r}")


def build_scenario(raw: Dict[str, Any]) -> Scenario:
    params = build_params(raw)
    run = _table(raw, "run")
    scenario = Scenario(
        params=params,
        initial_state=build_initial_state(raw, params),
        v=_number(run, "v", -1.0),
        duration=_number(run, "duration", 60.0),
        dt=_number(run, "dt", 0.01),
        slip_schedule=build_slip_schedule(raw),
        controller=build_controller(raw),
        path=build_path(raw),
        name=str(raw.get("name", "scenario")),
    )
    scenario.validate()
    return scenario
