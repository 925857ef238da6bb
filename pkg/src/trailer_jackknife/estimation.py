"""Offline jackknife-limit prediction from recorded vehicle sensors.

The two-sided filter makes everything here replay-only; nothing is causal.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .analysis import LIMIT_KINDS, critical_hitch_angles
from .errors import DomainError, LowSpeedError
from .kinematics import SideslipState, VehicleTrailerParams, curvature_from_steering

SPEED_FLOOR = 0.1
MODES = ("slip_partial", "slip_ignorant")
SENSOR_COLUMNS = ("t", "yaw_rate", "speed", "hitch_angle", "steering_wheel_angle")


@dataclass(frozen=True)
class SensorSample:
    t: float
    yaw_rate: float              # rad/s
    speed: float                 # m/s, signed
    hitch_angle: float           # rad
    steering_wheel_angle: float  # rad


def curvature_from_yawrate(yaw_rate: float, speed: float, speed_floor: float = SPEED_FLOOR) -> float:
    if abs(speed) <= speed_floor:
        raise LowSpeedError(f"|speed|={abs(speed)!r} at or below floor {speed_floor!r}")
    return yaw_rate / speed


def smooth(series, window: int = 9) -> np.ndarray:
    """Centred moving average; the window shrinks symmetrically at the ends and skips NaN."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    x = np.asarray(series, dtype=float)
    n = x.size
    half = window // 2
    out = np.full(n, np.nan)
    for i in range(n):
        h = min(half, i, n - 1 - i)
        seg = x[i - h:i + h + 1]
        seg = seg[~np.isnan(seg)]
        if seg.size:
            out[i] = seg.mean()
    return out


def _check_stream(stream: Sequence[SensorSample]):
    if not stream:
        raise DomainError("sensor stream is empty")
    t = np.array([s.t for s in stream])
    if np.any(np.diff(t) <= 0):
        raise DomainError("timestamps must be strictly increasing")


def sensed_curvature(stream: Sequence[SensorSample], p: VehicleTrailerParams, mode: str,
                     speed_floor: float = SPEED_FLOOR) -> np.ndarray:
    """Per-sample curvature used by ``mode``; NaN where it is undefined."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    out = np.full(len(stream), np.nan)
    for i, s in enumerate(stream):
        if mode == "slip_partial":
            try:
                out[i] = curvature_from_yawrate(s.yaw_rate, s.speed, speed_floor)
            except LowSpeedError:
                pass
        else:
            if abs(s.speed) <= speed_floor:
                continue
            phi = s.steering_wheel_angle / p.steering_ratio
            out[i] = curvature_from_steering(phi, SideslipState.zero(), p.wheelbase)
    return out


def _smooth_angle(values: np.ndarray, window: int) -> np.ndarray:
    """Unwrap across valid samples, smooth, and wrap back into (-pi, pi]."""
    out = np.array(values, dtype=float)
    ok = ~np.isnan(out)
    if ok.any():
        out[ok] = np.unwrap(out[ok])
    sm = smooth(out, window)
    return np.where(np.isnan(sm), np.nan, np.pi - np.mod(np.pi - sm, 2.0 * np.pi))


def predict_limits_from_sensors(stream: Sequence[SensorSample], p: VehicleTrailerParams,
                                mode: str = "slip_partial", window: int = 9,
                                speed_floor: float = SPEED_FLOOR) -> Dict[str, np.ndarray]:
    """Critical hitch angles for the sensed curvature, assuming zero rear and trailer slip.

    The sensed curvature stands in for the curvature limit on the side it
    lies: a non-negative curvature fills the ``kmax`` pair and a negative one
    the ``kmin`` pair. Returns arrays keyed by limit name plus ``t`` and the
    smoothed ``hitch_angle``; NaN marks missing samples.
    """
    _check_stream(stream)
    kappa = sensed_curvature(stream, p, mode, speed_floor)
    raw = {kind.value: np.full(len(stream), np.nan) for kind in LIMIT_KINDS}
    zero = SideslipState.zero()
    for i, k in enumerate(kappa):
        if np.isnan(k):
            continue
        pair = critical_hitch_angles(float(k), p, zero)
        if pair is None:
            continue
        for kind in LIMIT_KINDS:
            if kind.uses_kmax == (k >= 0):
                raw[kind.value][i] = pair[0] if kind.plus else pair[1]
    result = {"t": np.array([s.t for s in stream])}
    for name, values in raw.items():
        result[name] = _smooth_angle(values, window)
    result["hitch_angle"] = _smooth_angle(np.array([s.hitch_angle for s in stream]), window)
    return result


def stream_from_log(log, v: float, yaw_noise: float = 0.0,
                    rng: Optional[np.random.Generator] = None) -> List[SensorSample]:
    """Sensor samples a vehicle would have recorded during a simulated run."""
    kappa = np.asarray(log["kappa"])
    yaw = v * kappa
    if yaw_noise:
        rng = rng if rng is not None else np.random.default_rng(0)
        yaw = yaw + rng.normal(0.0, yaw_noise, size=yaw.shape)
    return [SensorSample(float(t), float(w), float(v), float(h), float(sw))
            for t, w, h, sw in zip(log["t"], yaw, log["psi"], log["steering_wheel"])]


def read_sensor_csv(path) -> List[SensorSample]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SENSOR_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"sensor CSV lacks columns {sorted(missing)}")
        return [SensorSample(*(float(row[c]) for c in SENSOR_COLUMNS)) for row in reader]


def write_sensor_csv(stream: Sequence[SensorSample], path) -> None:
    """Lossless sensor CSV: values are written with round-trip precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SENSOR_COLUMNS)
        for s in stream:
            w.writerow([repr(float(getattr(s, c))) for c in SENSOR_COLUMNS])


def write_prediction_csv(prediction: Dict[str, np.ndarray], path) -> None:
    """Prediction CSV in radians; empty cells for missing samples."""
    cols = ["t"] + [k.value for k in LIMIT_KINDS] + ["hitch_angle"]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(len(prediction["t"])):
            w.writerow(["" if math.isnan(prediction[c][i]) else f"{prediction[c][i]:.12g}"
                        for c in cols])


def mean_absolute_angle_error(predicted, truth) -> float:
    """Mean wrapped absolute difference over samples where both are present."""
    a, b = np.asarray(predicted, dtype=float), np.asarray(truth, dtype=float)
    ok = ~(np.isnan(a) | np.isnan(b))
    if not ok.any():
        return math.nan
    d = np.pi - np.mod(np.pi - (a[ok] - b[ok]), 2.0 * np.pi)
    return float(np.mean(np.abs(d)))
