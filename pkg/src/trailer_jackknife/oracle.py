"""Brute-force jackknife classification by sampling achievable curvatures.

Nothing here uses the critical-curvature or critical-hitch-angle closed
forms: a hitch angle is jackknifing when the sampled hitch-angle rates over
the whole curvature range share one strict sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .analysis import Safety
from .errors import InconclusiveError
from .kinematics import SideslipState, VehicleTrailerParams, hitch_rate, wrap_angle

_CHUNK = 256


@dataclass(frozen=True)
class OracleConfig:
    kappa_samples: int = 2001
    psi_resolution: float = 1e-3
    bisection_tol: float = 1e-6
    infinite_kappa_surrogate: float = 1e6

    def __post_init__(self):
        if self.kappa_samples < 3:
            raise ValueError("kappa_samples must be at least 3")
        if min(self.psi_resolution, self.bisection_tol, self.infinite_kappa_surrogate) <= 0:
            raise ValueError("oracle resolutions must be positive")


def kappa_samples(kmin: float, kmax: float, cfg: OracleConfig) -> np.ndarray:
    """Curvatures spanning ``[kmin, kmax]``; unbounded ends get log-spaced tails."""
    big = cfg.infinite_kappa_surrogate
    n = cfg.kappa_samples
    if math.isfinite(kmin) and math.isfinite(kmax):
        return np.linspace(kmin, kmax, n)
    core_lo = kmin if math.isfinite(kmin) else min(-1.0, kmax - 1.0)
    core_hi = kmax if math.isfinite(kmax) else max(1.0, kmin + 1.0)
    n_tails = int(not math.isfinite(kmin)) + int(not math.isfinite(kmax))
    n_tail = max(2, n // 4)
    parts = [np.linspace(core_lo, core_hi, max(3, n - n_tails * n_tail))]
    if not math.isfinite(kmin):
        parts.append(-np.geomspace(max(1.0, abs(core_lo)), big, n_tail))
    if not math.isfinite(kmax):
        parts.append(np.geomspace(max(1.0, abs(core_hi)), big, n_tail))
    return np.unique(np.concatenate(parts))


def _jackknife_mask(psi: np.ndarray, ks: np.ndarray, p, slip) -> np.ndarray:
    out = np.empty(psi.shape, dtype=bool)
    for start in range(0, psi.size, _CHUNK):
        block = psi[start:start + _CHUNK, None]
        rates = hitch_rate(ks[None, :], block, -1.0, p, slip)
        lo, hi = rates.min(axis=1), rates.max(axis=1)
        out[start:start + _CHUNK] = (lo > 0) | (hi < 0) | ((lo == 0) & (hi == 0))
    return out


def oracle_is_jackknife(psi: float, p: VehicleTrailerParams, slip: SideslipState,
                        cfg: OracleConfig = OracleConfig()) -> bool:
    ks = kappa_samples(*p.curvature_limits(slip), cfg)
    return bool(_jackknife_mask(np.array([float(psi)]), ks, p, slip)[0])


def _psi_grid(cfg: OracleConfig) -> np.ndarray:
    n = int(math.ceil(2.0 * math.pi / cfg.psi_resolution))
    return -math.pi + (np.arange(n) + 0.5) * (2.0 * math.pi / n)


def _bisect(a: float, b: float, state_a: bool, p, slip, ks, cfg) -> float:
    # a < b (unwrapped); state changes somewhere in (a, b]
    while b - a > cfg.bisection_tol:
        m = 0.5 * (a + b)
        if bool(_jackknife_mask(np.array([m]), ks, p, slip)[0]) == state_a:
            a = m
        else:
            b = m
    return wrap_angle(0.5 * (a + b))


def oracle_classification_flips(p: VehicleTrailerParams, slip: SideslipState,
                                cfg: OracleConfig = OracleConfig()) -> List[float]:
    """Hitch angles where the sampled classification changes, bisected."""
    ks = kappa_samples(*p.curvature_limits(slip), cfg)
    grid = _psi_grid(cfg)
    mask = _jackknife_mask(grid, ks, p, slip)
    flips = []
    n = grid.size
    for i in np.nonzero(mask != np.roll(mask, -1))[0]:
        a = grid[i]
        b = grid[(i + 1) % n] + (2.0 * math.pi if i == n - 1 else 0.0)
        flips.append(_bisect(a, b, bool(mask[i]), p, slip, ks, cfg))
    return sorted(flips)


def _tangent_critical_angles(p, slip, cfg: OracleConfig, grid: np.ndarray) -> List[float]:
    """Zeros of the hitch rate at a curvature limit that touch without crossing."""
    found = []
    for kappa in p.curvature_limits(slip):
        if not math.isfinite(kappa):
            continue
        g = np.abs(hitch_rate(kappa, grid, -1.0, p, slip))
        signed = hitch_rate(kappa, grid, -1.0, p, slip)
        n = grid.size
        for i in range(n):
            left, right = g[i - 1], g[(i + 1) % n]
            if not (g[i] <= left and g[i] <= right):
                continue
            if np.sign(signed[i - 1]) != np.sign(signed[(i + 1) % n]):
                continue  # ordinary crossing, already a classification flip
            res = minimize_scalar(
                lambda s: abs(hitch_rate(kappa, s, -1.0, p, slip)),
                bounds=(grid[i] - cfg.psi_resolution, grid[i] + cfg.psi_resolution),
                method="bounded", options={"xatol": cfg.bisection_tol})
            if res.fun <= 1e-9:
                found.append(wrap_angle(res.x))
    return found


def oracle_region_boundaries(p: VehicleTrailerParams, slip: SideslipState,
                             cfg: OracleConfig = OracleConfig(),
                             include_tangencies: bool = True) -> List[float]:
    flips = oracle_classification_flips(p, slip, cfg)
    if include_tangencies:
        grid = _psi_grid(cfg)
        for t in _tangent_critical_angles(p, slip, cfg, grid):
            if all(abs(wrap_angle(t - f)) > 10 * cfg.bisection_tol for f in flips):
                flips.append(t)
    return sorted(flips)


def oracle_safety(limit_angle: float, v_sign: float, p: VehicleTrailerParams,
                  slip: SideslipState, cfg: OracleConfig = OracleConfig(),
                  offset: float = 1e-3) -> Safety:
    """Safe when hitch motion inside the adjacent jackknife region points back at the limit."""
    ks = kappa_samples(*p.curvature_limits(slip), cfg)
    probes = np.array([limit_angle - offset, limit_angle + offset])
    jk = _jackknife_mask(probes, ks, p, slip)
    if jk[0] == jk[1]:
        raise ValueError("limit is not between a jackknife and a non-jackknife region")
    side = 0 if jk[0] else 1
    rates = hitch_rate(ks, probes[side], float(np.sign(v_sign)), p, slip)
    signs = np.unique(np.sign(rates))
    if signs.size != 1:
        raise InconclusiveError(f"sampled hitch rates disagree near {limit_angle!r}")
    if signs[0] == 0:
        return Safety.UNSAFE
    # jackknife region below the limit -> safe if psi increases, and vice versa
    toward = signs[0] > 0 if side == 0 else signs[0] < 0
    return Safety.SAFE if toward else Safety.UNSAFE


@dataclass
class CrossCheck:
    analytic: List[float]
    oracle: List[float]
    max_error: float
    matched: bool
    safety_mismatches: int = 0
    subcase: Optional[str] = None
    region_mismatches: int = 0

    @property
    def ok(self) -> bool:
        return self.matched and self.safety_mismatches == 0 and self.region_mismatches == 0


def match_boundaries(analytic: List[float], oracle: List[float], tol: float):
    """Pair angles one-to-one on the circle; returns (matched, max_error)."""
    if len(analytic) != len(oracle):
        return False, math.inf
    remaining = list(oracle)
    worst = 0.0
    for a in analytic:
        if not remaining:
            return False, math.inf
        errs = [abs(wrap_angle(a - b)) for b in remaining]
        j = int(np.argmin(errs))
        worst = max(worst, errs[j])
        remaining.pop(j)
    return worst <= tol, worst


def cross_check(p: VehicleTrailerParams, slip: SideslipState,
                cfg: OracleConfig = OracleConfig(), tol: float = 1e-5) -> CrossCheck:
    """Compare closed-form boundaries, region labels and safety labels with the oracle."""
    from .analysis import classify_limit_safety, jackknife_limits, region_map

    rmap = region_map(p, slip, jackknife_limits(p, slip))
    analytic = rmap.boundaries()
    flips = oracle_region_boundaries(p, slip, cfg)
    matched, worst = match_boundaries(analytic, flips, tol)
    ks = kappa_samples(*p.curvature_limits(slip), cfg)
    arcs = [(a, False) for a in rmap.nonjackknife] + [(a, True) for a in rmap.jackknife]
    mids = np.array([a.midpoint() for a, _ in arcs])
    region_bad = 0
    if mids.size:
        sampled = _jackknife_mask(mids, ks, p, slip)
        region_bad = sum(bool(got) != want for got, (_, want) in zip(sampled, arcs))
    mismatches = 0
    for lim in rmap.limits.existing:
        for v_sign in (-1.0, 1.0):
            try:
                expected = oracle_safety(lim.psi, v_sign, p, slip, cfg)
            except ValueError:
                continue  # not adjacent to a jackknife region
            if classify_limit_safety(lim, v_sign, p, slip, rmap) is not expected:
                mismatches += 1
    return CrossCheck(analytic, flips, worst, matched, mismatches, rmap.subcase, region_bad)


def random_configuration(rng: np.random.Generator, category: Optional[str] = None,
                         margin: float = 1e-3, edge: float = 0.05):
    """Random geometry, slip and curvature limits away from degenerate boundaries.

    ``category`` is one of ``"Short"``, ``"Medium"``, ``"Long"`` or ``None``
    (drawn uniformly). Slip angles stay ``edge`` away from +-pi/2.
    """
    from .analysis import (classify_trailer, critical_curvature_extrema,
                           jackknife_limits, uncontrollable_hitch_angles)

    target = category or rng.choice(["Short", "Medium", "Long"])
    bmax = 0.5 * math.pi - edge
    while True:
        L1 = rng.uniform(0.3, 2.5) * rng.choice([-1.0, 1.0])
        beta_R = rng.uniform(-bmax, bmax)
        beta_T = rng.uniform(-bmax, bmax)
        short_bound = abs(L1 * math.cos(beta_R) / math.cos(beta_T))
        medium_bound = abs(L1 / math.cos(beta_T))
        if target == "Short":
            L2 = short_bound * rng.uniform(0.1, 1.0 - margin)
        elif target == "Medium":
            if medium_bound - short_bound < 0.05 * medium_bound:
                continue
            L2 = short_bound + (medium_bound - short_bound) * rng.uniform(margin, 1.0 - margin)
        else:
            L2 = medium_bound * rng.uniform(1.0 + margin, 3.0)
        if L2 < 0.05 or L2 > 20.0:
            continue
        draw = rng.uniform()
        if draw < 0.1 and target != "Long":
            kmin, kmax = -math.inf, math.inf
        elif draw < 0.2:
            kmax = rng.uniform(0.05, 3.0)
            kmin = kmax - rng.uniform(0.05, 3.0)
        else:
            kmin, kmax = -rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0)
        if rng.uniform() < 0.5:
            kmin, kmax = -kmax, -kmin
        p = VehicleTrailerParams(wheelbase=3.0, hitch_length=L1, tongue_length=L2,
                                 kappa_min=kmin, kappa_max=kmax)
        slip = SideslipState(0.0, beta_R, beta_T)
        if classify_trailer(p, slip).value != target:
            continue
        if target != "Short":
            ext = critical_curvature_extrema(p, slip)
            refs = [ext.kappa_star_max, ext.kappa_star_min]
            if any(math.isfinite(k) and math.isfinite(r) and abs(k - r) <= margin * max(1.0, abs(r))
                   for k in (kmin, kmax) for r in refs):
                continue
        angles = [lim.psi for lim in jackknife_limits(p, slip).existing]
        poles = uncontrollable_hitch_angles(p, slip) or ()
        if math.isfinite(kmin) and math.isfinite(kmax):
            angles += list(poles)
        if any(abs(wrap_angle(a - b)) < 0.02 for i, a in enumerate(angles) for b in angles[i + 1:]):
            continue
        return p, slip
