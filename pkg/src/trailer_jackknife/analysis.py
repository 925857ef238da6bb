"""Closed-form jackknife limits, regions and limit safety under sideslip."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .circular import Arc, angular_distance, complement
from .errors import DomainError
from .kinematics import (
    SideslipState,
    VehicleTrailerParams,
    alpha_radius,
    curvature_coefficient,
    hitch_rate,
    is_pole,
    wrap_angle,
)

# arccos operands within this distance of +-1 are clamped; beyond it the
# angle does not exist.
ACOS_CLAMP = 1e-12
# angular tolerance for "equals an uncontrollable angle" / "alpha_1 in (0, pi)"
ANGLE_ATOL = 1e-9


class TrailerCategory(enum.Enum):
    SHORT = "Short"
    MEDIUM = "Medium"
    LONG = "Long"


class LimitKind(enum.Enum):
    PLUS_KMAX = "psi_plus_kmax"
    MINUS_KMAX = "psi_minus_kmax"
    PLUS_KMIN = "psi_plus_kmin"
    MINUS_KMIN = "psi_minus_kmin"

    @property
    def uses_kmax(self) -> bool:
        return self in (LimitKind.PLUS_KMAX, LimitKind.MINUS_KMAX)

    @property
    def plus(self) -> bool:
        return self in (LimitKind.PLUS_KMAX, LimitKind.PLUS_KMIN)


LIMIT_KINDS = (LimitKind.PLUS_KMAX, LimitKind.MINUS_KMAX, LimitKind.PLUS_KMIN, LimitKind.MINUS_KMIN)


class Safety(enum.Enum):
    SAFE = "Safe"
    UNSAFE = "Unsafe"
    ATYPICAL = "Atypical"


def _safe_arccos(x: float) -> Optional[float]:
    if abs(x) > 1.0 + ACOS_CLAMP:
        return None
    return math.acos(min(1.0, max(-1.0, x)))


def classify_trailer(p: VehicleTrailerParams, slip: SideslipState) -> TrailerCategory:
    if abs(slip.beta_T) >= 0.5 * math.pi:
        raise DomainError("cos(beta_T) must be nonzero")
    L1, L2 = p.hitch_length, p.tongue_length
    short_bound = abs(L1 * math.cos(slip.beta_R) / math.cos(slip.beta_T))
    medium_bound = abs(L1 / math.cos(slip.beta_T))
    if L2 <= short_bound:
        return TrailerCategory.SHORT
    if L2 <= medium_bound:
        return TrailerCategory.MEDIUM
    return TrailerCategory.LONG


def uncontrollable_hitch_angles(p: VehicleTrailerParams,
                                slip: SideslipState) -> Optional[Tuple[float, float]]:
    """Hitch angles ``(psi_plus_inf, psi_minus_inf)`` where curvature has no effect, if any."""
    if p.hitch_length == 0.0:
        return None
    a = _safe_arccos(-p.tongue_length * math.cos(slip.beta_T) / p.hitch_length)
    if a is None:
        return None
    return wrap_angle(a - slip.beta_T), wrap_angle(-a - slip.beta_T)


def critical_curvature(psi: float, p: VehicleTrailerParams, slip: SideslipState) -> Optional[float]:
    """Curvature that holds the hitch angle constant; ``None`` at the uncontrollable angles."""
    den = float(curvature_coefficient(psi, p, slip))
    if is_pole(den, p):
        return None
    return -math.sin(psi - slip.beta_R + slip.beta_T) / den


def critical_curvature_derivative(psi: float, p: VehicleTrailerParams,
                                  slip: SideslipState) -> Optional[float]:
    den = float(curvature_coefficient(psi, p, slip))
    if is_pole(den, p):
        return None
    num = (p.tongue_length * math.cos(psi - slip.beta_R + slip.beta_T) * math.cos(slip.beta_T)
           + p.hitch_length * math.cos(slip.beta_R))
    return -num / (den * den)


@dataclass(frozen=True)
class CriticalCurvatureExtrema:
    psi_at_max: float
    psi_at_min: float
    kappa_star_max: float
    kappa_star_min: float


def critical_curvature_extrema(p: VehicleTrailerParams,
                               slip: SideslipState) -> CriticalCurvatureExtrema:
    """Local maximum and minimum of the critical curvature (Medium and Long trailers)."""
    category = classify_trailer(p, slip)
    if category is TrailerCategory.SHORT:
        raise DomainError("critical curvature has no finite extrema for a Short trailer")
    L1, L2 = p.hitch_length, p.tongue_length
    sR, cR = math.sin(slip.beta_R), math.cos(slip.beta_R)
    cT = math.cos(slip.beta_T)
    acos_arg = -L1 * cR / (L2 * cT)
    a = math.acos(min(1.0, max(-1.0, acos_arg)))
    psi_max = wrap_angle(-a + slip.beta_R - slip.beta_T)
    psi_min = wrap_angle(a + slip.beta_R - slip.beta_T)

    den = L1 * L1 - (L2 * cT) ** 2
    if abs(den) <= 1e-12 * (L1 * L1 + L2 * L2):
        # Medium/Long boundary: left-hand limits of the closed forms.
        if sR == 0.0:
            raise DomainError("degenerate extrema: boundary case needs nonzero rear slip")
        finite = 1.0 / (2.0 * L1 * sR)
        if L1 > 0:
            return CriticalCurvatureExtrema(psi_max, psi_min, finite, math.inf)
        return CriticalCurvatureExtrema(psi_max, psi_min, -math.inf, finite)
    root = math.sqrt(max(0.0, (L2 * cT) ** 2 - (L1 * cR) ** 2))
    return CriticalCurvatureExtrema(
        psi_max, psi_min, (L1 * sR - root) / den, (L1 * sR + root) / den)


def alpha_1(kappa: float, p: VehicleTrailerParams, slip: SideslipState) -> Optional[float]:
    """Half-width angle of the critical-hitch-angle pair; ``None`` when it does not exist."""
    L1, L2cT = p.hitch_length, p.tongue_length * math.cos(slip.beta_T)
    if math.isinf(kappa):
        if L1 == 0.0:
            return None
        return _safe_arccos(-math.copysign(1.0, kappa) * L2cT / abs(L1))
    return _safe_arccos(-L2cT * kappa / float(alpha_radius(kappa, p, slip)))


def alpha_2(kappa: float, p: VehicleTrailerParams, slip: SideslipState) -> float:
    L1 = p.hitch_length
    if math.isinf(kappa):
        if L1 == 0.0:
            return math.atan2(math.cos(slip.beta_R), -math.sin(slip.beta_R))
        return 0.0 if kappa * L1 > 0 else math.pi
    return math.atan2(math.cos(slip.beta_R), L1 * kappa - math.sin(slip.beta_R))


def critical_hitch_angles(kappa: float, p: VehicleTrailerParams,
                          slip: SideslipState) -> Optional[Tuple[float, float]]:
    """Wrapped ``(psi_plus, psi_minus)`` whose critical curvature equals ``kappa``."""
    a1 = alpha_1(kappa, p, slip)
    if a1 is None:
        return None
    a2 = alpha_2(kappa, p, slip)
    return wrap_angle(a1 + a2 - slip.beta_T), wrap_angle(-a1 + a2 - slip.beta_T)


@dataclass(frozen=True)
class JackknifeLimit:
    kind: LimitKind
    generating_kappa: float
    psi: Optional[float] = None
    typical: bool = False
    safety: Optional[Safety] = None

    @property
    def exists(self) -> bool:
        return self.psi is not None


@dataclass(frozen=True)
class JackknifeLimitSet:
    limits: Tuple[JackknifeLimit, ...]
    kappa_min: float
    kappa_max: float

    def __getitem__(self, kind: LimitKind) -> JackknifeLimit:
        for lim in self.limits:
            if lim.kind is kind:
                return lim
        raise KeyError(kind)

    def __iter__(self) -> Iterator[JackknifeLimit]:
        return iter(self.limits)

    @property
    def existing(self) -> List[JackknifeLimit]:
        return [lim for lim in self.limits if lim.exists]

    def angles(self) -> Dict[LimitKind, Optional[float]]:
        return {lim.kind: lim.psi for lim in self.limits}


def _is_typical(psi: float, a1: float, poles) -> bool:
    if poles is not None and min(angular_distance(psi, q) for q in poles) <= ANGLE_ATOL:
        return False
    return ANGLE_ATOL < a1 < math.pi - ANGLE_ATOL


def jackknife_limits(p: VehicleTrailerParams, slip: SideslipState,
                     v_sign: Optional[float] = None) -> JackknifeLimitSet:
    """The four critical hitch angles of the curvature limits.

    With ``v_sign`` given, each existing limit also carries its safety label.
    """
    if abs(slip.beta_T) >= 0.5 * math.pi or abs(slip.beta_R) >= 0.5 * math.pi:
        raise DomainError("cos(beta_R) and cos(beta_T) must be nonzero")
    kmin, kmax = p.curvature_limits(slip)
    poles = uncontrollable_hitch_angles(p, slip)
    limits = []
    for kind in LIMIT_KINDS:
        kappa = kmax if kind.uses_kmax else kmin
        a1 = alpha_1(kappa, p, slip)
        if a1 is None:
            limits.append(JackknifeLimit(kind, kappa))
            continue
        a2 = alpha_2(kappa, p, slip)
        psi = wrap_angle((a1 if kind.plus else -a1) + a2 - slip.beta_T)
        limits.append(JackknifeLimit(kind, kappa, psi, _is_typical(psi, a1, poles)))
    result = JackknifeLimitSet(tuple(limits), kmin, kmax)
    if v_sign is None:
        return result
    rmap = region_map(p, slip, limits=result)
    labelled = tuple(
        lim if not lim.exists else
        JackknifeLimit(lim.kind, lim.generating_kappa, lim.psi, lim.typical,
                       classify_limit_safety(lim, v_sign, p, slip, rmap))
        for lim in result.limits)
    return JackknifeLimitSet(labelled, kmin, kmax)


def is_jackknife_state(psi: float, p: VehicleTrailerParams, slip: SideslipState) -> bool:
    kstar = critical_curvature(psi, p, slip)
    if kstar is None:
        return True
    kmin, kmax = p.curvature_limits(slip)
    return not (kmin <= kstar <= kmax)


@dataclass(frozen=True)
class RegionMap:
    category: TrailerCategory
    subcase: str
    nonjackknife: Tuple[Arc, ...]
    jackknife: Tuple[Arc, ...]
    limits: JackknifeLimitSet
    extrema: Optional[CriticalCurvatureExtrema] = None

    def is_jackknife(self, psi: float) -> bool:
        """Region lookup; boundary points count as non-jackknife."""
        return not any(arc.contains(psi, tol=1e-12) for arc in self.nonjackknife)

    def boundaries(self) -> List[float]:
        out: List[float] = []
        for arc in self.nonjackknife:
            for b in arc.boundaries():
                if all(angular_distance(b, q) > ANGLE_ATOL for q in out):
                    out.append(b)
        return sorted(out)


# Non-jackknife arcs per subcase for a rear hitch, as (lo, hi) limit pairs.
# A front hitch (L1 < 0) swaps lo and hi of every arc.
_PM = {"+max": LimitKind.PLUS_KMAX, "-max": LimitKind.MINUS_KMAX,
       "+min": LimitKind.PLUS_KMIN, "-min": LimitKind.MINUS_KMIN}
_SUBCASE_ARCS = {
    "S-1": [("-max", "-min"), ("+max", "+min")],
    "M-1": [("-min", "-max"), ("+max", "+min")],
    "M-2": [("+max", "-max")],
    "M-3": [("+max", "-max"), ("+min", "-min")],
    "M-4": [],
    "M-5": [("+min", "-min")],
    "M-6": [("-max", "-min"), ("+min", "+max")],
    "L-2": [("+min", "-min")],
    "L-3": [("-max", "+max")],
    "L-4": [("-max", "-min"), ("+min", "+max")],
    "L-5": [],
}


def _medium_subcase(kmin: float, kmax: float, ext: CriticalCurvatureExtrema) -> str:
    lo, hi = ext.kappa_star_max, ext.kappa_star_min

    def band(k):
        if k >= hi:
            return "hi"
        if k <= lo:
            return "lo"
        return "mid"

    return {
        ("hi", "hi"): "M-1", ("hi", "mid"): "M-2", ("hi", "lo"): "M-3",
        ("mid", "mid"): "M-4", ("mid", "lo"): "M-5", ("lo", "lo"): "M-6",
    }[(band(kmax), band(kmin))]


def _long_subcase(kmin: float, kmax: float, ext: CriticalCurvatureExtrema) -> str:
    top, bottom = ext.kappa_star_max, ext.kappa_star_min
    if kmax < bottom or kmin > top:
        return "L-5"
    if kmax > top and kmin < bottom:
        return "L-1"
    if kmax > top:
        return "L-2"
    if kmin < bottom:
        return "L-3"
    return "L-4"


def region_map(p: VehicleTrailerParams, slip: SideslipState,
               limits: Optional[JackknifeLimitSet] = None) -> RegionMap:
    """Resolve the subcase and assemble the non-jackknife and jackknife arcs."""
    if limits is None:
        limits = jackknife_limits(p, slip)
    category = classify_trailer(p, slip)
    kmin, kmax = limits.kappa_min, limits.kappa_max
    if category is TrailerCategory.MEDIUM and slip.beta_R < 0:
        return _mirrored_medium_map(p, slip, limits)
    extrema = None
    front_hitch = p.hitch_length < 0
    if category is TrailerCategory.SHORT:
        subcase = "S-2" if front_hitch else "S-1"
        key = "S-1"
    else:
        extrema = critical_curvature_extrema(p, slip)
        if category is TrailerCategory.MEDIUM:
            key = _medium_subcase(kmin, kmax, extrema)
            subcase = key + ("'" if front_hitch else "")
        else:
            key = subcase = _long_subcase(kmin, kmax, extrema)

    if key == "L-1":
        arcs: List[Arc] = [Arc.whole()]
    else:
        arcs = []
        for a, b in _SUBCASE_ARCS[key]:
            lo, hi = limits[_PM[a]], limits[_PM[b]]
            if not (lo.exists and hi.exists):
                raise DomainError(
                    f"subcase {subcase} needs limits {lo.kind.value}, {hi.kind.value}; "
                    "configuration sits on a subcase boundary")
            if front_hitch and category is not TrailerCategory.LONG:
                lo, hi = hi, lo
            arcs.append(Arc(lo.psi, hi.psi))
    return RegionMap(category, subcase, tuple(arcs), tuple(complement(arcs)), limits, extrema)


def _mirrored_medium_map(p: VehicleTrailerParams, slip: SideslipState,
                         limits: JackknifeLimitSet) -> RegionMap:
    # The Medium subcase tables presume positive rear slip. Negating the hitch
    # angle, both slips and the curvature range maps any configuration onto
    # one with positive rear slip; solve there and map the arcs back.
    mp = replace(p, kappa_min=-limits.kappa_max, kappa_max=-limits.kappa_min)
    mslip = SideslipState(-slip.beta_F, -slip.beta_R, -slip.beta_T)
    mirrored = region_map(mp, mslip)
    angles = [lim.psi for lim in limits.existing]

    def snap(a: float) -> float:
        best = min(angles, key=lambda b: angular_distance(a, b))
        if angular_distance(a, best) > 1e-7:
            raise DomainError("mirrored region boundary does not match a jackknife limit")
        return best

    arcs = [Arc(snap(-a.hi), snap(-a.lo)) for a in mirrored.nonjackknife]
    return RegionMap(TrailerCategory.MEDIUM, mirrored.subcase, tuple(arcs),
                     tuple(complement(arcs)), limits, critical_curvature_extrema(p, slip))


def _rate_sign(kappa: float, psi: float, v_sign: float, p: VehicleTrailerParams,
               slip: SideslipState) -> float:
    """Sign of the hitch rate, with the limit taken for unbounded curvature."""
    if math.isfinite(kappa):
        return float(np.sign(hitch_rate(kappa, psi, v_sign, p, slip)))
    coef = float(curvature_coefficient(psi, p, slip))
    if is_pole(coef, p):
        return float(np.sign(-v_sign * math.sin(psi - slip.beta_R + slip.beta_T)))
    return float(-np.sign(v_sign) * np.sign(kappa) * np.sign(coef))


def classify_limit_safety(limit: JackknifeLimit, v_sign: float, p: VehicleTrailerParams,
                          slip: SideslipState, regions: Optional[RegionMap] = None) -> Safety:
    if not limit.exists:
        raise DomainError(f"{limit.kind.value} does not exist")
    if v_sign == 0:
        raise DomainError("safety needs a nonzero velocity sign")
    backing = v_sign < 0
    if limit.typical:
        return Safety.SAFE if limit.kind.plus == backing else Safety.UNSAFE
    return general_limit_safety(limit, v_sign, p, slip, regions)


def general_limit_safety(limit: JackknifeLimit, v_sign: float, p: VehicleTrailerParams,
                         slip: SideslipState, regions: Optional[RegionMap] = None) -> Safety:
    """Safety from the sign of the hitch rate at the other curvature limit.

    Applies to every limit, typical or not; returns ``ATYPICAL`` when the
    adjacent jackknife region does not move the hitch angle at all or the
    limit does not bound exactly one side of a non-jackknife region.
    """
    if regions is None:
        regions = region_map(p, slip)
    psi = limit.psi
    positive_side = any(not a.full and angular_distance(a.lo, psi) <= ANGLE_ATOL
                        and a.length > ANGLE_ATOL for a in regions.nonjackknife)
    negative_side = any(not a.full and angular_distance(a.hi, psi) <= ANGLE_ATOL
                        and a.length > ANGLE_ATOL for a in regions.nonjackknife)
    if positive_side == negative_side:
        return Safety.ATYPICAL
    other = regions.limits.kappa_min if limit.kind.uses_kmax else regions.limits.kappa_max
    s = _rate_sign(other, psi, v_sign, p, slip)
    if s == 0:
        return Safety.ATYPICAL
    toward_region = s > 0 if positive_side else s < 0
    return Safety.SAFE if toward_region else Safety.UNSAFE
