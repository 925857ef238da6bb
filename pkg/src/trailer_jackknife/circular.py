"""Closed arcs on the hitch-angle circle (-pi, pi]."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

from .kinematics import wrap_angle

TWO_PI = 2.0 * math.pi


def angular_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class Arc:
    """Counter-clockwise arc from ``lo`` to ``hi``.

    ``lo > hi`` means the arc passes through +-pi. ``full`` marks the whole
    circle, in which case ``lo``/``hi`` carry no boundary.
    """

    lo: float
    hi: float
    full: bool = False

    @classmethod
    def whole(cls) -> "Arc":
        return cls(-math.pi, math.pi, full=True)

    @property
    def wraps(self) -> bool:
        return not self.full and self.lo > self.hi

    @property
    def length(self) -> float:
        if self.full:
            return TWO_PI
        return (self.hi - self.lo) % TWO_PI

    def contains(self, psi: float, tol: float = 0.0) -> bool:
        if self.full:
            return True
        offset = (wrap_angle(psi) - self.lo) % TWO_PI
        if offset > TWO_PI - tol:
            return True
        return offset <= self.length + tol

    def midpoint(self) -> float:
        if self.full:
            return 0.0
        return wrap_angle(self.lo + 0.5 * self.length)

    def boundaries(self) -> List[float]:
        return [] if self.full else [self.lo, self.hi]


def complement(arcs: Sequence[Arc]) -> List[Arc]:
    """Gaps between non-overlapping arcs, as arcs with the same endpoints."""
    if any(a.full for a in arcs):
        return []
    if not arcs:
        return [Arc.whole()]
    ordered = sorted(arcs, key=lambda a: a.lo)
    gaps = []
    for i, arc in enumerate(ordered):
        nxt = ordered[(i + 1) % len(ordered)]
        if angular_distance(arc.hi, nxt.lo) > 0.0:
            gaps.append(Arc(arc.hi, nxt.lo))
    return gaps
