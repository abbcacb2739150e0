"""Step functions and their piecewise-linear convex antiderivatives.

A :class:`StepFunction` is a nondecreasing piecewise-constant function with
values in ``[-1, 0)``.  Its antiderivative (normalized to vanish at 0) is a
strictly decreasing, convex, 1-Lipschitz :class:`PiecewiseLinearConvexFn`,
for which evaluation, inversion, subdifferentials and the scalar proximal
operator are all computed exactly by segment identification.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StepFunction",
    "PiecewiseLinearConvexFn",
    "antiderivative",
    "evaluate",
    "invert",
    "subgradient_interval",
    "prox_1d",
]

_CONSISTENCY_RTOL = 1e-12


def _check_range(values):
    for c in values:
        if not (-1.0 <= c < 0.0):
            raise ValueError(f"value {c!r} outside [-1, 0)")


def _check_ascending(points, what):
    for a, b in zip(points, points[1:]):
        if not a < b:
            raise ValueError(f"{what} must be strictly ascending, got {a!r} >= {b!r}")


def _check_nondecreasing(values, what):
    for a, b in zip(values, values[1:]):
        if b < a:
            raise ValueError(f"{what} must be nondecreasing, got {a!r} > {b!r}")


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function; ``values[j]`` applies on ``[b_j, b_{j+1})``.

    ``breakpoints`` are ``b_1 < ... < b_m`` and ``values`` are ``c_0 ... c_m``
    with ``b_0 = -inf`` and ``b_{m+1} = +inf``.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(c) for c in self.values)
        if not vals:
            raise ValueError("a step function needs at least one value")
        if len(vals) != len(bp) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if not all(math.isfinite(b) for b in bp):
            raise ValueError("breakpoints must be finite")
        _check_ascending(bp, "breakpoints")
        _check_range(vals)
        _check_nondecreasing(vals, "values")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, x: float) -> float:
        return self.values[bisect.bisect_right(self.breakpoints, x)]

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "StepFunction":
        return cls(tuple(data["breakpoints"]), tuple(data["values"]))


@dataclass(frozen=True)
class PiecewiseLinearConvexFn:
    """Continuous piecewise-linear function given by knots, values and slopes.

    ``slopes[0]`` applies left of ``knots[0]``, ``slopes[j]`` between
    ``knots[j-1]`` and ``knots[j]`` and ``slopes[-1]`` right of the last knot.
    """

    knots: tuple
    knot_values: tuple
    slopes: tuple

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        vals = tuple(float(v) for v in self.knot_values)
        slopes = tuple(float(s) for s in self.slopes)
        if not knots:
            raise ValueError("at least one knot is required")
        if len(vals) != len(knots) or len(slopes) != len(knots) + 1:
            raise ValueError("need len(knot_values) == len(knots) == len(slopes) - 1")
        if not all(math.isfinite(t) for t in knots + vals):
            raise ValueError("knots and knot values must be finite")
        _check_ascending(knots, "knots")
        _check_range(slopes)
        _check_nondecreasing(slopes, "slopes")
        for j in range(len(knots) - 1):
            rise = slopes[j + 1] * (knots[j + 1] - knots[j])
            gap = vals[j + 1] - vals[j] - rise
            scale = abs(vals[j]) + abs(vals[j + 1]) + abs(rise)
            if abs(gap) > _CONSISTENCY_RTOL * max(scale, 1e-300):
                raise ValueError(f"knot value {j + 1} inconsistent with slope")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "knot_values", vals)
        object.__setattr__(self, "slopes", slopes)

    def __call__(self, x):
        """Evaluate at a scalar or elementwise on an array."""
        if np.ndim(x) == 0:
            j = bisect.bisect_right(self.knots, x)
            if j == 0:
                return self.knot_values[0] + self.slopes[0] * (x - self.knots[0])
            return self.knot_values[j - 1] + self.slopes[j] * (x - self.knots[j - 1])
        x = np.asarray(x, dtype=float)
        knots = np.asarray(self.knots)
        j = np.searchsorted(knots, x, side="right")
        anchor = np.maximum(j - 1, 0)
        return np.asarray(self.knot_values)[anchor] + np.asarray(self.slopes)[j] * (x - knots[anchor])

    @property
    def range(self) -> tuple:
        """Represented range ``[F(last knot), F(first knot)]``."""
        return self.knot_values[-1], self.knot_values[0]

    def segment(self, x: float) -> int:
        """Index ``j`` of the slope in effect at ``x`` (right-continuous)."""
        return bisect.bisect_right(self.knots, x)

    def to_dict(self) -> dict:
        return {
            "knots": list(self.knots),
            "knot_values": list(self.knot_values),
            "slopes": list(self.slopes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseLinearConvexFn":
        return cls(tuple(data["knots"]), tuple(data["knot_values"]), tuple(data["slopes"]))


def antiderivative(s: StepFunction) -> PiecewiseLinearConvexFn:
    """Integral of ``s`` from 0, as an exact piecewise-linear function."""
    if not isinstance(s, StepFunction):
        s = StepFunction(*s)
    knots = list(s.breakpoints)
    slopes = list(s.values)
    if 0.0 not in knots:
        j = bisect.bisect_left(knots, 0.0)
        knots.insert(j, 0.0)
        slopes.insert(j, slopes[j])
    zero = knots.index(0.0)
    vals = [0.0] * len(knots)
    for j in range(zero + 1, len(knots)):
        vals[j] = vals[j - 1] + slopes[j] * (knots[j] - knots[j - 1])
    for j in range(zero - 1, -1, -1):
        vals[j] = vals[j + 1] - slopes[j + 1] * (knots[j + 1] - knots[j])
    return PiecewiseLinearConvexFn(tuple(knots), tuple(vals), tuple(slopes))


def evaluate(F: PiecewiseLinearConvexFn, x):
    return F(x)


def invert(F: PiecewiseLinearConvexFn, t: float) -> float:
    """Unique ``x`` with ``F(x) == t`` for ``t`` in the represented range."""
    lowest, highest = F.range
    if not (lowest <= t <= highest):
        raise ValueError(f"level {t!r} outside represented range [{lowest!r}, {highest!r}]")
    vals = F.knot_values
    # knot values strictly decrease; find first knot with value <= t
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if vals[mid] > t:
            lo = mid + 1
        else:
            hi = mid
    j = lo
    if vals[j] == t or j == 0:
        return F.knots[j]
    return F.knots[j] + (t - vals[j]) / F.slopes[j]


def subgradient_interval(F: PiecewiseLinearConvexFn, x: float) -> tuple:
    """Closed interval ``[left slope, right slope]`` forming the subdifferential."""
    j = bisect.bisect_left(F.knots, x)
    if j < len(F.knots) and F.knots[j] == x:
        return F.slopes[j], F.slopes[j + 1]
    s = F.slopes[j]
    return s, s


def _prox_piece(F: PiecewiseLinearConvexFn, lam: float, xp: float) -> tuple:
    """Scalar prox and the piece it lands on.

    Pieces are numbered in increasing order: open segment ``j`` is ``2*j`` and
    knot ``j`` is ``2*j + 1``.
    """
    knots, slopes = F.knots, F.slopes
    # z + lam*F'(z) is increasing; knot j is reached from the left at knots[j] + lam*slopes[j]
    lo, hi = 0, len(knots)
    while lo < hi:
        mid = (lo + hi) // 2
        if knots[mid] + lam * slopes[mid] <= xp:
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        return xp - lam * slopes[0], 0
    knot = lo - 1
    if xp <= knots[knot] + lam * slopes[knot + 1]:
        return knots[knot], 2 * knot + 1
    return xp - lam * slopes[lo], 2 * lo


def prox_1d(F: PiecewiseLinearConvexFn, lam: float, xprime: float) -> float:
    """Minimizer of ``lam * F(z) + (z - xprime)**2 / 2``."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return _prox_piece(F, lam, float(xprime))[0]
