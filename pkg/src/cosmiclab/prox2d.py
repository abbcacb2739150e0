"""Prox operator of ``f(x, y) = max(Phi(x), Psi(y))`` and the alternating design.

``Phi`` and ``Psi`` integrate step functions whose breakpoints ``xi_n`` and
``zeta_n`` grow like ``n**n``.  Iterating the prox keeps the iterates on the
level-matching curve ``{Phi(x) == Psi(y)}``; because the ratio
``xi_n / zeta_n`` alternates between roughly 2 and 1, the normalized iterates
never settle on one direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .piecewise import (
    PiecewiseLinearConvexFn,
    StepFunction,
    _prox_piece,
    antiderivative,
    invert,
    prox_1d,
)

__all__ = [
    "PaperParams",
    "MaxSeparable2D",
    "xi",
    "zeta",
    "build_paper_operator",
    "level",
    "prox_max",
    "gamma_point",
    "analytic_direction",
    "GammaAudit",
    "paper_handle",
]

MAX_DEPTH = 100
BISECTION_MAX_ITER = 50


def _check_depth(n):
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"depth must be a nonnegative integer, got {n!r}")
    if n > MAX_DEPTH:
        raise ValueError(f"depth {n} exceeds {MAX_DEPTH} (n**n overflows double precision)")


def xi(n: int) -> float:
    """``sum_{i=1..n} i**i``, computed exactly then rounded once."""
    _check_depth(n)
    return float(sum(i**i for i in range(1, n + 1)))


def zeta(n: int) -> float:
    """Like :func:`xi` with even terms halved."""
    _check_depth(n)
    twice = sum((2 if i % 2 else 1) * i**i for i in range(1, n + 1))
    return twice / 2


@dataclass(frozen=True)
class PaperParams:
    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, (int, np.integer)) or not 2 <= self.n_max <= MAX_DEPTH:
            raise ValueError(f"n_max must be an integer in [2, {MAX_DEPTH}], got {self.n_max!r}")


@dataclass(frozen=True)
class MaxSeparable2D:
    phi_fn: PiecewiseLinearConvexFn
    psi_fn: PiecewiseLinearConvexFn
    n_max: int | None = None

    def __post_init__(self):
        for name, fn in (("phi_fn", self.phi_fn), ("psi_fn", self.psi_fn)):
            if fn(0.0) != 0.0:
                raise ValueError(f"{name} must vanish at 0")

    def level(self, point):
        return level(self, point)

    def levels(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.maximum(self.phi_fn(xs[:, 0]), self.psi_fn(xs[:, 1]))

    def gap(self, xs: np.ndarray) -> np.ndarray:
        """``Phi(x) - Psi(y)`` row-wise; zero on the level-matching curve."""
        xs = np.asarray(xs, dtype=float)
        return self.phi_fn(xs[:, 0]) - self.psi_fn(xs[:, 1])

    def prox(self, point, tol: float = 1e-12) -> np.ndarray:
        return np.array(prox_max(self, point, tol))

    def translation(self, point, gamma_rtol: float = 1e-12):
        """Constant step and step count valid from ``point``, or ``None``.

        When ``point`` lies on the level-matching curve strictly inside a pair
        of segments with slopes ``a`` and ``b``, the prox step is the
        translation ``(-t*a, -(1-t)*b)`` with ``t = b**2 / (a**2 + b**2)``.
        It stays exact while the iterates remain inside those segments.
        """
        x, y = float(point[0]), float(point[1])
        fx, fy = self.phi_fn(x), self.psi_fn(y)
        if abs(fx - fy) > gamma_rtol * (1.0 + abs(fx)):
            return None
        i, j = self.phi_fn.segment(x), self.psi_fn.segment(y)
        kx, ky = self.phi_fn.knots, self.psi_fn.knots
        if (i > 0 and kx[i - 1] == x) or (j > 0 and ky[j - 1] == y):
            return None
        a, b = self.phi_fn.slopes[i], self.psi_fn.slopes[j]
        theta = b * b / (a * a + b * b)
        d = np.array([-theta * a, -(1.0 - theta) * b])
        room = min(
            (kx[i] - x) / d[0] if i < len(kx) else math.inf,
            (ky[j] - y) / d[1] if j < len(ky) else math.inf,
        )
        # keep one step of margin so segment exits go through the general path
        m = math.floor(room) - 1 if math.isfinite(room) else 1 << 62
        if m < 1:
            return None
        return d, m

    def advance(self, point, max_steps: int, tol: float = 1e-12) -> np.ndarray:
        """Up to ``max_steps`` successive prox iterates of ``point`` as rows."""
        p = np.asarray(point, dtype=float)
        fast = self.translation(p)
        if fast is None:
            return self.prox(p, tol)[None, :]
        d, m = fast
        j = np.arange(1, min(m, max_steps) + 1, dtype=float)[:, None]
        return p + j * d

    def to_dict(self) -> dict:
        out = {"phi": self.phi_fn.to_dict(), "psi": self.psi_fn.to_dict()}
        if self.n_max is not None:
            out["n_max"] = self.n_max
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MaxSeparable2D":
        return cls(
            PiecewiseLinearConvexFn.from_dict(data["phi"]),
            PiecewiseLinearConvexFn.from_dict(data["psi"]),
            data.get("n_max"),
        )


def build_paper_operator(p: PaperParams | int) -> MaxSeparable2D:
    if not isinstance(p, PaperParams):
        p = PaperParams(p)
    n_max = p.n_max
    # breakpoints 0 = xi_0 < ... < xi_{n_max}; the last value continues past xi_{n_max}
    phi_values = [-1.0] + [-1.0 / n**n for n in range(1, n_max + 1)]
    psi_values = [-1.0] + [-(3 + (-1) ** n) / 2 / n**n for n in range(1, n_max + 1)]
    phi = StepFunction(tuple(xi(n) for n in range(n_max + 1)), tuple(phi_values + phi_values[-1:]))
    psi = StepFunction(tuple(zeta(n) for n in range(n_max + 1)), tuple(psi_values + psi_values[-1:]))
    return MaxSeparable2D(antiderivative(phi), antiderivative(psi), n_max)


def level(op: MaxSeparable2D, point) -> float:
    return max(op.phi_fn(float(point[0])), op.psi_fn(float(point[1])))


def prox_max(op: MaxSeparable2D, point, tol: float = 1e-12) -> tuple:
    """Unique minimizer of ``f(x, y) + |(x, y) - point|**2 / 2``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    xp, yp = float(point[0]), float(point[1])
    Phi, Psi = op.phi_fn, op.psi_fn

    xa = prox_1d(Phi, 1.0, xp)
    if Phi(xa) > Psi(yp):
        return xa, yp
    yb = prox_1d(Psi, 1.0, yp)
    if Psi(yb) > Phi(xp):
        return xp, yb

    # Both terms active: f = max over theta of theta*Phi + (1-theta)*Psi.
    # g(theta) = Phi(x(theta)) - Psi(y(theta)) is nonincreasing with g(0) >= 0 >= g(1).
    def state(theta):
        x, px = _prox_piece(Phi, theta, xp)
        y, py = _prox_piece(Psi, 1.0 - theta, yp)
        return x, y, Phi(x) - Psi(y), (px, py)

    lo, hi = 0.0, 1.0
    xl, yl, gl, pl = state(lo)
    xh, yh, gh, ph = state(hi)
    for _ in range(BISECTION_MAX_ITER):
        if gl == 0.0:
            return xl, yl
        if gh == 0.0:
            return xh, yh
        if pl == ph:
            # same pieces at both ends: g is affine in between, solve exactly
            theta = min(max(lo + gl * (hi - lo) / (gl - gh), lo), hi)
            x, y, _, _ = state(theta)
            return x, y
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        xm, ym, gm, pm = state(mid)
        if gm > 0.0:
            lo, xl, yl, gl, pl = mid, xm, ym, gm, pm
        else:
            hi, xh, yh, gh, ph = mid, xm, ym, gm, pm
    x, y, _, _ = state(0.5 * (lo + hi))
    return x, y


def gamma_point(op: MaxSeparable2D, t: float) -> tuple:
    """Point of the level-matching curve at level ``t``."""
    if t > 0:
        raise ValueError("levels on the curve are nonpositive")
    return invert(op.phi_fn, t), invert(op.psi_fn, t)


def analytic_direction(n: int) -> tuple:
    if n < 1:
        raise ValueError("n must be at least 1")
    a, b = xi(n), zeta(n)
    r = math.hypot(a, b)
    return a / r, b / r


class GammaAudit:
    """Trajectory observer for the 2-D operator.

    Tracks the worst curve residual ``|Phi - Psi| / (1 + |Phi|)``, the
    largest step, whether the level ever increases, and the closest approach
    to each requested target point.
    """

    def __init__(self, op: MaxSeparable2D, targets=()):
        self.op = op
        self.targets = np.asarray(targets, dtype=float).reshape(-1, 2)
        self.max_gamma = 0.0
        self.max_step = 0.0
        self.max_level_rise = -math.inf
        self.min_target_dist = np.full(len(self.targets), math.inf)
        self.count = 0

    def __call__(self, k0, prev, xs):
        op = self.op
        phi = op.phi_fn(xs[:, 0])
        resid = np.abs(phi - op.psi_fn(xs[:, 1])) / (1.0 + np.abs(phi))
        self.max_gamma = max(self.max_gamma, float(resid.max()))
        path = np.vstack([prev[None, :], xs])
        steps = np.hypot(*np.diff(path, axis=0).T)
        self.max_step = max(self.max_step, float(steps.max()))
        lv = np.maximum(phi, op.psi_fn(xs[:, 1]))
        lv_prev = np.concatenate([[op.level(prev)], lv[:-1]])
        self.max_level_rise = max(self.max_level_rise, float((lv - lv_prev).max()))
        for t, target in enumerate(self.targets):
            dist = float(np.hypot(*(xs - target).T).min())
            self.min_target_dist[t] = min(self.min_target_dist[t], dist)
        self.count += len(xs)

    def summary(self) -> dict:
        return {
            "iterates": self.count,
            "max_gamma_residual": self.max_gamma,
            "max_step": self.max_step,
            "max_level_rise": self.max_level_rise,
            "min_target_distance": [float(d) for d in self.min_target_dist],
        }


def paper_handle(op: MaxSeparable2D, tol: float = 1e-12, guard: bool = True):
    """Wrap the operator for :func:`cosmiclab.engine.iterate`.

    With ``guard`` set, iteration stops once the level reaches
    ``-n_max + 1``; the truncated tail is not trusted below that.
    """
    from .engine import OperatorHandle

    stop = None
    if guard and op.n_max is not None:
        floor = -op.n_max + 1

        def stop(xs):
            return op.levels(xs) <= floor

    return OperatorHandle(
        dimension=2,
        apply=lambda x: op.prox(x, tol),
        label=f"paper2d(n_max={op.n_max})",
        level=op.levels,
        advance=lambda x, m: op.advance(x, m, tol),
        stop=stop,
    )
