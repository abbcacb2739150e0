"""Gradient descent on a weighted sum of ``phi(x) = 1 - x`` (x < 0), ``exp(-x)`` (x >= 0).

Each coordinate of the iteration grows like ``log k`` regardless of its step
size, so the normalized iterate spreads over ever more coordinates: every
fixed coordinate of ``x^k / |x^k|`` decays while the norm stays 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import OperatorHandle

__all__ = [
    "univariate_step",
    "univariate_trajectory",
    "log_bounds",
    "TruncatedGradientOperator",
    "bound_audit",
]


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"step size must lie in (0, 1], got {alpha!r}")


def univariate_step(x: float, alpha: float) -> float:
    _check_alpha(alpha)
    if x < 0:
        return x + alpha
    return x + alpha * math.exp(-x)


def univariate_trajectory(alpha: float, k_max: int, x0: float = 0.0) -> np.ndarray:
    """``x_0, ..., x_{k_max}`` of the scalar recursion."""
    _check_alpha(alpha)
    out = np.empty(k_max + 1)
    x = out[0] = float(x0)
    exp = math.exp
    for k in range(1, k_max + 1):
        x = x + alpha if x < 0 else x + alpha * exp(-x)
        out[k] = x
    return out


def log_bounds(k: int, alpha: float) -> tuple:
    """Lower and upper bound on ``x_k`` for the recursion started at 0."""
    _check_alpha(alpha)
    return math.log(k + 1) + math.log(alpha), math.log(k + 1) + math.log(2.0)


@dataclass(frozen=True)
class TruncatedGradientOperator:
    """First ``n_coords`` coordinates of the operator with step sizes ``1/i**2``."""

    n_coords: int = 512

    def __post_init__(self):
        if not isinstance(self.n_coords, (int, np.integer)) or self.n_coords < 1:
            raise ValueError("n_coords must be a positive integer")

    @property
    def step_sizes(self) -> np.ndarray:
        return 1.0 / np.arange(1, self.n_coords + 1, dtype=float) ** 2

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_coords,):
            raise ValueError(f"expected a vector of length {self.n_coords}, got shape {x.shape}")
        return self._step(x, self.step_sizes)

    @staticmethod
    def _step(x, alpha):
        return np.where(x < 0, x + alpha, x + alpha * np.exp(-np.maximum(x, 0.0)))

    def advance(self, x, max_steps: int, block: int = 512) -> np.ndarray:
        alpha = self.step_sizes
        rows = np.empty((min(max_steps, block), self.n_coords))
        cur = np.asarray(x, dtype=float)
        for r in range(len(rows)):
            cur = rows[r] = self._step(cur, alpha)
        return rows

    def handle(self) -> OperatorHandle:
        return OperatorHandle(
            dimension=self.n_coords,
            apply=self.apply,
            label=f"seqspace(N={self.n_coords})",
            advance=self.advance,
        )


def bound_audit(ks, xs, slack: float = 1e-12) -> list:
    """Per snapshot and coordinate, compare ``x_i^k`` with the logarithmic bounds.

    Only valid for trajectories started at 0.  Returns rows
    ``(k, i, lower, value, upper, ok)`` with ``i`` starting at 1.
    """
    rows = []
    for k, x in zip(ks, xs):
        x = np.asarray(x, dtype=float)
        i = np.arange(1, len(x) + 1)
        log_k = math.log(k + 1)
        lower = log_k - 2.0 * np.log(i)
        upper = np.full(len(x), log_k + math.log(2.0))
        ok = (lower - slack <= x) & (x <= upper + slack)
        rows.extend(zip([k] * len(x), i.tolist(), lower.tolist(), x.tolist(), upper.tolist(), ok.tolist()))
    return rows
