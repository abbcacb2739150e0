"""Sampling checks of operator properties and of the separating-hyperplane results.

Every check returns a :class:`CheckReport` with a signed worst violation;
``passed`` means ``worst_violation <= tolerance``.  Sampling is reproducible
from ``seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import OperatorHandle, Trajectory

__all__ = [
    "CheckReport",
    "check_nonexpansive",
    "check_firmly_nonexpansive",
    "check_separating_hyperplane",
    "check_monotone_inner",
    "check_pairwise_nonneg",
    "check_cone_inclusion_2d",
]

DEFAULT_BOX = (-1e6, 1e6)


@dataclass
class CheckReport:
    name: str
    n_samples: int
    worst_violation: float
    tolerance: float
    witness: object = None
    seed: int | None = None
    extra: dict | None = None

    @property
    def passed(self) -> bool:
        return bool(self.worst_violation <= self.tolerance)

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (list, tuple)):
                return [plain(u) for u in v]
            return v

        return {
            "name": self.name,
            "n_samples": self.n_samples,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "witness": plain(self.witness),
            "seed": self.seed,
            "extra": self.extra or {},
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<34} worst={self.worst_violation: .3e}  tol={self.tolerance:.1e}  n={self.n_samples}"


def _sampler(dim, box, seed):
    lo, hi = np.broadcast_to(np.asarray(box[0], float), dim), np.broadcast_to(np.asarray(box[1], float), dim)
    if not np.all(lo < hi):
        raise ValueError(f"degenerate sampling box {box!r}")
    rng = np.random.default_rng(seed)
    return lambda n: rng.uniform(lo, hi, size=(n, dim))


def _check_count(n):
    if n < 1:
        raise ValueError("need at least one sample")


def check_nonexpansive(op: OperatorHandle, n_pairs: int, box=DEFAULT_BOX, tol: float = 1e-9, seed: int = 0) -> CheckReport:
    """Worst ``|Tu - Tw| - |u - w|`` over random pairs."""
    _check_count(n_pairs)
    draw = _sampler(op.dimension, box, seed)
    U, W = draw(n_pairs), draw(n_pairs)
    worst, witness = -math.inf, None
    for u, w in zip(U, W):
        v = np.linalg.norm(op(u) - op(w)) - np.linalg.norm(u - w)
        if v > worst:
            worst, witness = float(v), (u, w)
    return CheckReport("nonexpansive", n_pairs, worst, tol, witness, seed)


def check_firmly_nonexpansive(op: OperatorHandle, n_pairs: int, box=DEFAULT_BOX, tol: float = 1e-9, seed: int = 0) -> CheckReport:
    """Worst ``(|Tu - Tw|^2 - <Tu - Tw, u - w>) / |u - w|^2`` over random pairs.

    The defining inequality is homogeneous of degree two, so it is scaled by
    ``|u - w|^2``; otherwise rounding in a large box swamps any fixed tolerance.
    """
    _check_count(n_pairs)
    draw = _sampler(op.dimension, box, seed)
    U, W = draw(n_pairs), draw(n_pairs)
    worst, witness = -math.inf, None
    for u, w in zip(U, W):
        delta = u - w
        scale = float(delta @ delta)
        if scale == 0:
            continue
        e = op(u) - op(w)
        v = (float(e @ e) - float(e @ delta)) / scale
        if v > worst:
            worst, witness = v, (u, w)
    return CheckReport("firmly_nonexpansive", n_pairs, worst, tol, witness, seed)


def _check_unit(q, dim=None):
    q = np.asarray(q, dtype=float)
    if dim is not None and q.shape != (dim,):
        raise ValueError(f"direction has shape {q.shape}, expected ({dim},)")
    if abs(np.linalg.norm(q) - 1.0) > 1e-9:
        raise ValueError("direction must have unit norm")
    return q


def check_separating_hyperplane(op: OperatorHandle, q, n_samples: int, box=DEFAULT_BOX, tol: float = 1e-8, seed: int = 0) -> CheckReport:
    """Worst ``-<T(x) - x, q>``; a cosmic accumulation point ``q`` makes it ``<= 0``."""
    _check_count(n_samples)
    q = _check_unit(q, op.dimension)
    draw = _sampler(op.dimension, box, seed)
    worst, witness = -math.inf, None
    for x in draw(n_samples):
        v = -float((op(x) - x) @ q)
        if v > worst:
            worst, witness = v, x
    return CheckReport("separating_hyperplane", n_samples, worst, tol, witness, seed, {"q": q.tolist()})


def check_monotone_inner(traj: Trajectory, q, tol: float = 1e-8) -> CheckReport:
    """Worst decrease of ``<x^k, q>`` between consecutive checkpoints.

    The stored final pair contributes one exact single-step comparison.
    """
    q = _check_unit(q)
    if len(traj.checkpoints) < 2:
        raise ValueError("need at least two checkpoints")
    values = np.array([float(c.x @ q) for c in traj.checkpoints])
    drops = values[:-1] - values[1:]
    prev, last = traj.final_pair
    drops = np.append(drops, float(prev @ q) - float(last @ q))
    i = int(np.argmax(drops))
    witness = traj.checkpoints[i].k if i < len(values) - 1 else traj.n_steps - 1
    growth = float(values[-1] - values[0])
    return CheckReport("monotone_inner", len(drops), float(drops[i]), tol, witness,
                       extra={"q": q.tolist(), "growth": growth})


def check_pairwise_nonneg(centers, tol: float = 0.0) -> CheckReport:
    """Worst ``-<q_i, q_j>`` over all pairs, the diagonal included."""
    C = np.atleast_2d(np.asarray(centers, dtype=float))
    if C.size == 0:
        raise ValueError("need at least one center")
    G = C @ C.T
    i, j = np.unravel_index(np.argmin(G), G.shape)
    return CheckReport("pairwise_nonneg", len(C), float(-G[i, j]), tol, (int(i), int(j)),
                       extra={"min_inner": float(G[i, j])})


def _angular_span(angles):
    """Smallest closed arc ``(start, width)`` containing all angles."""
    a = np.sort(np.mod(angles, 2 * math.pi))
    gaps = np.diff(np.append(a, a[0] + 2 * math.pi))
    i = int(np.argmax(gaps))
    start = a[(i + 1) % len(a)]
    return float(start), float(2 * math.pi - gaps[i])


def check_cone_inclusion_2d(q, op: OperatorHandle, n_samples: int, box=DEFAULT_BOX, tol: float = 1e-9, seed: int = 0) -> CheckReport:
    """Is ``q`` inside the angular span of sampled displacements ``T(x) - x``?

    The violation is the angular distance (radians) from ``q`` to the sampled
    arc, 0 when inside.  Sampling only gives evidence, not proof.
    """
    if op.dimension != 2:
        raise ValueError("cone inclusion check is two-dimensional")
    _check_count(n_samples)
    q = _check_unit(q, 2)
    draw = _sampler(2, box, seed)
    X = draw(n_samples)
    D = np.array([op(x) - x for x in X])
    size = np.hypot(D[:, 0], D[:, 1])
    keep = size > 1e-12 * (1.0 + np.abs(X).max(axis=1))
    if not keep.any():
        raise ValueError("all sampled displacements vanish; empty angular span")
    angles = np.arctan2(D[keep, 1], D[keep, 0])
    start, width = _angular_span(angles)
    offset = (math.atan2(q[1], q[0]) - start) % (2 * math.pi)
    if offset <= width:
        violation = 0.0
    else:
        violation = min(offset - width, 2 * math.pi - offset)
    return CheckReport("cone_inclusion_2d", n_samples, violation, tol, None, seed,
                       {"q": q.tolist(), "arc_start": start, "arc_width": width})
