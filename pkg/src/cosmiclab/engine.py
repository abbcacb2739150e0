"""Fixed-point iteration driver and cosmic-direction analysis.

Long runs keep only checkpoints: a geometric or explicit index schedule,
optionally the first iterate below each integer level, and the final
consecutive pair.  Observers see every iterate in chunks, so whole-run audits
do not need the full trajectory in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "OperatorHandle",
    "Schedule",
    "Checkpoint",
    "Trajectory",
    "CosmicReport",
    "iterate",
    "directions",
    "cluster_directions",
    "min_displacement_estimates",
    "cosmic_report",
    "ball_map",
    "translation_handle",
    "rotation_handle",
]

DEFAULT_CHUNK = 1 << 20
# iterates that land on an integer level up to rounding count as crossing it
LEVEL_SLACK = 1e-12


@dataclass
class OperatorHandle:
    """A non-expansive map on ``R^dimension``.

    ``advance(x, m)`` may return up to ``m`` successive iterates as rows, for
    operators with a fast multi-step path.  ``level`` and ``stop`` act
    row-wise on arrays of points.
    """

    dimension: int
    apply: Callable[[np.ndarray], np.ndarray]
    label: str = "T"
    level: Callable | None = None
    advance: Callable | None = None
    stop: Callable | None = None

    def __call__(self, x):
        return np.asarray(self.apply(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class Schedule:
    """Which iterates to keep: ``ceil(ratio**j)``, explicit indices, level crossings."""

    ratio: float | None = None
    indices: tuple = ()
    levels: bool = False

    def __post_init__(self):
        if self.ratio is not None and not self.ratio > 1:
            raise ValueError("geometric ratio must exceed 1")
        if any(int(k) < 0 for k in self.indices):
            raise ValueError("schedule indices must be nonnegative")
        object.__setattr__(self, "indices", tuple(sorted({int(k) for k in self.indices})))

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        """Parse ``geometric:RHO``, ``levels``, ``list:K1,K2,...`` joined by ``+``."""
        ratio, indices, levels = None, [], False
        for part in filter(None, (p.strip() for p in text.split("+"))):
            kind, _, arg = part.partition(":")
            if kind == "geometric":
                ratio = float(arg)
            elif kind == "levels" and not arg:
                levels = True
            elif kind == "list":
                indices += [int(float(k)) for k in arg.split(",") if k.strip()]
            else:
                raise ValueError(f"unknown schedule component {part!r}")
        return cls(ratio, tuple(indices), levels)

    def __str__(self):
        parts = []
        if self.ratio is not None:
            parts.append(f"geometric:{self.ratio:g}")
        if self.levels:
            parts.append("levels")
        if self.indices:
            parts.append("list:" + ",".join(map(str, self.indices)))
        return "+".join(parts)

    def fixed_indices(self, k_max: int) -> np.ndarray:
        ks = {0, k_max}
        ks.update(k for k in self.indices if k <= k_max)
        if self.ratio is not None:
            j = 0
            while True:
                k = math.ceil(self.ratio**j)
                if k > k_max:
                    break
                ks.add(k)
                j += 1
        return np.array(sorted(ks), dtype=np.int64)


class Checkpoint(NamedTuple):
    k: int
    x: np.ndarray
    step: np.ndarray | None  # x^k - x^{k-1}; None at k = 0
    level: float | None


@dataclass
class Trajectory:
    label: str
    start: np.ndarray
    checkpoints: list
    final_pair: tuple
    n_steps: int
    crossings: dict = field(default_factory=dict)
    stopped_by_guard: bool = False

    @property
    def ks(self) -> list:
        return [c.k for c in self.checkpoints]

    def at(self, k: int) -> Checkpoint:
        for c in self.checkpoints:
            if c.k == k:
                return c
        raise KeyError(k)

    @property
    def final(self) -> np.ndarray:
        return self.final_pair[1]


@dataclass
class CosmicReport:
    directions: list
    clusters: list
    v_hat_pazy: np.ndarray
    v_hat_baillon: np.ndarray

    def to_dict(self) -> dict:
        return {
            "directions": [{"k": int(k), "q": q.tolist()} for k, q in self.directions],
            "clusters": [{"center": c.tolist(), "count": int(n)} for c, n in self.clusters],
            "v_hat_pazy": self.v_hat_pazy.tolist(),
            "v_hat_baillon": self.v_hat_baillon.tolist(),
        }


def iterate(
    op: OperatorHandle,
    x0,
    k_max: int,
    schedule: Schedule | None = None,
    observers=(),
    chunk: int = DEFAULT_CHUNK,
) -> Trajectory:
    """Run ``x^{k+1} = T(x^k)`` for ``k_max`` steps, keeping scheduled snapshots.

    Stops early (``stopped_by_guard``) when ``op.stop`` flags an iterate;
    that iterate is the last one kept.  Each observer is called as
    ``observer(k0, x_k0, rows)`` where ``rows`` hold iterates ``k0+1, ...``.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    schedule = schedule or Schedule(ratio=2.0)
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape != (op.dimension,):
        raise ValueError(f"start point has dimension {x.size}, operator expects {op.dimension}")
    track_levels = schedule.levels and op.level is not None
    targets = schedule.fixed_indices(k_max)

    def level_of(rows):
        return op.level(rows) if op.level is not None else None

    lv0 = level_of(x[None, :])
    kept = {0: Checkpoint(0, x.copy(), None, None if lv0 is None else float(lv0[0]))}
    crossings = {}
    next_level = 1
    if track_levels:
        while lv0[0] <= -next_level + LEVEL_SLACK * next_level:
            crossings[next_level] = 0
            next_level += 1

    k, prev, stopped = 0, x.copy(), False
    while k < k_max:
        want = min(k_max - k, chunk)
        if op.advance is not None:
            rows = np.asarray(op.advance(x, want), dtype=float)
        else:
            rows = op(x)[None, :]
        if rows.ndim != 2 or rows.shape[1] != op.dimension or not 1 <= len(rows) <= want:
            raise ValueError(f"operator {op.label} returned rows of shape {rows.shape}")
        if op.stop is not None:
            flagged = np.flatnonzero(op.stop(rows))
            if flagged.size:
                rows = rows[: flagged[0] + 1]
                stopped = True
        for obs in observers:
            obs(k, x, rows)

        m = len(rows)
        lv = level_of(rows)
        hits = targets[(targets > k) & (targets <= k + m)] - k - 1
        if track_levels:
            while True:
                below = np.flatnonzero(lv <= -next_level + LEVEL_SLACK * next_level)
                if not below.size:
                    break
                crossings[next_level] = k + 1 + int(below[0])
                hits = np.append(hits, below[0])
                next_level += 1
        if stopped:
            hits = np.append(hits, m - 1)
        for r in np.unique(hits):
            before = rows[r - 1] if r > 0 else x
            kk = k + 1 + int(r)
            kept[kk] = Checkpoint(
                kk, rows[r].copy(), rows[r] - before, None if lv is None else float(lv[r])
            )
        prev = rows[-2].copy() if m > 1 else x
        x = rows[-1].copy()
        k += m
        if stopped:
            break

    checkpoints = [kept[kk] for kk in sorted(kept)]
    return Trajectory(op.label, np.array(x0, dtype=float).reshape(-1), checkpoints,
                      (prev, x), k, crossings, stopped)


def _unit(v):
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v))
    if scale == 0:
        raise ValueError("cannot normalize the zero vector")
    w = v / scale
    return w / np.linalg.norm(w)


def directions(traj: Trajectory, min_norm: float = 10.0, crossings_only: bool = False) -> list:
    """Normalized checkpoints ``(k, x^k / |x^k|)`` with ``|x^k| >= min_norm``."""
    if not min_norm > 0:
        raise ValueError("min_norm must be positive")
    wanted = set(traj.crossings.values()) if crossings_only else None
    out = []
    for c in traj.checkpoints:
        if wanted is not None and c.k not in wanted:
            continue
        if np.linalg.norm(c.x) >= min_norm:
            out.append((c.k, _unit(c.x)))
    return out


def _angle(u, v):
    return math.acos(max(-1.0, min(1.0, float(np.dot(u, v)))))


def cluster_directions(dirs, eps_angle: float = 0.1) -> list:
    """Greedy angular clustering of unit vectors.

    Each direction joins the first founding member within ``eps_angle``;
    reported centers are normalized member means.
    """
    if not 0 < eps_angle < math.pi / 2:
        raise ValueError("eps_angle must lie in (0, pi/2)")
    founders, members = [], []
    for d in dirs:
        d = np.asarray(d[1] if isinstance(d, tuple) else d, dtype=float)
        for i, f in enumerate(founders):
            if _angle(d, f) <= eps_angle:
                members[i].append(d)
                break
        else:
            founders.append(d)
            members.append([d])
    return [(_unit(np.mean(group, axis=0)), len(group)) for group in members]


def min_displacement_estimates(traj: Trajectory, k: int | None = None) -> tuple:
    """``(-x^K / K, -(x^K - x^{K-1}))`` at the final step or a checkpoint ``k``."""
    if k is None:
        K = traj.n_steps
        if K == 0:
            raise ValueError("trajectory has no steps")
        prev, last = traj.final_pair
        return -last / K, -(last - prev)
    if k == 0:
        raise ValueError("no displacement at k = 0")
    c = traj.at(k)
    return -c.x / k, -c.step


def cosmic_report(
    traj: Trajectory,
    min_norm: float = 10.0,
    eps_angle: float = 0.1,
    crossings_only: bool | None = None,
) -> CosmicReport:
    """Directions, clusters of their tail half, and displacement estimates.

    Level-crossing snapshots are used for clustering when the trajectory has
    any, unless ``crossings_only`` says otherwise.
    """
    if crossings_only is None:
        crossings_only = bool(traj.crossings)
    dirs = directions(traj, min_norm, crossings_only)
    clusters = cluster_directions(dirs[len(dirs) // 2:], eps_angle)
    pazy, baillon = min_displacement_estimates(traj)
    return CosmicReport(directions(traj, min_norm), clusters, pazy, baillon)


def ball_map(x):
    x = np.asarray(x, dtype=float)
    return x / (1.0 + np.linalg.norm(x))


def translation_handle(v) -> OperatorHandle:
    """``T(x) = x - v``: an isometry with minimal displacement vector ``v``."""
    v = np.array(v, dtype=float)
    return OperatorHandle(len(v), lambda x: x - v, label=f"translation(v={v.tolist()})")


def rotation_handle(angle: float = math.pi / 2) -> OperatorHandle:
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])
    return OperatorHandle(2, lambda x: R @ x, label=f"rotation({angle:g})")
