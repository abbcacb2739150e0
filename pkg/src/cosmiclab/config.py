"""Experiment configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .engine import Schedule

OPERATORS = ("paper2d", "seqspace", "translation")

DEFAULT_TOLERANCES = {
    "prox": 1e-12,
    "gamma": 1e-8,
    "step": 1e-9,
    "nonexpansive": 1e-9,
    "firm": 1e-9,
    "hyperplane": 1e-8,
    "monotone": 1e-8,
    "pairwise": 0.0,
    "cone": 1e-9,
    "bounds": 1e-12,
}


class ConfigError(ValueError):
    pass


def _vector(text):
    try:
        return tuple(float(t) for t in str(text).replace("(", "").replace(")", "").split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}") from exc


def _vectors(text):
    return tuple(_vector(part) for part in str(text).split(";") if part.strip())


@dataclass
class ExperimentConfig:
    operator: str = "paper2d"
    n_max: int | None = None
    n_coords: int = 512
    v: tuple | None = None
    x0: tuple | None = None
    k_max: int = 100_000
    schedule: str = "geometric:2"
    seed: int = 0
    out: str = "results"
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    eps_angle: float = 0.1
    min_norm: float = 10.0
    n_samples: int = 10_000
    box: float = 1e6
    q: tuple = ()

    def validate(self) -> "ExperimentConfig":
        if self.operator not in OPERATORS:
            raise ConfigError(f"operator must be one of {OPERATORS}, got {self.operator!r}")
        if self.operator == "paper2d":
            if self.n_max is None:
                raise ConfigError("paper2d needs n_max (--nmax)")
            if not 2 <= self.n_max <= 100:
                raise ConfigError("n_max must lie in [2, 100]")
        if self.operator == "seqspace" and self.n_coords < 1:
            raise ConfigError("n_coords must be positive")
        if self.operator == "translation" and not self.v:
            raise ConfigError("translation needs v")
        if self.k_max < 1:
            raise ConfigError("k_max must be at least 1")
        if self.x0 is not None and len(self.x0) != self.dimension:
            raise ConfigError(f"x0 has {len(self.x0)} entries, operator dimension is {self.dimension}")
        if not 0 < self.eps_angle < 1.5707963267948966:
            raise ConfigError("eps_angle must lie in (0, pi/2)")
        if self.min_norm <= 0 or self.n_samples < 1 or self.box <= 0:
            raise ConfigError("min_norm, n_samples and box must be positive")
        unknown = set(self.tol) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names {sorted(unknown)}")
        try:
            self.parsed_schedule()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    @property
    def dimension(self) -> int:
        return {"paper2d": 2, "seqspace": self.n_coords, "translation": len(self.v or ())}[self.operator]

    def parsed_schedule(self) -> Schedule:
        return Schedule.parse(self.schedule)

    def start(self):
        return self.x0 if self.x0 is not None else (0.0,) * self.dimension

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["tol"] = dict(sorted(d["tol"].items()))
        d["v"] = list(self.v) if self.v else None
        d["x0"] = list(self.start())
        d["q"] = [list(q) for q in self.q]
        return d


_CASTS = {
    "operator": str,
    "n_max": int,
    "n_coords": int,
    "v": _vector,
    "x0": _vector,
    "k_max": lambda s: int(float(s)),
    "schedule": str,
    "seed": int,
    "out": str,
    "eps_angle": float,
    "min_norm": float,
    "n_samples": lambda s: int(float(s)),
    "box": float,
    "q": _vectors,
}


def apply_setting(cfg: ExperimentConfig, key: str, value: str) -> None:
    key = key.strip().replace("-", "_")
    if key.startswith("tol."):
        name = key[4:]
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {name!r}")
        try:
            cfg.tol[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value {value!r}") from exc
        return
    if key not in _CASTS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        setattr(cfg, key, _CASTS[key](value.strip()))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def parse_config_text(text: str, cfg: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    cfg = cfg or ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        apply_setting(cfg, key, value)
    return cfg
