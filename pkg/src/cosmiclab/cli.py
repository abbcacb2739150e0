"""Command-line front end.

Exit codes: 0 success, 1 a check or audit failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, apply_setting, parse_config_text
from .engine import (
    Schedule,
    cosmic_report,
    iterate,
    translation_handle,
)
from .prox2d import GammaAudit, build_paper_operator, gamma_point, paper_handle
from .seqspace import TruncatedGradientOperator, bound_audit
from .theorems import (
    check_cone_inclusion_2d,
    check_firmly_nonexpansive,
    check_monotone_inner,
    check_nonexpansive,
    check_pairwise_nonneg,
    check_separating_hyperplane,
)

_FLAG_KEYS = {
    "operator": "operator",
    "nmax": "n_max",
    "ncoords": "n_coords",
    "kmax": "k_max",
    "schedule": "schedule",
    "seed": "seed",
    "out": "out",
    "v": "v",
    "x0": "x0",
    "eps_angle": "eps_angle",
    "min_norm": "min_norm",
    "samples": "n_samples",
    "box": "box",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cosmiclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--nmax", help="depth of the 2-D construction")
    common.add_argument("--ncoords", help="truncation dimension of the sequence-space operator")
    common.add_argument("--kmax", help="number of iterations")
    common.add_argument("--schedule", help="geometric:RHO | levels | list:K1,K2,... joined by +")
    common.add_argument("--seed", help="sampling seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VAL")
    common.add_argument("--x0", help="start point, comma separated")
    common.add_argument("--v", help="translation vector, comma separated")
    common.add_argument("--eps-angle", dest="eps_angle")
    common.add_argument("--min-norm", dest="min_norm")
    common.add_argument("--samples", help="sample count for verification checks")
    common.add_argument("--box", help="half-width of the sampling box")

    sub.add_parser("run2d", parents=[common], help="iterate the 2-D prox counter-example")
    sub.add_parser("runseq", parents=[common], help="iterate the sequence-space operator")
    verify = sub.add_parser("verify", parents=[common], help="run the verification suite")
    verify.add_argument("--operator", choices=("paper2d", "seqspace", "translation"))
    verify.add_argument("--q", action="append", default=[], help="direction to test (repeatable)")
    export = sub.add_parser("export", help="convert a saved trajectory")
    export.add_argument("input", help="trajectory.json written by run2d/runseq/verify")
    export.add_argument("--format", choices=("csv", "json", "ballmap", "snapshots"), default="csv")
    export.add_argument("--output", required=True)
    return parser


def resolve_config(args, operator: str | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        parse_config_text(text, cfg)
    for flag, key in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            apply_setting(cfg, key, str(value))
    for item in getattr(args, "tol", []):
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VAL, got {item!r}")
        apply_setting(cfg, "tol." + name, value)
    if getattr(args, "q", None):
        apply_setting(cfg, "q", ";".join(args.q))
    if operator is not None:
        cfg.operator = operator
    return cfg.validate()


def _schedule(cfg: ExperimentConfig, levels: bool) -> Schedule:
    s = cfg.parsed_schedule()
    return Schedule(s.ratio, s.indices, s.levels or levels)


def _print_clusters(report, out=None):
    out = out or sys.stdout
    print(f"{len(report.clusters)} direction cluster(s):", file=out)
    for center, count in report.clusters:
        print(f"  center={np.array2string(center[:4], precision=6)}{' ...' if len(center) > 4 else ''}"
              f"  count={count}", file=out)


def run2d(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out)
    config = cfg.resolved()
    op = build_paper_operator(cfg.n_max)
    targets = [gamma_point(op, -n) for n in range(1, cfg.n_max + 1)]
    audit = GammaAudit(op, targets)
    traj = iterate(paper_handle(op, cfg.tol["prox"]), cfg.start(), cfg.k_max, _schedule(cfg, True), [audit])
    report = cosmic_report(traj, cfg.min_norm, cfg.eps_angle)

    summary = audit.summary()
    gamma_ok = summary["max_gamma_residual"] <= cfg.tol["gamma"]
    step_ok = summary["max_step"] <= 1.0 + cfg.tol["step"]
    on_curve = np.allclose(op.gap(np.array([cfg.start()])), 0.0)
    audit_ok = step_ok and (gamma_ok or not on_curve)

    io.write_json(out / "trajectory.json", io.trajectory_to_dict(traj), config)
    io.write_csv(out / "trajectory.csv", *io.trajectory_rows(traj), config)
    io.write_csv(out / "ballmap.csv", *io.ballmap_rows(traj), config)
    level_rows = [[-j, k, *traj.at(k).x.tolist()] for j, k in sorted(traj.crossings.items())]
    io.write_csv(out / "levels.csv", ["level", "k", "x", "y"], level_rows, config)
    io.write_json(out / "report.json", {
        "cosmic_report": report.to_dict(),
        "audit": {**summary, "gamma_ok": gamma_ok, "step_ok": step_ok, "passed": audit_ok},
        "n_steps": traj.n_steps,
        "stopped_by_guard": traj.stopped_by_guard,
        "crossings": {str(j): k for j, k in sorted(traj.crossings.items())},
    }, config)

    print(f"{traj.label}: {traj.n_steps} steps"
          + (" (stopped at truncation guard)" if traj.stopped_by_guard else ""))
    for j, k in sorted(traj.crossings.items()):
        x = traj.at(k).x
        print(f"  level {-j:>3}: k={k:<10d} direction={np.array2string(x / np.linalg.norm(x), precision=5)}")
    _print_clusters(report)
    print(f"max curve residual {summary['max_gamma_residual']:.2e}, max step {summary['max_step']:.6f}")
    return 0 if audit_ok else 1


def runseq(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out)
    config = cfg.resolved()
    op = TruncatedGradientOperator(cfg.n_coords)
    traj = iterate(op.handle(), cfg.start(), cfg.k_max, _schedule(cfg, False))
    report = cosmic_report(traj, cfg.min_norm, cfg.eps_angle)

    from_zero = not np.any(traj.start)
    audit_rows = bound_audit(traj.ks, [c.x for c in traj.checkpoints], cfg.tol["bounds"]) if from_zero else []
    violations = sum(1 for row in audit_rows if not row[-1])

    shown = min(3, cfg.n_coords)
    trend_header = ["k", "norm"] + [f"q_{i}" for i in range(1, shown + 1)] + ["max_abs_q"]
    trend = []
    for c in traj.checkpoints:
        r = float(np.linalg.norm(c.x))
        q = c.x / r if r > 0 else np.zeros_like(c.x)
        trend.append([c.k, r, *q[:shown].tolist(), float(np.abs(q).max())])

    io.write_json(out / "trajectory.json", io.trajectory_to_dict(traj), config)
    io.write_csv(out / "snapshots.csv", *io.snapshot_rows(traj), config)
    io.write_csv(out / "trend.csv", trend_header, trend, config)
    io.write_csv(out / "bounds_audit.csv", ["k", "i", "lower", "x_i", "upper", "ok"], audit_rows, config)
    io.write_json(out / "report.json", {
        "cosmic_report": report.to_dict(),
        "bound_audit": {"checked": len(audit_rows), "violations": violations, "applicable": from_zero},
        "trend": [dict(zip(trend_header, row)) for row in trend],
        "n_steps": traj.n_steps,
    }, config)

    print(f"{traj.label}: {traj.n_steps} steps")
    for row in trend:
        print(f"  k={row[0]:<9d} |x|={row[1]:.4f}  x_1/|x|={row[2]:.6f}  max|q_i|={row[-1]:.6f}")
    if from_zero:
        print(f"bound audit: {violations} violation(s) in {len(audit_rows)} checks")
    return 1 if violations else 0


def _handle_for(cfg: ExperimentConfig):
    if cfg.operator == "paper2d":
        return paper_handle(build_paper_operator(cfg.n_max), cfg.tol["prox"])
    if cfg.operator == "seqspace":
        return TruncatedGradientOperator(cfg.n_coords).handle()
    return translation_handle(cfg.v)


def verify(cfg: ExperimentConfig) -> int:
    h = _handle_for(cfg)
    box = (-cfg.box, cfg.box)
    traj = iterate(h, cfg.start(), cfg.k_max, _schedule(cfg, cfg.operator == "paper2d"))
    report = cosmic_report(traj, cfg.min_norm, cfg.eps_angle)
    if cfg.q:
        qs = [np.array(q) / np.linalg.norm(q) for q in cfg.q]
    else:
        qs = [c for c, _ in report.clusters]
    if not qs:
        raise ConfigError("no directions to test: trajectory too short for min_norm, pass --q")
    for q in qs:
        if len(q) != h.dimension:
            raise ConfigError(f"direction of length {len(q)} for a {h.dimension}-dimensional operator")

    tol, n, seed = cfg.tol, cfg.n_samples, cfg.seed
    checks = [
        check_nonexpansive(h, n, box, tol["nonexpansive"], seed),
        check_firmly_nonexpansive(h, n, box, tol["firm"], seed),
    ]
    for q in qs:
        checks.append(check_separating_hyperplane(h, q, n, box, tol["hyperplane"], seed))
        checks.append(check_monotone_inner(traj, q, tol["monotone"]))
        if h.dimension == 2:
            checks.append(check_cone_inclusion_2d(q, h, n, box, tol["cone"], seed))
    checks.append(check_pairwise_nonneg(qs, tol["pairwise"]))

    print(f"verify {h.label}, {traj.n_steps} steps, seed {seed}")
    for q in qs:
        print(f"  q = {np.array2string(q[:4], precision=6)}{' ...' if len(q) > 4 else ''}")
    for c in checks:
        print("  " + c.line())
    failed = [c for c in checks if not c.passed]
    out = Path(cfg.out)
    config = cfg.resolved()
    io.write_json(out / "verify.json", {
        "checks": [c.to_dict() for c in checks],
        "directions": [q.tolist() for q in qs],
        "passed": not failed,
    }, config)
    io.write_json(out / "trajectory.json", io.trajectory_to_dict(traj), config)
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def export(args) -> int:
    try:
        doc = io.read_json(args.input)
        traj = io.trajectory_from_dict(doc)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read trajectory {args.input}: {exc}") from exc
    config = doc.get("config")
    if args.format == "json":
        io.write_json(args.output, io.trajectory_to_dict(traj), config)
    elif args.format == "csv":
        io.write_csv(args.output, *io.trajectory_rows(traj), config)
    elif args.format == "ballmap":
        io.write_csv(args.output, *io.ballmap_rows(traj), config)
    else:
        io.write_csv(args.output, *io.snapshot_rows(traj), config)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            return export(args)
        if args.command == "run2d":
            return run2d(resolve_config(args, "paper2d"))
        if args.command == "runseq":
            return runseq(resolve_config(args, "seqspace"))
        return verify(resolve_config(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
