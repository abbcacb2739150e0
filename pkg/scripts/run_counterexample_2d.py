"""Long run of the planar prox counter-example, printing each level crossing.

    python3 scripts/run_counterexample_2d.py --nmax 8 --kmax 20000000
"""

import argparse
import time

import numpy as np

from cosmiclab import Schedule, build_paper_operator, cosmic_report, iterate, paper_handle
from cosmiclab.prox2d import GammaAudit, analytic_direction


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=int, default=8)
    ap.add_argument("--kmax", type=int, default=20_000_000)
    ap.add_argument("--x0", type=float, nargs=2, default=(0.0, 0.0))
    args = ap.parse_args()

    op = build_paper_operator(args.nmax)
    audit = GammaAudit(op)
    t0 = time.perf_counter()
    traj = iterate(paper_handle(op), args.x0, args.kmax, Schedule(ratio=2, levels=True), [audit])
    print(f"{traj.n_steps} steps in {time.perf_counter() - t0:.1f} s")
    print(f"{'level':>6} {'k':>12} {'direction':>24} {'analytic':>24}")
    for n, k in sorted(traj.crossings.items()):
        x = traj.at(k).x
        q = x / np.hypot(*x)
        a = analytic_direction(n)
        print(f"{-n:>6} {k:>12} {q[0]:>11.6f} {q[1]:>11.6f}  {a[0]:>11.6f} {a[1]:>11.6f}")
    rep = cosmic_report(traj)
    for center, count in rep.clusters:
        print(f"cluster {center.round(6)} x{count}")
    print(f"|v_hat| (last step) {np.hypot(*rep.v_hat_baillon):.3e}")
    print(f"max curve residual {audit.max_gamma:.2e}, max step {audit.max_step:.6f}")


if __name__ == "__main__":
    main()
