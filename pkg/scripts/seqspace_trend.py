"""First normalized coordinate of the sequence-space iterates, for several truncations."""

import argparse

import numpy as np

from cosmiclab import Schedule, TruncatedGradientOperator, iterate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ncoords", type=int, nargs="+", default=[64, 512, 4096])
    ap.add_argument("--kmax", type=int, default=100_000)
    args = ap.parse_args()

    ks = [k for k in (10, 100, 1_000, 10_000, 100_000, 1_000_000) if k <= args.kmax]
    print("N".rjust(6) + "".join(f"{'k=' + str(k):>12}" for k in ks))
    for n in args.ncoords:
        op = TruncatedGradientOperator(n)
        traj = iterate(op.handle(), np.zeros(n), args.kmax, Schedule(indices=ks))
        ratios = [traj.at(k).x[0] / np.linalg.norm(traj.at(k).x) for k in ks]
        print(f"{n:>6}" + "".join(f"{r:>12.4f}" for r in ratios))


if __name__ == "__main__":
    main()
