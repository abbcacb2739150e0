"""Write ball-map coordinates of a planar run (for plotting the approach to the unit circle)."""

import argparse

from cosmiclab import Schedule, build_paper_operator, iterate, paper_handle
from cosmiclab import io


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=int, default=8)
    ap.add_argument("--kmax", type=int, default=1_000_000)
    ap.add_argument("--ratio", type=float, default=1.05)
    ap.add_argument("--output", default="ballmap.csv")
    args = ap.parse_args()

    op = build_paper_operator(args.nmax)
    traj = iterate(paper_handle(op), (0.0, 0.0), args.kmax, Schedule(ratio=args.ratio, levels=True))
    io.write_csv(args.output, *io.ballmap_rows(traj), {"n_max": args.nmax, "k_max": args.kmax})
    print(f"wrote {len(traj.checkpoints)} points to {args.output}")


if __name__ == "__main__":
    main()
