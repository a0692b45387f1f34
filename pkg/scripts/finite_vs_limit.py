"""Scaled walk functionals at finite n against the discretised limit process."""
import argparse
import json

from multcoal.scaling import ScalingSequence, convergence_test


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10_000, 100_000])
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--c", type=float, nargs="*", default=[])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--grid-step", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    seq = ScalingSequence(args.kappa, tuple(args.c))
    for n in args.n:
        for r in convergence_test(seq, args.t, n, args.samples, args.grid_step, args.seed):
            print(json.dumps(r.to_dict()))


if __name__ == "__main__":
    main()
