"""Largest component fraction of n masses 1/n at time c*n, across c."""
import argparse

import numpy as np

from multcoal.stats import giant_component, giant_fraction


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--cs", default="1.1,1.2,1.5,2,3")
    args = ap.parse_args()
    print("c,fraction,fixed_point")
    for c in (float(v) for v in args.cs.split(",")):
        est = giant_component(args.n, c, args.seed)
        print(f"{c},{est.fraction:.5f},{giant_fraction(c):.5f}")


if __name__ == "__main__":
    main()
