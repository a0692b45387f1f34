"""Connectivity time of n unit masses, centred and scaled, against Gumbel."""
import argparse
import math

import numpy as np

from multcoal.stats import connectivity_times, ks_one_sample


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    g = args.n * connectivity_times(args.n, args.samples, args.seed, args.threads) - math.log(args.n)
    rep = ks_one_sample(g, "gumbel_r", name=f"gumbel n={args.n}")
    print(rep.to_json())
    print(f"median {np.median(g):.4f} (Gumbel median {-math.log(math.log(2)):.4f})")


if __name__ == "__main__":
    main()
