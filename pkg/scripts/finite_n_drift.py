"""Exact mean and variance of the scaled standard walk at finite n.

With n equal masses the jump count up to time s is Binomial(n, p), so the
moments of Zbar_n(s) are closed-form and can be set against -s^2/2 and s.
"""
import argparse
import math


def moments_at(n: int, s: float, t: float = 0.0):
    x = n ** (-2 / 3)
    s2 = n ** (-1 / 3)
    q = t + 1 / s2
    p = -math.expm1(-x * q * s)
    mean = (x * n * p - s) / s2
    var = x * x * n * p * (1 - p) / s2 ** 2
    return mean, var


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[10**3, 10**4, 10**5, 10**6, 10**8])
    ap.add_argument("--s", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()
    print("n,s,mean,target_mean,variance,target_variance")
    for n in args.n:
        for s in args.s:
            m, v = moments_at(n, s)
            print(f"{n},{s},{m:.5f},{-s * s / 2:.5f},{v:.5f},{s:.5f}")


if __name__ == "__main__":
    main()
