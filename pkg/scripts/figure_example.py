"""Worked seven-block example: walk, exploration, diagram and cut walk."""
import argparse

from multcoal import ClockFamily, MassVector
from multcoal.bfw import build_walk, cut_free_intervals, excursion_lengths, explore
from multcoal.uribe import build_diagram, run_coalescent

X = (1.1, 0.8, 0.5, 0.4, 0.4, 0.3, 0.2)
XI = (6.0, 0.2, 1.4, 0.7, 5.6, 4.6, 3.4)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=2.0)
    args = ap.parse_args()
    x, clocks = MassVector(X), ClockFamily(XI)
    walk = build_walk(x, clocks, args.q)
    expl = explore(walk)
    print(expl.to_csv(), end="")
    print("lengths", excursion_lengths(expl).lengths.round(12).tolist())
    print("cut walk jumps", cut_free_intervals(walk, expl).jump_times.round(12).tolist())
    d = build_diagram(x, clocks)
    print(d.to_csv(), end="")
    uc = run_coalescent(d)
    print("partition at q:", uc.partition_at(args.q))


if __name__ == "__main__":
    main()
