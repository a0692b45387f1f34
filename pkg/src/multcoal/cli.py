"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 failed acceptance suite.

CSV layouts
  bfw     component_index,start,end,length,members   (members 1-based, ';'-joined)
  uribe   line_id,intercept,slope,stop_time,target    (1-based line ids)
  limit   start,end,length                            (--what excursions)
          s,W,B                                       (--what path)
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import acceptance, bfw, direct_mc, limit, scaling, stats, uribe
from .core import ClockFamily, MassVector, Partition, draw_clocks, moments

SCHEMA_VERSION = 1
SEED_ENV = "MULTCOAL_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _floats(text: str) -> list[float]:
    p = Path(text)
    if p.is_file():
        text = p.read_text()
        try:
            return [float(v) for v in json.loads(text)]
        except ValueError:
            pass
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as e:
        raise UsageError(f"cannot parse number list: {text!r}") from e


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _common(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--force", action="store_true", help="overwrite an existing output file")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="replication threads; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="multcoal", description="Multiplicative coalescent constructions and checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("direct", help="event-driven simulation, trajectory JSON")
    p.add_argument("--masses", required=True, help="comma list or file")
    p.add_argument("--horizon", type=float, default=math.inf)
    _common(p, ("json",))

    p = sub.add_parser("bfw", help="breadth-first walk partition at time q",
                       description="CSV columns: component_index,start,end,length,members")
    p.add_argument("--masses", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--xi", help="clock values, bypassing the random draw")
    _common(p, ("text", "json", "csv"))

    p = sub.add_parser("uribe", help="diagram lines and stop times",
                       description="CSV columns: line_id,intercept,slope,stop_time,target")
    p.add_argument("--masses", required=True)
    p.add_argument("--xi")
    p.add_argument("--s", type=float, help="also report the partition at this time")
    _common(p, ("csv", "json"))

    p = sub.add_parser("limit", help="reflected limit path and its excursions",
                       description="CSV columns: start,end,length or s,W,B (--what path)")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--c", default="", help="non-increasing comma list")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--horizon", type=float)
    p.add_argument("--min-length", type=float, default=0.0)
    p.add_argument("--what", choices=("excursions", "path"), default="excursions")
    _common(p, ("csv", "json"))

    p = sub.add_parser("compare", help="pairwise partition-law tests across generators")
    p.add_argument("--masses", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--alpha", type=float, default=0.001)
    _common(p, ("json",))

    p = sub.add_parser("scaling", help="scaled walk against the limit process")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--c", default="")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--grid-step", type=float, default=1e-3)
    _common(p, ("json",))

    p = sub.add_parser("suite", help="run the acceptance criteria")
    p.add_argument("--only", help="comma list of criterion numbers")
    _common(p, ("json",))
    return ap


def _clocks(args, x: MassVector) -> ClockFamily:
    if args.xi:
        xi = _floats(args.xi)
        if len(xi) != len(x):
            raise UsageError("--xi needs one value per mass")
        return ClockFamily(xi)
    return draw_clocks(x, args.seed)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _by_mass(p: Partition, x: MassVector) -> list[list[int]]:
    blocks = sorted(p.blocks, key=lambda b: (-math.fsum(x.masses[list(b)]), b[0]))
    return [[i + 1 for i in b] for b in blocks]


def _run(args) -> tuple[str, int]:
    cmd = args.command
    if cmd == "direct":
        x = MassVector(_floats(args.masses))
        traj = direct_mc.simulate_direct(x, args.horizon, seed=args.seed)
        return traj.to_json(), 0

    if cmd == "bfw":
        x = MassVector(_floats(args.masses))
        clocks = _clocks(args, x)
        expl = bfw.explore(bfw.build_walk(x, clocks, args.q))
        if args.format == "csv":
            return expl.to_csv(), 0
        blocks = _by_mass(expl.partition(), x)
        lengths = bfw.excursion_lengths(expl).lengths.tolist()
        if args.format == "json":
            return json.dumps({"schema_version": SCHEMA_VERSION, "q": args.q, "partition": blocks,
                               "lengths": lengths}), 0
        part = "{" + ",".join("{" + ",".join(map(str, b)) + "}" for b in blocks) + "}"
        return f"partition {part}\nlengths ({','.join(_fmt(v) for v in lengths)})\n", 0

    if cmd == "uribe":
        x = MassVector(_floats(args.masses))
        d = uribe.build_diagram(x, _clocks(args, x))
        if args.format == "csv":
            return d.to_csv(), 0
        uc = uribe.run_coalescent(d)
        out = {"schema_version": SCHEMA_VERSION,
               "lines": [{"line_id": k + 1, "intercept": float(d.intercepts[k]),
                          "slope": float(d.slopes[k]),
                          "stop_time": None if k == 0 else float(d.stop_times[k]),
                          "target": None if k == 0 else int(d.targets[k]) + 1} for k in range(len(d))],
               "connectivity_time": uc.connectivity_time}
        if args.s is not None:
            out["partition"] = _by_mass(uc.partition_at(args.s), x)
            out["masses"] = uribe.mass_process(uc, args.s).lengths.tolist()
        return json.dumps(out), 0

    if cmd == "limit":
        c = tuple(_floats(args.c)) if args.c else ()
        params = limit.ParamTriple(args.kappa, args.tau, c)
        path = limit.simulate_levy(params, args.t, args.grid_step, args.horizon, args.seed)
        rp = limit.reflect(path)
        if args.what == "path":
            if args.format == "csv":
                return path.to_csv(rp), 0
            return json.dumps({"schema_version": SCHEMA_VERSION, "s": path.times.tolist(),
                               "W": rp.values.tolist(), "B": rp.reflected.tolist()}), 0
        ex = limit.limit_excursions(rp, args.min_length)
        if args.format == "csv":
            return ex.to_csv(), 0
        return json.dumps({"schema_version": SCHEMA_VERSION, "horizon": path.horizon,
                           "excursions": ex.intervals.tolist(), "lengths": ex.lengths.lengths.tolist(),
                           "open_start": ex.open_start, "open_length": ex.open_length}), 0

    if cmd == "compare":
        x = MassVector(_floats(args.masses))
        reps = stats.partition_law_equality(x, args.q, args.samples, args.seed,
                                            alpha=args.alpha, threads=args.threads)
        ok = all(r.passed for r in reps.values())
        return json.dumps({"schema_version": SCHEMA_VERSION, "passed": ok,
                           "reports": {k: r.to_dict() for k, r in reps.items()}}), 0

    if cmd == "scaling":
        c = tuple(_floats(args.c)) if args.c else ()
        seq = scaling.ScalingSequence(args.kappa, c, args.tau)
        reps = scaling.convergence_test(seq, args.t, args.n, args.samples, args.grid_step,
                                        args.seed, args.s, threads=args.threads)
        x = seq.masses(args.n)
        return json.dumps({"schema_version": SCHEMA_VERSION, "sigma2": moments(x).sigma2,
                           "reports": [r.to_dict() for r in reps]}), 0

    if cmd == "suite":
        only = [int(v) for v in _floats(args.only)] if args.only else None
        if only and any(k not in acceptance.CRITERIA for k in only):
            raise UsageError("unknown criterion number")
        run = acceptance.AcceptanceRun(args.seed)
        run.run_all(only, echo=lambda line: print(line, file=sys.stderr, flush=True))
        summary = run.summary()
        return json.dumps(summary, indent=2), 0 if summary["passed"] else 2

    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be positive")
    if args.output and Path(args.output).exists() and not args.force:
        print(f"multcoal: {args.output} exists; use --force to overwrite", file=sys.stderr)
        return 1
    try:
        text, code = _run(args)
    except (UsageError, ValueError) as e:
        print(f"multcoal: error: {e}", file=sys.stderr)
        return 1
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
