"""Goodness-of-fit wrappers and the named statistical checks.

The KS and chi-square statistics come from :mod:`scipy.stats`; this module
only packages them into :class:`TestReport` records and wires up the
Monte Carlo experiments that feed them.
"""
from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

from .core import ClockFamily, MassVector, Partition, clock_matrix, stream_rng

GENERATORS = ("direct", "bfw", "uribe")


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    p_value: float
    n_samples: int
    alpha: float = 0.001

    __test__ = False  # keep pytest from collecting this class

    @property
    def passed(self) -> bool:
        return bool(self.p_value > self.alpha)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --------------------------------------------------------------------------
# primitives
# --------------------------------------------------------------------------

def ks_two_sample(a, b, name: str = "ks-2", alpha: float = 0.001) -> TestReport:
    a, b = np.asarray(a, float), np.asarray(b, float)
    r = sps.ks_2samp(a, b, method="asymp")
    return TestReport(name, float(r.statistic), float(r.pvalue), int(min(a.size, b.size)), alpha)


def ks_one_sample(sample, cdf, args=(), name: str = "ks-1", alpha: float = 0.001) -> TestReport:
    sample = np.asarray(sample, float)
    r = sps.kstest(sample, cdf, args=args)
    return TestReport(name, float(r.statistic), float(r.pvalue), int(sample.size), alpha)


def _contingency(table: np.ndarray, name: str, n: int, alpha: float) -> TestReport:
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        # only one category observed on some axis: nothing to reject
        return TestReport(name, 0.0, 1.0, n, alpha)
    r = sps.chi2_contingency(table, correction=False)
    return TestReport(name, float(r.statistic), float(r.pvalue), n, alpha)


def chi2_independence(a: Sequence, b: Sequence, name: str = "chi2-indep",
                      alpha: float = 0.001) -> TestReport:
    """Pearson chi-square for independence of two categorical samples."""
    ka, kb = sorted(set(a)), sorted(set(b))
    ia = {v: i for i, v in enumerate(ka)}
    ib = {v: i for i, v in enumerate(kb)}
    table = np.zeros((len(ka), len(kb)))
    for u, v in zip(a, b):
        table[ia[u], ib[v]] += 1
    return _contingency(table, name, len(a), alpha)


def chi2_homogeneity(a: Sequence, b: Sequence, name: str = "chi2-2samp",
                     alpha: float = 0.001) -> TestReport:
    """Do two categorical samples come from the same law?"""
    ca, cb = Counter(a), Counter(b)
    keys = sorted(set(ca) | set(cb))
    table = np.array([[ca[k] for k in keys], [cb[k] for k in keys]], dtype=float)
    return _contingency(table, name, min(len(a), len(b)), alpha)


def chi2_goodness(sample: Sequence, probs: dict, name: str = "chi2-gof",
                  alpha: float = 0.001) -> TestReport:
    """Categorical sample against exact cell probabilities."""
    keys = list(probs)
    counts = Counter(sample)
    extra = set(counts) - set(keys)
    if extra:
        return TestReport(name, math.inf, 0.0, len(sample), alpha)
    obs = np.array([counts[k] for k in keys], dtype=float)
    p = np.array([probs[k] for k in keys], dtype=float)
    exp = p / p.sum() * obs.sum()
    r = sps.chisquare(obs, exp)
    return TestReport(name, float(r.statistic), float(r.pvalue), len(sample), alpha)


# --------------------------------------------------------------------------
# Monte Carlo plumbing
# --------------------------------------------------------------------------

def replicate(fn: Callable[[np.random.Generator, int], list], samples: int, seed: int,
              tag: str, threads: int = 1, chunk: int = 1000) -> list:
    """Run ``fn(rng, count)`` on fixed-size chunks with one stream per chunk.

    Chunk k always uses ``stream_rng(seed, tag, k)``, so the output does not
    depend on ``threads``.
    """
    sizes = [min(chunk, samples - k) for k in range(0, samples, chunk)]
    jobs = [(stream_rng(seed, tag, k), c) for k, c in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda j: fn(*j), jobs))
    else:
        parts = [fn(*j) for j in jobs]
    return [v for p in parts for v in p]


def sample_partitions(x: MassVector, q: float, generator: str, samples: int, seed: int,
                      threads: int = 1, on_run=None) -> list[Partition]:
    """Partition at time q from one of the three constructions.

    ``on_run``, if given, receives each bfw exploration or diagram coalescent.
    """
    from . import bfw, direct_mc, uribe

    def run(rng, count):
        out = []
        if generator == "direct":
            for _ in range(count):
                traj = direct_mc.simulate_direct(x, q, rng=rng)
                out.append(direct_mc.partition_at(traj, q))
        elif generator == "bfw":
            for row in clock_matrix(x, count, rng):
                if q == 0:
                    out.append(Partition.trivial(len(x)))
                    continue
                expl = bfw.explore(bfw.build_walk(x, ClockFamily(row), q))
                if on_run is not None:
                    on_run(expl)
                out.append(expl.partition())
        elif generator == "uribe":
            for _, uc in uribe.sample_coalescents(x, count, rng):
                if on_run is not None:
                    on_run(uc)
                out.append(uc.partition_at(q))
        else:
            raise ValueError(f"unknown generator {generator!r}")
        return out

    return replicate(run, samples, seed, f"partitions-{generator}", threads)


def partition_law_equality(x: MassVector, q: float, samples: int, seed: int,
                           generators: Sequence[str] = GENERATORS, alpha: float = 0.001,
                           threads: int = 1) -> dict[str, TestReport]:
    """Pairwise two-sample tests of the partition law at time q.

    Each generator draws from its own stream.  For n <= 5 the full partitions
    are compared by chi-square; beyond that only the largest block mass is
    compared, by KS.  q = 0 gives the trivial partition for every generator
    and the reports pass vacuously.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    parts = {g: sample_partitions(x, q, g, samples, seed, threads) for g in generators}
    out = {}
    gens = list(generators)
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            name = f"{a} vs {b} at q={q:g}"
            if len(x) <= 5:
                out[f"{a}-{b}"] = chi2_homogeneity([p.blocks for p in parts[a]],
                                                   [p.blocks for p in parts[b]], name, alpha)
            else:
                la = [p.masses(x).largest for p in parts[a]]
                lb = [p.masses(x).largest for p in parts[b]]
                out[f"{a}-{b}"] = ks_two_sample(la, lb, name, alpha)
    return out


# --------------------------------------------------------------------------
# named checks
# --------------------------------------------------------------------------

def connectivity_times(n: int, samples: int, seed: int, threads: int = 1) -> np.ndarray:
    """Time at which n unit masses become one block, via the diagram."""
    from .uribe import build_diagram

    x = MassVector(np.ones(n))

    def run(rng, count):
        out = []
        for row in clock_matrix(x, count, rng):
            d = build_diagram(x, ClockFamily(row))
            out.append(float(np.max(d.stop_times[1:])))
        return out

    return np.array(replicate(run, samples, seed, "connectivity", threads))


def gumbel_connectivity(n: int, samples: int, seed: int, alpha: float = 0.001,
                        threads: int = 1) -> TestReport:
    """n * T_conn - log n against the standard Gumbel law."""
    if n < 2:
        raise ValueError("need n >= 2")
    g = n * connectivity_times(n, samples, seed, threads) - math.log(n)
    return ks_one_sample(g, "gumbel_r", name=f"gumbel n={n}", alpha=alpha)


def giant_fraction(c: float, tol: float = 1e-14) -> float:
    """Largest root of rho = 1 - exp(-c rho), found by fixed-point iteration."""
    if c <= 1:
        return 0.0
    rho = 1.0
    for _ in range(100000):
        nxt = 1.0 - math.exp(-c * rho)
        if abs(nxt - rho) < tol:
            return nxt
        rho = nxt
    return rho


@dataclass(frozen=True)
class GiantEstimate:
    n: int
    c: float
    fraction: float
    expected: float

    @property
    def error(self) -> float:
        return abs(self.fraction - self.expected)


def giant_component(n: int, c: float, seed: int) -> GiantEstimate:
    """Largest block of n masses 1/n at time c*n, as a fraction of the total."""
    from .bfw import component_masses

    if c <= 1:
        warnings.warn("c <= 1: no giant component is expected", RuntimeWarning)
    x = np.full(n, 1.0 / n)
    rng = stream_rng(seed, "giant")
    xi = clock_matrix(x, 1, rng)[0]
    times = np.sort(xi) / (c * n)
    largest = float(component_masses(x, times).max())
    return GiantEstimate(n, c, largest, giant_fraction(c))
