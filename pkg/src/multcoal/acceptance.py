"""The acceptance suite: one function per criterion, each returning a
:class:`CriterionResult`.

Criterion 7 (mass conservation) audits every breadth-first-walk and
diagram run made by criteria 1 to 6, so :class:`AcceptanceRun` caches
results and runs 1 to 6 on demand.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bfw, direct_mc, limit, scaling, stats, uribe
from .core import ClockFamily, MassVector, Partition, clock_matrix, moments, stream_rng

SCHEMA_VERSION = 1

FIGURE_X = (1.1, 0.8, 0.5, 0.4, 0.4, 0.3, 0.2)
FIGURE_XI = (6.0, 0.2, 1.4, 0.7, 5.6, 4.6, 3.4)
FIGURE_Q = 2.0
FIGURE_PARTITION = Partition.from_one_based([[2, 3, 4, 7], [1, 5], [6]])
FIGURE_LENGTHS = (1.9, 1.5, 0.3)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict)
    seed: int | None = None

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name} ({self.runtime:.2f}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "runtime": self.runtime, "seed": self.seed, "details": _jsonable(self.details)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, stats.TestReport):
        return v.to_dict()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


class MassAudit:
    """Largest relative gap between total component mass and sigma_1."""

    def __init__(self):
        self.runs = 0
        self.worst = 0.0

    def record(self, total: float, sigma1: float) -> None:
        self.runs += 1
        self.worst = max(self.worst, abs(total - sigma1) / sigma1)


def _expl_total(expl: bfw.Exploration) -> float:
    return math.fsum(c.length for c in expl.components)


def _random_masses(rng, n: int) -> MassVector:
    return MassVector.sorted(rng.uniform(0.05, 1.0, n))


# --------------------------------------------------------------------------

def c1_golden(audit: MassAudit, seed: int) -> CriterionResult:
    x = MassVector(FIGURE_X)
    clocks = ClockFamily(FIGURE_XI)

    def run():
        expl = bfw.explore(bfw.build_walk(x, clocks, FIGURE_Q))
        uc = uribe.run_coalescent(uribe.build_diagram(x, clocks))
        return expl, uc

    run()
    timings = []
    for _ in range(20):
        t0 = time.perf_counter()
        expl, uc = run()
        timings.append(time.perf_counter() - t0)
    elapsed = min(timings)
    p_bfw = expl.partition()
    p_uri = uc.partition_at(FIGURE_Q)
    l_bfw = bfw.excursion_lengths(expl)
    l_uri = uribe.mass_process(uc, FIGURE_Q)
    audit.record(_expl_total(expl), x.total)
    audit.record(l_uri.total, x.total)
    ok = (p_bfw == FIGURE_PARTITION and p_uri == FIGURE_PARTITION
          and l_bfw.allclose(FIGURE_LENGTHS) and l_uri.allclose(FIGURE_LENGTHS) and elapsed < 1e-3)
    return CriterionResult(1, "golden coupling example", ok, elapsed, {
        "bfw_partition": str(p_bfw), "uribe_partition": str(p_uri),
        "bfw_lengths": l_bfw.lengths.tolist(), "uribe_lengths": l_uri.lengths.tolist(),
        "best_runtime_s": elapsed})


def _same_events(a, b, rtol=1e-9) -> bool:
    if len(a) != len(b):
        return False
    for ea, eb in zip(sorted(a, key=lambda e: (e.time, e.left)), sorted(b, key=lambda e: (e.time, e.left))):
        if (ea.left, ea.right) != (eb.left, eb.right):
            return False
        if abs(ea.time - eb.time) > rtol * max(abs(ea.time), abs(eb.time)):
            return False
    return True


def c2_coupling(audit: MassAudit, seed: int, instances: int = 10_000) -> CriterionResult:
    rng = stream_rng(seed, "c2")
    t0 = time.perf_counter()
    bad = 0
    for _ in range(instances):
        n = int(rng.integers(1, 51))
        x = _random_masses(rng, n)
        while True:
            clocks = ClockFamily(clock_matrix(x, 1, rng)[0])
            d = uribe.build_diagram(x, clocks)
            if not d.has_ties:
                break
        uc = uribe.run_coalescent(d)
        ev = bfw.merge_events(x, clocks)
        if not _same_events(uc.merges, ev):
            bad += 1
        audit.record(uribe.mass_process(uc, math.inf).total, x.total)
    elapsed = time.perf_counter() - t0
    return CriterionResult(2, "exact bfw/diagram merge coupling", bad == 0 and elapsed < 30, elapsed,
                           {"instances": instances, "mismatches": bad}, seed)


def _first_merge_times(x: MassVector, gen: str, samples: int, seed: int, audit: MassAudit) -> np.ndarray:
    def run(rng, count):
        out = []
        if gen == "direct":
            for _ in range(count):
                out.append(direct_mc.simulate_direct(x, math.inf, rng=rng).events[0].time)
        elif gen == "bfw":
            for row in clock_matrix(x, count, rng):
                clocks = ClockFamily(row)
                out.append(bfw.merge_events(x, clocks)[0].time)
                expl = bfw.explore(bfw.build_walk(x, clocks, 1.0))
                audit.record(_expl_total(expl), x.total)
        else:
            for _ in range(count):
                _, uc = uribe.sample_coalescent(x, rng)
                out.append(uc.events[0][0])
                audit.record(uribe.mass_process(uc, 1.0).total, x.total)
        return out

    return np.array(stats.replicate(run, samples, seed, f"c3-{gen}-{x.masses.tolist()}"))


def c3_two_blocks(audit: MassAudit, seed: int, samples: int = 100_000) -> CriterionResult:
    t0 = time.perf_counter()
    reports = {}
    for pair in ((1.0, 1.0), (2.0, 0.5), (3.0, 1.0)):
        x = MassVector(pair)
        rate = pair[0] * pair[1]
        for gen in stats.GENERATORS:
            s = _first_merge_times(x, gen, samples, seed, audit)
            reports[f"{pair}-{gen}"] = stats.ks_one_sample(s, "expon", args=(0, 1 / rate),
                                                           name=f"{gen} x={pair}")
    ok = all(r.passed for r in reports.values())
    return CriterionResult(3, "two-block merge time is exponential", ok, time.perf_counter() - t0,
                           reports, seed)


def c4_law_equality(audit: MassAudit, seed: int, samples: int = 100_000) -> CriterionResult:
    x = MassVector((1.0, 0.5, 0.5, 0.25))
    t0 = time.perf_counter()
    reports = {}
    for q in (0.5, 1.0, 2.0):
        def check(run, q=q):
            total = (_expl_total(run) if isinstance(run, bfw.Exploration)
                     else uribe.mass_process(run, q).total)
            audit.record(total, x.total)

        parts = {g: stats.sample_partitions(x, q, g, samples, seed, on_run=check)
                 for g in stats.GENERATORS}
        gens = stats.GENERATORS
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                reports[f"q={q}: {a}-{b}"] = stats.chi2_homogeneity(
                    [p.blocks for p in parts[a]], [p.blocks for p in parts[b]], f"{a} vs {b} q={q}")
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reports.values()) and elapsed < 120
    return CriterionResult(4, "three-way partition law equality", ok, elapsed, reports, seed)


def c5_S_pi(audit: MassAudit, seed: int, samples: int = 100_000) -> CriterionResult:
    x = MassVector((2.0, 1.0, 1.0))
    t0 = time.perf_counter()
    reps = uribe.check_S_pi_independence(
        x, samples, seed, on_run=lambda uc: audit.record(uribe.mass_process(uc, 1.0).total, x.total))
    ok = reps["independence"].passed and reps["S_exponential"].passed
    return CriterionResult(5, "first merge time independent of clock order", ok,
                           time.perf_counter() - t0, reps, seed)


def c6_nesting(audit: MassAudit, seed: int, instances: int = 1000) -> CriterionResult:
    rng = stream_rng(seed, "c6")
    t0 = time.perf_counter()
    bad = 0
    for _ in range(instances):
        n = int(rng.integers(2, 51))
        x = _random_masses(rng, n)
        clocks = ClockFamily(clock_matrix(x, 1, rng)[0])
        q1, q2 = np.sort(rng.uniform(0.0, 3.0 / moments(x).sigma2, 2))
        e1 = bfw.explore(bfw.build_walk(x, clocks, q1))
        e2 = bfw.explore(bfw.build_walk(x, clocks, q2))
        audit.record(_expl_total(e1), x.total)
        audit.record(_expl_total(e2), x.total)
        if not e1.partition().refines(e2.partition()):
            bad += 1
    return CriterionResult(6, "bfw partitions nested in q", bad == 0, time.perf_counter() - t0,
                           {"instances": instances, "violations": bad}, seed)


def c7_mass(audit: MassAudit, seed: int) -> CriterionResult:
    ok = audit.runs > 0 and audit.worst <= 1e-9
    return CriterionResult(7, "mass conservation over criteria 1-6", ok, 0.0,
                           {"runs": audit.runs, "worst_relative_error": audit.worst})


def c8_gumbel(audit: MassAudit, seed: int, n: int = 1000, samples: int = 10_000) -> CriterionResult:
    t0 = time.perf_counter()
    rep = stats.gumbel_connectivity(n, samples, seed)
    elapsed = time.perf_counter() - t0
    return CriterionResult(8, "Gumbel connectivity time", rep.passed and elapsed < 300, elapsed,
                           {"report": rep}, seed)


def c9_giant(audit: MassAudit, seed: int, n: int = 100_000) -> CriterionResult:
    out, ok, total = {}, True, 0.0
    for c in (2.0, 1.2):
        t0 = time.perf_counter()
        est = stats.giant_component(n, c, seed)
        dt = time.perf_counter() - t0
        total += dt
        out[f"c={c}"] = {"fraction": est.fraction, "expected": est.expected, "runtime": dt}
        ok &= est.error <= 0.02 and dt < 60
    return CriterionResult(9, "giant component fraction", bool(ok), total, out, seed)


def _zbar_samples(n: int, s_points, samples: int, seed: int, tag: str) -> np.ndarray:
    seq = scaling.standard_sequence()
    x = seq.masses(n)
    s2 = moments(x).sigma2
    q = scaling.critical_q(s2, 0.0)
    m = x.masses[0]
    s_points = np.asarray(s_points, dtype=float)

    def run(rng, count):
        xi = clock_matrix(x, count, rng) / q
        # equal masses: Z(s) = m * #{xi/q <= s} - s
        cnt = (xi[:, :, None] <= s_points).sum(axis=1)
        return list((m * cnt - s_points) / s2)

    return np.array(stats.replicate(run, samples, seed, tag, chunk=200))


def c10_drift_variance(audit: MassAudit, seed: int, n: int = 10_000, samples: int = 10_000) -> CriterionResult:
    t0 = time.perf_counter()
    s_points = (0.5, 1.0, 2.0)
    z = _zbar_samples(n, s_points, samples, seed, "c10")
    rows, ok = {}, True
    for j, s in enumerate(s_points):
        v = z[:, j]
        mean, var = float(v.mean()), float(v.var(ddof=1))
        se_mean = math.sqrt(var / samples)
        se_var = math.sqrt(max(float(np.mean((v - mean) ** 4)) - var ** 2, 0.0) / samples)
        z_mean = (mean + s * s / 2) / se_mean
        z_var = (var - s) / se_var
        good = abs(z_mean) <= 3 and abs(z_var) <= 3
        ok &= good
        rows[f"s={s}"] = {"mean": mean, "target_mean": -s * s / 2, "mean_z": z_mean,
                          "variance": var, "target_variance": s, "variance_z": z_var, "passed": good}
    return CriterionResult(10, "scaled walk drift and variance", bool(ok), time.perf_counter() - t0, rows, seed)


def c11_marginal(audit: MassAudit, seed: int, n: int = 10_000, samples: int = 10_000) -> CriterionResult:
    t0 = time.perf_counter()
    z = _zbar_samples(n, (1.0,), samples, seed, "c11")[:, 0]
    rep = stats.ks_one_sample(z, "norm", args=(-0.5, 1.0), name="Zbar(1) vs N(-1/2, 1)")
    return CriterionResult(11, "scaled walk marginal at s=1", rep.passed, time.perf_counter() - t0,
                           {"report": rep, "mean": float(z.mean()), "variance": float(z.var(ddof=1))}, seed)


def c12_limit_nesting(audit: MassAudit, seed: int, seeds: int = 100, grid_step: float = 1e-4) -> CriterionResult:
    t0 = time.perf_counter()
    out, ok = {}, True
    for kappa in (0.0, 1.0):
        for c in ((), (1.0,), (1.0, 0.5)):
            if kappa == 0 and not c:
                continue
            p = limit.ParamTriple(kappa, 0.0, c)
            good = sum(limit.excursion_nesting_check(p, 0.0, 1.0, seed * 100_000 + k, grid_step)
                       for k in range(seeds))
            out[f"kappa={kappa}, c={c}"] = f"{good}/{seeds}"
            ok &= good == seeds
    return CriterionResult(12, "limit excursions nested in t", bool(ok), time.perf_counter() - t0, out, seed)


def c13_excursion_law(audit: MassAudit, seed: int, n: int = 10_000, samples: int = 10_000,
                      grid_step: float = 1e-4) -> CriterionResult:
    t0 = time.perf_counter()
    seq = scaling.standard_sequence()
    x = seq.masses(n)
    q = scaling.critical_q(moments(x).sigma2, 0.0)

    def run(rng, count):
        xi = np.sort(clock_matrix(x, count, rng), axis=1) / q
        sizes = np.full(n, x.masses[0])
        return [float(bfw.component_masses(sizes, row).max()) for row in xi]

    fin = np.array(stats.replicate(run, samples, seed, "c13-bfw", chunk=200))
    p = limit.ParamTriple(1.0, 0.0, ())
    lim = scaling.sample_limit_functionals(p, 0.0, samples, seed, grid_step)[:, 2]
    rep = stats.ks_two_sample(fin, lim, "largest excursion: bfw n=1e4 vs limit")
    return CriterionResult(13, "finite-n vs limit largest excursion", rep.passed, time.perf_counter() - t0,
                           {"report": rep, "grid_step": grid_step,
                            "bfw_mean": float(fin.mean()), "limit_mean": float(lim.mean())}, seed)


def c14_time_change(audit: MassAudit, seed: int, instances: int = 100) -> CriterionResult:
    rng = stream_rng(seed, "c14")
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(10, 2001))
        x = scaling.standard_sequence().masses(n)
        clocks = ClockFamily(clock_matrix(x, 1, rng)[0])
        t, z = rng.uniform(-3, 3, 2)
        worst = max(worst, scaling.time_change_residual(x, clocks, float(t), float(z)))
    return CriterionResult(14, "simultaneous-q time-change identity", worst <= 1e-9,
                           time.perf_counter() - t0, {"instances": instances, "worst": worst}, seed)


CRITERIA = {1: c1_golden, 2: c2_coupling, 3: c3_two_blocks, 4: c4_law_equality, 5: c5_S_pi,
            6: c6_nesting, 7: c7_mass, 8: c8_gumbel, 9: c9_giant, 10: c10_drift_variance,
            11: c11_marginal, 12: c12_limit_nesting, 13: c13_excursion_law, 14: c14_time_change}


class AcceptanceRun:
    """Lazily evaluated, cached criteria sharing one mass audit."""

    def __init__(self, seed: int = 1):
        self.seed = seed
        self.audit = MassAudit()
        self.results: dict[int, CriterionResult] = {}

    def criterion(self, k: int) -> CriterionResult:
        if k not in self.results:
            if k == 7:
                for j in range(1, 7):
                    self.criterion(j)
            self.results[k] = CRITERIA[k](self.audit, self.seed)
        return self.results[k]

    def run_all(self, only=None, echo=None) -> list[CriterionResult]:
        out = []
        for k in (only or sorted(CRITERIA)):
            r = self.criterion(k)
            if echo:
                echo(r.line())
            out.append(r)
        return out

    def summary(self) -> dict:
        res = [self.results[k] for k in sorted(self.results)]
        return {"schema_version": SCHEMA_VERSION, "seed": self.seed,
                "passed": all(r.passed for r in res), "criteria": [r.to_dict() for r in res]}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2)
