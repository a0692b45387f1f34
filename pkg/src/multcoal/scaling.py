"""Scaled breadth-first walks near the critical window.

For a mass vector x with sigma_2 small, run the walk at q = t - tau + 1/sigma_2
and divide values (not times) by sigma_2.  The largest m blocks are split off
into R, the rest forms Y, and Z = Y + R.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bfw import component_masses
from .core import ClockFamily, MassVector, clock_matrix, moments
from .limit import ParamTriple, default_horizon, limit_excursions, reflect, simulate_levy
from .stats import ks_two_sample, replicate

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ScalingSequence:
    """x^(n): n dust blocks of mass kappa^{-1/3} n^{-2/3} plus big blocks c_j d_n,
    where d_n = kappa^{-2/3} n^{-1/3}; or any user ``generator``."""

    kappa: float = 1.0
    c: tuple[float, ...] = ()
    tau: float = 0.0
    generator: Callable[[int], MassVector] | None = field(default=None, compare=False)

    def masses(self, n: int) -> MassVector:
        if self.generator is not None:
            return self.generator(n)
        if not self.kappa > 0:
            raise ValueError("the built-in sequence needs kappa > 0")
        dust = np.full(n, self.kappa ** (-1 / 3) * n ** (-2 / 3))
        big = np.asarray(self.c, dtype=float) * self.kappa ** (-2 / 3) * n ** (-1 / 3)
        return MassVector.sorted(np.concatenate([big[big > 0], dust]))

    @property
    def params(self) -> ParamTriple:
        return ParamTriple(self.kappa, self.tau, self.c)


def standard_sequence() -> ScalingSequence:
    """n blocks of mass n^{-2/3}: the critical Erdos-Renyi window."""
    return ScalingSequence(1.0, (), 0.0)


def hypothesis_residuals(x: MassVector, kappa: float, c: Sequence[float]) -> dict:
    mom = moments(x)
    c = list(c)
    m = x.masses
    cfull = c + [0.0]
    r_c = max(abs(m[j] / mom.sigma2 - cfull[j]) if j < len(m) else cfull[j]
              for j in range(len(cfull)))
    return {
        "sigma2": mom.sigma2,
        "kappa_residual": abs(mom.sigma3 / mom.sigma2 ** 3 - (kappa + math.fsum(v ** 3 for v in c))),
        "c_residual": float(r_c),
        "sigma2_residual": mom.sigma2,
    }


@dataclass(frozen=True)
class HypothesisReport:
    rows: tuple[dict, ...]
    tolerance: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps({"schema_version": SCHEMA_VERSION, "tolerance": self.tolerance,
                           "passed": self.passed, "rows": list(self.rows)})


def check_hypotheses(seq: ScalingSequence, n_list: Sequence[int], tol: float = 0.05) -> HypothesisReport:
    """Residual table; passes iff every residual is non-increasing in n and
    ends below ``tol``."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    rows = tuple({"n": n, **hypothesis_residuals(seq.masses(n), seq.kappa, seq.c)} for n in n_list)
    keys = ("kappa_residual", "c_residual", "sigma2_residual")
    ok = True
    for k in keys:
        r = [row[k] for row in rows]
        ok &= all(b <= a + 1e-12 for a, b in zip(r, r[1:])) and r[-1] < tol
    return HypothesisReport(rows, tol, bool(ok))


def m_residuals(x: MassVector, c: Sequence[float], m: int,
                sigma2: float | None = None) -> tuple[float, float, float]:
    """The three sums controlling how many big blocks are split off."""
    s2 = moments(x).sigma2 if sigma2 is None else sigma2
    cc = np.zeros(m)
    k = min(m, len(c))
    cc[:k] = np.asarray(c, dtype=float)[:k]
    head = x.masses[:m] / s2
    r1 = abs(math.fsum(head ** 2) - math.fsum(cc ** 2))
    r2 = abs(math.fsum((head - cc) ** 3))
    r3 = s2 * math.fsum(cc ** 2)
    return r1, r2, r3


def choose_m(x: MassVector, c: Sequence[float], tolerance: float = 0.05) -> int:
    """Largest m <= floor(n^{1/4}) whose three residuals are all below ``tolerance``."""
    cap = min(int(math.floor(len(x) ** 0.25 + 1e-12)), len(x))
    s2 = moments(x).sigma2
    for m in range(cap, 0, -1):
        if max(m_residuals(x, c, m, s2)) < tolerance:
            return m
    return 0


@dataclass(frozen=True)
class JumpDriftPath:
    """sum_i sizes_i 1{times_i <= s} + drift * s, with times sorted."""

    times: np.ndarray
    sizes: np.ndarray
    drift: float

    def value(self, s):
        s = np.asarray(s, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.sizes)])
        return cum[np.searchsorted(self.times, s, side="right")] + self.drift * s


@dataclass(frozen=True)
class ScaledWalk:
    n: int
    m: int
    q: float
    sigma2: float
    z: JumpDriftPath   # unscaled Z_n
    r: JumpDriftPath   # unscaled R_n (the m largest blocks, compensated)
    y: JumpDriftPath   # unscaled Y_n = Z_n - R_n

    def z_bar(self, s):
        return self.z.value(s) / self.sigma2

    def r_bar(self, s):
        return self.r.value(s) / self.sigma2

    def y_bar(self, s):
        return self.y.value(s) / self.sigma2

    @property
    def jump_times(self) -> np.ndarray:
        return self.z.times


def critical_q(sigma2: float, t: float, tau: float = 0.0) -> float:
    return t - tau + 1.0 / sigma2


def scaled_walk(x: MassVector, clocks: ClockFamily, t: float, tau: float = 0.0, m: int = 0) -> ScaledWalk:
    s2 = moments(x).sigma2
    q = critical_q(s2, t, tau)
    if not q > 0:
        raise ValueError("q_n(t) = t - tau + 1/sigma2 must be positive")
    if not 0 <= m <= len(x):
        raise ValueError("m out of range")
    order = clocks.order
    times = clocks.xi[order] / q
    sizes = x.masses[order]
    big = order < m
    comp = math.fsum(x.masses[:m] ** 2) / s2
    z = JumpDriftPath(times, sizes, -1.0)
    r = JumpDriftPath(times[big], sizes[big], -comp)
    y = JumpDriftPath(times[~big], sizes[~big], -1.0 + comp)
    return ScaledWalk(len(x), m, q, s2, z, r, y)


def time_change_residual(x: MassVector, clocks: ClockFamily, t: float, z: float,
                         tau: float = 0.0) -> float:
    """Largest relative defect of
    Zbar^z(s q(t)/q(z)) = Zbar^t(s) + s (1 - q(t)/q(z)) / sigma2
    over the flat pieces of Zbar^t (midpoints between jumps) and past the last jump."""
    wt = scaled_walk(x, clocks, t, tau)
    wz = scaled_walk(x, clocks, z, tau)
    jt = wt.jump_times
    pts = np.concatenate([[0.5 * jt[0]], 0.5 * (jt[1:] + jt[:-1]), [jt[-1] * 1.5 + 1.0]])
    ratio = wt.q / wz.q
    lhs = wz.z_bar(pts * ratio)
    rhs = wt.z_bar(pts) + pts * (1.0 - ratio) / wt.sigma2
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


# --------------------------------------------------------------------------
# functionals and the convergence harness
# --------------------------------------------------------------------------

FUNCTIONALS = ("value", "running_min", "largest_excursion")


def walk_functionals(masses: np.ndarray, xi: np.ndarray, q: float, sigma2: float, s: float) -> tuple:
    """Zbar(s), min of Zbar on [0, s], largest excursion length of Z."""
    order = np.argsort(xi, kind="stable")
    times = xi[order] / q
    sizes = masses[order]
    cum = np.concatenate([[0.0], np.cumsum(sizes)])
    k = int(np.searchsorted(times, s, side="right"))
    value = cum[k] - s
    lows = cum[:k] - times[:k]
    low = min(0.0, value, float(lows.min()) if k else 0.0)
    largest = float(component_masses(sizes, times).max())
    return value / sigma2, low / sigma2, largest


def limit_functionals(path, s: float) -> tuple:
    rp = reflect(path)
    i = int(np.searchsorted(path.times, s, side="right")) - 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ex = limit_excursions(rp)
    return float(rp.values[i]), float(rp.running_min[i]), ex.lengths.largest


@dataclass(frozen=True)
class ConvergenceReport:
    n: int
    t: float
    functional: str
    ks_stat: float
    p_value: float
    n_samples: int
    alpha: float = 0.001

    @property
    def passed(self) -> bool:
        return self.p_value > self.alpha

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def sample_walk_functionals(seq: ScalingSequence, n: int, t: float, samples: int, seed: int,
                            s: float = 1.0, threads: int = 1) -> np.ndarray:
    x = seq.masses(n)
    s2 = moments(x).sigma2
    q = critical_q(s2, t, seq.tau)
    if not q > 0:
        raise ValueError("q_n(t) must be positive")

    def run(rng, count):
        xi = clock_matrix(x, count, rng)
        return [walk_functionals(x.masses, row, q, s2, s) for row in xi]

    return np.array(replicate(run, samples, seed, f"walk-n{n}", threads, chunk=100))


def sample_limit_functionals(params: ParamTriple, t: float, samples: int, seed: int,
                             grid_step: float = 1e-3, s: float = 1.0,
                             horizon: float | None = None) -> np.ndarray:
    if horizon is None:
        horizon = default_horizon(params, t)
    out = [limit_functionals(simulate_levy(params, t, grid_step, horizon, seed, stream=k), s)
           for k in range(samples)]
    return np.array(out)


def convergence_test(seq: ScalingSequence, t: float, n: int, samples: int, grid_step: float = 1e-3,
                     seed: int = 0, s: float = 1.0, alpha: float = 0.001,
                     threads: int = 1) -> list[ConvergenceReport]:
    """Two-sample KS of Zbar_n functionals against the discretised limit."""
    fin = sample_walk_functionals(seq, n, t, samples, seed, s, threads)
    lim = sample_limit_functionals(seq.params, t, samples, seed, grid_step, s)
    out = []
    for j, name in enumerate(FUNCTIONALS):
        r = ks_two_sample(fin[:, j], lim[:, j], name, alpha)
        out.append(ConvergenceReport(n, t, name, r.statistic, r.p_value, samples, alpha))
    return out
