"""Discretised limit processes and their excursions above past minima.

    W^{kappa,t-tau,c}(s) = sqrt(kappa) W(s) + (t - tau) s - kappa s^2 / 2
                           + sum_j (c_j 1{xi_j <= s} - c_j^2 s),   xi_j ~ Exp(c_j)

The path lives on a uniform grid merged with the exact jump times.  Each jump
contributes two timeline points, its left limit and its value, so excursions
that start with a jump are located exactly.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .core import OrderedLengths, stream_rng

LEFT, GRID, RIGHT = 0, 1, 2


@dataclass(frozen=True)
class ParamTriple:
    """(kappa, tau, c) with c truncated to the entries >= c_min.

    ``kappa == 0`` formally needs c outside l^2; a finite truncation can never
    satisfy that, so it is only recorded in ``l2_constraint_flag``.
    """

    kappa: float = 1.0
    tau: float = 0.0
    c: tuple[float, ...] = ()
    c_min: float = 1e-3
    discarded_cube_sum: float = field(init=False)
    truncation_length: int = field(init=False)

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ValueError("kappa must be nonnegative")
        c = tuple(float(v) for v in self.c)
        if any(v < 0 for v in c):
            raise ValueError("c entries must be nonnegative")
        if any(b > a for a, b in zip(c, c[1:])):
            raise ValueError("c must be non-increasing")
        kept = tuple(v for v in c if v >= self.c_min and v > 0)
        dropped = c[len(kept):]
        object.__setattr__(self, "c", kept)
        object.__setattr__(self, "discarded_cube_sum", math.fsum(v ** 3 for v in dropped))
        object.__setattr__(self, "truncation_length", len(kept))

    @property
    def l2_constraint_flag(self) -> bool:
        return self.kappa == 0

    @property
    def c_sum(self) -> float:
        return math.fsum(self.c)

    @property
    def c_sq_sum(self) -> float:
        return math.fsum(v * v for v in self.c)


def default_horizon(params: ParamTriple, t: float) -> float:
    """2(|t - tau| + sum c) / kappa, or / sum c^2 when kappa = 0, but at least 8."""
    drift = 2.0 * (abs(t - params.tau) + params.c_sum)
    if params.kappa > 0:
        return max(drift / params.kappa, 8.0)
    if params.c_sq_sum > 0:
        return max(drift / params.c_sq_sum, 8.0)
    return 8.0


@dataclass(frozen=True)
class LimitPath:
    params: ParamTriple
    t: float
    grid_step: float
    horizon: float
    increments: np.ndarray    # sqrt(kappa) * Brownian increment per grid cell
    jump_times: np.ndarray    # xi_j for every kept c_j (may exceed the horizon)
    jump_sizes: np.ndarray
    times: np.ndarray         # merged timeline
    kinds: np.ndarray         # LEFT / GRID / RIGHT per timeline point
    base: np.ndarray          # W^{kappa,-tau,c} on the timeline

    @property
    def values(self) -> np.ndarray:
        return self.base + self.t * self.times

    def at_t(self, t: float) -> "LimitPath":
        """Same realisation, different drift parameter."""
        return replace(self, t=float(t))

    def reconstruct(self) -> np.ndarray:
        """Recompute the values from the stored increments and jumps."""
        return _assemble(self.params, self.grid_step, self.increments,
                         self.jump_times, self.jump_sizes, self.horizon)[2] + self.t * self.times

    def to_csv(self, reflected: "ReflectedPath | None" = None) -> str:
        rp = reflected or reflect(self)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "W", "B"])
        for s, v, b in zip(self.times, rp.values, rp.reflected):
            w.writerow([repr(float(s)), repr(float(v)), repr(float(b))])
        return buf.getvalue()


def _assemble(params, step, inc, xi, c, horizon):
    ncell = inc.size
    grid = np.arange(ncell + 1) * step
    w_grid = np.concatenate([[0.0], np.cumsum(inc)])
    inside = xi <= grid[-1]
    jx = xi[inside]
    times = np.concatenate([grid, jx, jx])
    kinds = np.concatenate([np.full(grid.size, GRID), np.full(jx.size, LEFT), np.full(jx.size, RIGHT)])
    idx = np.lexsort((kinds, times))
    times, kinds = times[idx], kinds[idx]
    # Brownian part is linearly interpolated at jump times
    w = np.interp(times, grid, w_grid)
    jorder = np.argsort(xi)
    sx, sc = xi[jorder], c[jorder]
    cum = np.concatenate([[0.0], np.cumsum(sc)])
    jr = cum[np.searchsorted(sx, times, side="right")]
    jl = cum[np.searchsorted(sx, times, side="left")]
    jumps = np.where(kinds == LEFT, jl, jr)
    base = (w - params.tau * times - 0.5 * params.kappa * times ** 2
            + jumps - params.c_sq_sum * times)
    return times, kinds, base


def simulate_levy(params: ParamTriple, t: float, grid_step: float = 1e-3,
                  horizon: float | None = None, seed: int = 0, stream: int = 0) -> LimitPath:
    """One realisation of W^{kappa,t-tau,c} on [0, horizon].

    The Brownian and jump streams depend only on ``seed``, so changing t (or
    reusing the path with :meth:`LimitPath.at_t`) shifts the values by
    exactly (t' - t) s.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if horizon is None:
        horizon = default_horizon(params, t)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if params.kappa == 0 and not params.c:
        warnings.warn("kappa = 0 with empty c gives a deterministic path", RuntimeWarning)
    ncell = int(math.ceil(horizon / grid_step - 1e-9))
    inc = stream_rng(seed, "brownian", stream).normal(0.0, math.sqrt(grid_step), ncell)
    inc = math.sqrt(params.kappa) * inc
    c = np.asarray(params.c, dtype=float)
    xi = stream_rng(seed, "jumps", stream).exponential(1.0, c.size) / c if c.size else np.empty(0)
    times, kinds, base = _assemble(params, grid_step, inc, xi, c, horizon)
    return LimitPath(params, float(t), float(grid_step), float(ncell * grid_step), inc, xi, c,
                     times, kinds, base)


@dataclass(frozen=True)
class ReflectedPath:
    base: LimitPath
    values: np.ndarray
    running_min: np.ndarray
    reflected: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.base.times

    @property
    def records(self) -> np.ndarray:
        """Timeline points where the path sits at its running minimum."""
        return self.values <= self.running_min


def reflect(path: LimitPath) -> ReflectedPath:
    """B = W - running minimum of W over the discrete timeline."""
    v = path.values
    m = np.minimum.accumulate(v)
    return ReflectedPath(path, v, m, v - m)


@dataclass(frozen=True)
class ExcursionSet:
    intervals: np.ndarray          # (k, 2) closed excursions, in time order
    lengths: OrderedLengths        # retained lengths, non-increasing
    open_start: float | None       # start of an excursion still open at the horizon
    open_length: float | None
    jump_starts: int               # excursions whose start is a jump time

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start", "end", "length"])
        for a, b in self.intervals:
            w.writerow([repr(float(a)), repr(float(b)), repr(float(b - a))])
        return buf.getvalue()


def limit_excursions(rp: ReflectedPath, min_length: float = 0.0) -> ExcursionSet:
    """Maximal runs of B > 0 between record points of the discrete path.

    An excursion still running at the horizon is left out of ``lengths``; its
    start and running length are reported and a warning is issued.
    """
    if min_length < 0:
        raise ValueError("min_length must be nonnegative")
    times = rp.times
    z = np.flatnonzero(rp.records)
    gaps = np.flatnonzero(np.diff(z) > 1)
    starts, ends = z[gaps], z[gaps + 1]
    iv = np.column_stack([times[starts], times[ends]]) if starts.size else np.empty((0, 2))
    lengths = iv[:, 1] - iv[:, 0]
    keep = lengths >= min_length
    open_start = open_length = None
    if z[-1] < times.size - 1:
        open_start = float(times[z[-1]])
        open_length = float(times[-1] - open_start)
        warnings.warn(f"excursion open at the horizon (running length {open_length:.4g})",
                      RuntimeWarning)
    jump_starts = int(np.sum(rp.base.kinds[starts] == LEFT))
    return ExcursionSet(iv[keep], OrderedLengths.from_values(lengths[keep]), open_start,
                        open_length, jump_starts)


def excursion_nesting_check(params: ParamTriple, t1: float, t2: float, seed: int,
                            grid_step: float = 1e-3, horizon: float | None = None) -> bool:
    """Records at t2 are records at t1, on one shared realisation.

    Equivalently every excursion interval at t1 lies inside one at t2.
    """
    if t1 > t2:
        raise ValueError("need t1 <= t2")
    if horizon is None:
        horizon = max(default_horizon(params, t1), default_horizon(params, t2))
    path = simulate_levy(params, t1, grid_step, horizon, seed)
    r1 = reflect(path).records
    r2 = reflect(path.at_t(t2)).records
    return bool(np.all(r1[r2]))


def compensated_jump_mean(c, s: float) -> float:
    """E[sum_j (c_j 1{xi_j <= s} - c_j^2 s)] = sum_j c_j (1 - e^{-c_j s}) - c_j^2 s."""
    return math.fsum(v * -math.expm1(-v * s) - v * v * s for v in c)
