"""Uribe's diagram and the partition-valued coalescent it induces.

Line k (0-based, in clock order) starts at xi_(k) and falls with slope equal
to the mass of the k blocks picked before it.  It stops at the first time it
meets a lower line, and its class is handed to that line.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ClockFamily, MassVector, OrderedLengths, Partition, clock_matrix, stream_rng
from .direct_mc import MergeEvent


class TieError(RuntimeError):
    """Two lines stop at the same instant."""


@dataclass(frozen=True)
class Diagram:
    intercepts: np.ndarray   # xi_(k)
    slopes: np.ndarray       # -(mass picked before line k)
    stop_times: np.ndarray   # s_k, inf for the bottom line
    targets: np.ndarray      # l_k, -1 for the bottom line
    order: np.ndarray        # block carried by each line at time 0
    masses: np.ndarray       # mass of the block carried by each line

    def __len__(self) -> int:
        return self.intercepts.size

    @property
    def has_ties(self) -> bool:
        s = self.stop_times[1:].tolist()
        return len(set(s)) < len(s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["line_id", "intercept", "slope", "stop_time", "target"])
        last = float(np.max(self.stop_times[1:])) if len(self) > 1 else 0.0
        for k in range(len(self)):
            stop = last if k == 0 else float(self.stop_times[k])
            target = "" if k == 0 else int(self.targets[k]) + 1
            w.writerow([k + 1, repr(float(self.intercepts[k])), repr(float(self.slopes[k])),
                        repr(stop), target])
        return buf.getvalue()


def build_diagram(x: MassVector, clocks: ClockFamily, strict: bool = False) -> Diagram:
    """Intercepts, slopes, stop times s_k = min_j s_{k,j} and targets l_k.

    With P_j = (mass before line j, xi_(j)), s_{k,j} is the slope from P_j to
    P_k, so the minimising j is the tangent point from P_k to the upper hull
    of P_0..P_{k-1}.  One monotone-chain pass finds all of them.
    ``strict=True`` raises :class:`TieError` on coinciding stop times.
    """
    order = clocks.order
    t = clocks.xi[order]
    m = x.masses[order]
    s = np.concatenate([[0.0], np.cumsum(m)[:-1]])
    n = t.size
    tl, sl = t.tolist(), s.tolist()  # plain floats: the sweep is scalar work
    stop = [math.inf] * n
    target = [-1] * n
    hull = [0]
    for k in range(1, n):
        xk, yk = sl[k], tl[k]
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # pop b when it lies strictly below the chord a -> k
            if (sl[b] - sl[a]) * (yk - tl[b]) > (tl[b] - tl[a]) * (xk - sl[b]):
                hull.pop()
            else:
                break
        j = hull[-1]
        stop[k] = (yk - tl[j]) / (xk - sl[j])
        target[k] = j
        hull.append(k)
    d = Diagram(t, 0.0 - s, np.array(stop), np.array(target), np.asarray(order), m)
    if strict and d.has_ties:
        raise TieError("coinciding stop times")
    return d


@dataclass(frozen=True)
class UribeCoalescent:
    """Events (s_k, target line, absorbed line) sorted by time."""

    n: int
    order: np.ndarray
    masses: np.ndarray
    events: tuple[tuple[float, int, int], ...]
    merges: tuple[MergeEvent, ...]

    def classes_at(self, s: float) -> list[list[int]]:
        """T_i(s) per line i (block indices), empty for stopped lines."""
        cls = [[int(self.order[i])] for i in range(self.n)]
        for time, tgt, k in self.events:
            if time > s:
                break
            cls[tgt].extend(cls[k])
            cls[k] = []
        return cls

    def partition_at(self, s: float) -> Partition:
        return Partition(tuple(tuple(c) for c in self.classes_at(s) if c))

    def line_masses_at(self, s: float) -> np.ndarray:
        """M_i(s) per line, zero for stopped lines."""
        m = self.masses.astype(float).copy()
        for time, tgt, k in self.events:
            if time > s:
                break
            m[tgt] += m[k]
            m[k] = 0.0
        return m

    @property
    def connectivity_time(self) -> float:
        return self.events[-1][0] if self.events else 0.0


def _dynamic_events(d: Diagram) -> list[tuple[float, int, int]]:
    """Adjacent-active-lines rule: an active line stops when it meets the
    nearest active line below it, which then carries on."""
    n = len(d)
    t, s = d.intercepts, -d.slopes
    below = list(range(-1, n - 1))
    above = list(range(1, n + 1))
    alive = [True] * n
    out = []
    pending = {k: (t[k] - t[k - 1]) / (s[k] - s[k - 1]) for k in range(1, n)}
    while pending:
        k = min(pending, key=lambda j: (pending[j], j))
        time = pending.pop(k)
        j = below[k]
        out.append((float(time), j, k))
        alive[k] = False
        up = above[k]
        above[j] = up
        if up < n:
            below[up] = j
            pending[up] = (t[up] - t[j]) / (s[up] - s[j])
    return out


def run_coalescent(d: Diagram) -> UribeCoalescent:
    """Process the static events (s_k, l_k, k) in time order.

    Each target line must still be active when it receives a class; if that
    ever failed the adjacent-lines rule is used instead and a warning is
    emitted.
    """
    n = len(d)
    evs = sorted(((float(d.stop_times[k]), int(d.targets[k]), k) for k in range(1, n)),
                 key=lambda e: (e[0], e[2]))
    stopped = np.zeros(n, dtype=bool)
    consistent = True
    for time, tgt, k in evs:
        if stopped[tgt] and d.stop_times[tgt] < time:
            consistent = False
            break
        stopped[k] = True
    if not consistent:
        warnings.warn("static stop times disagree with the active-line rule; using the latter",
                      RuntimeWarning)
        evs = _dynamic_events(d)
    cls = [[int(d.order[i])] for i in range(n)]
    merges = []
    for time, tgt, k in evs:
        left, right = sorted((tuple(sorted(cls[tgt])), tuple(sorted(cls[k]))))
        merges.append(MergeEvent(time, left, right))
        cls[tgt].extend(cls[k])
        cls[k] = []
    return UribeCoalescent(n, np.asarray(d.order), np.asarray(d.masses), tuple(evs), tuple(merges))


def mass_process(uc: UribeCoalescent, s: float) -> OrderedLengths:
    if s < 0:
        raise ValueError("s must be nonnegative")
    return OrderedLengths.from_values(uc.line_masses_at(s))


def sample_coalescent(x: MassVector, rng: np.random.Generator) -> tuple[ClockFamily, UribeCoalescent]:
    """Draw clocks and run the coalescent, redrawing clocks on stop-time ties."""
    while True:
        clocks = ClockFamily(clock_matrix(x, 1, rng)[0])
        try:
            d = build_diagram(x, clocks, strict=True)
        except TieError:
            continue
        return clocks, run_coalescent(d)


def sample_coalescents(x: MassVector, count: int, rng: np.random.Generator):
    """Yield ``count`` independent (clocks, coalescent) pairs, drawing clocks in one batch."""
    for row in clock_matrix(x, count, rng):
        while True:
            clocks = ClockFamily(row)
            try:
                d = build_diagram(x, clocks, strict=True)
            except TieError:
                row = clock_matrix(x, 1, rng)[0]
                continue
            yield clocks, run_coalescent(d)
            break


def pair_rate(x: MassVector) -> float:
    """Sum over pairs i < j of x_i * x_j."""
    m = x.masses
    return 0.5 * (math.fsum(m) ** 2 - math.fsum(m * m))


def check_S_pi_independence(x: MassVector, samples: int, seed: int, alpha: float = 0.001,
                            bins: int = 5, on_run=None) -> dict:
    """First merge time S versus the clock order pi.

    Returns three reports: chi-square independence of (pi, binned S), KS of
    S against Exp(sum_{i<j} x_i x_j), and chi-square of pi against the
    sequential size-biased law.  ``on_run`` is called with every sampled
    coalescent.
    """
    from . import stats

    if len(x) < 2:
        raise ValueError("need at least two blocks")
    rng = stream_rng(seed, "uribe-S-pi")
    first = np.empty(samples)
    perms = []
    for r in range(samples):
        clocks, uc = sample_coalescent(x, rng)
        first[r] = uc.events[0][0]
        if on_run is not None:
            on_run(uc)
        perms.append(tuple(int(i) for i in clocks.order))
    rate = pair_rate(x)
    edges = -np.log1p(-np.linspace(0, 1, bins + 1)[1:-1]) / rate
    sbin = np.searchsorted(edges, first)
    return {
        "independence": stats.chi2_independence(perms, sbin, name="S-pi independence", alpha=alpha),
        "S_exponential": stats.ks_one_sample(first, "expon", args=(0, 1 / rate),
                                             name="S ~ Exp(pair rate)", alpha=alpha),
        "pi_size_biased": stats.chi2_goodness(perms, size_biased_law(x),
                                              name="pi size-biased", alpha=alpha),
    }


def size_biased_law(x: MassVector) -> dict[tuple[int, ...], float]:
    """Exact probability of each permutation under sequential size-biased picking."""
    from itertools import permutations

    m = x.masses
    total = math.fsum(m)
    out = {}
    for p in permutations(range(len(x))):
        prob, left = 1.0, total
        for i in p:
            prob *= m[i] / left
            left -= m[i]
        out[p] = prob
    return out
