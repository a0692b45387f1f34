"""Simultaneous breadth-first walks.

For clocks xi_i ~ Exp(x_i) and q > 0 the walk

    Z(s) = sum_i x_i * 1{xi_i / q <= s} - s

is explored left to right; each excursion above past minima is one connected
component of the multiplicative coalescent at time q.  The same clocks serve
every q, so the induced partitions are nested in q.
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass

import numpy as np

from .core import ClockFamily, MassVector, OrderedLengths, Partition
from .direct_mc import MergeEvent


@dataclass(frozen=True)
class WalkPath:
    """Unit negative drift plus jumps ``jump_sizes`` at ``jump_times``.

    ``blocks[i]`` is the block index carried by jump i.
    """

    jump_times: np.ndarray
    jump_sizes: np.ndarray
    blocks: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.jump_times) < 0):
            raise ValueError("jump times must be non-decreasing")

    def __len__(self) -> int:
        return self.jump_times.size

    def value(self, s):
        """Right-continuous value Z(s)."""
        s = np.asarray(s, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.jump_sizes)])
        return cum[np.searchsorted(self.jump_times, s, side="right")] - s

    def left_limit(self, s):
        s = np.asarray(s, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.jump_sizes)])
        return cum[np.searchsorted(self.jump_times, s, side="left")] - s


@dataclass(frozen=True)
class Component:
    root: int
    members: tuple[int, ...]  # breadth-first order
    start: float
    end: float

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Exploration:
    components: tuple[Component, ...]
    free_intervals: tuple[tuple[float, float], ...]

    def partition(self) -> Partition:
        return Partition(tuple(c.members for c in self.components))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component_index", "start", "end", "length", "members"])
        for k, c in enumerate(self.components, start=1):
            w.writerow([k, repr(c.start), repr(c.end), repr(c.length),
                        ";".join(str(i + 1) for i in c.members)])
        return buf.getvalue()


def build_walk(x: MassVector, clocks: ClockFamily, q: float) -> WalkPath:
    if not q > 0:
        raise ValueError("q must be positive")
    if len(clocks) != len(x):
        raise ValueError("one clock per block is required")
    order = clocks.order
    with np.errstate(over="ignore"):
        times = clocks.xi[order] / q
    if not np.isfinite(times[-1]):
        raise ValueError("q too small: rescaled clock times overflow")
    return WalkPath(times, x.masses[order], np.asarray(order))


def explore(walk: WalkPath) -> Exploration:
    """Run the exploration recursion as one left-to-right sweep.

    A component opens at the first unheard clock a, listens on (a, b] with
    b = a + explored mass, absorbs every clock ringing in (a, b], and closes
    once the next clock rings after b.
    """
    times, sizes, blocks = walk.jump_times, walk.jump_sizes, walk.blocks
    n = len(walk)
    comps: list[Component] = []
    free: list[tuple[float, float]] = []
    prev_end = 0.0
    i = 0
    while i < n:
        a = float(times[i])
        free.append((prev_end, a))
        b = a + float(sizes[i])
        members = [int(blocks[i])]
        i += 1
        while i < n and times[i] <= b:
            b += float(sizes[i])
            members.append(int(blocks[i]))
            i += 1
        comps.append(Component(members[0], tuple(members), a, b))
        prev_end = b
    return Exploration(tuple(comps), tuple(free))


def excursion_lengths(expl: Exploration) -> OrderedLengths:
    return OrderedLengths.from_values(c.length for c in expl.components)


def partition_at_q(x: MassVector, clocks: ClockFamily, q: float) -> Partition:
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0:
        return Partition.trivial(len(x))
    return explore(build_walk(x, clocks, q)).partition()


def component_labels(sizes: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Component id of each jump, for jumps already sorted by time.

    Equivalent to :func:`explore`: with S the mass explored before jump l,
    jump l opens a new component exactly when t_l - S exceeds every earlier
    value of t_j - S_j.  Vectorised, for Monte Carlo use.
    """
    before = np.concatenate([[0.0], np.cumsum(sizes)[:-1]])
    d = times - before
    record = np.empty(d.size, dtype=bool)
    record[0] = True
    record[1:] = d[1:] > np.maximum.accumulate(d)[:-1]
    return np.cumsum(record) - 1


def component_masses(sizes: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Total mass of each explored component, in exploration order."""
    lab = component_labels(sizes, times)
    return np.bincount(lab, weights=sizes)


def cut_free_intervals(walk: WalkPath, expl: Exploration) -> WalkPath:
    """Drop every load-free interval and the root jump closing it.

    The remaining pieces are concatenated, giving the single-time
    breadth-first walk in which component roots carry no jump.
    """
    times, sizes, blocks = [], [], []
    offset = 0.0
    pos = 0
    for comp in expl.components:
        pos += 1  # root jump
        for _ in comp.members[1:]:
            times.append(offset + (float(walk.jump_times[pos]) - comp.start))
            sizes.append(float(walk.jump_sizes[pos]))
            blocks.append(int(walk.blocks[pos]))
            pos += 1
        offset += comp.length
    return WalkPath(np.array(times), np.array(sizes), np.array(blocks, dtype=int))


def cut_walk_components(cut: WalkPath, root_masses) -> list[tuple[float, float]]:
    """Component intervals of a cut walk.

    A component starting at u0 ends the first time the walk reaches
    ``C(u0) - root_mass``; the path only drifts down between jumps, so the
    hitting time is found segment by segment.
    """
    times, sizes = cut.jump_times, cut.jump_sizes
    out = []
    u0, level, j = 0.0, 0.0, 0
    for r in root_masses:
        target = level - r
        u, val = u0, level
        while True:
            nxt = times[j] if j < len(times) else math.inf
            if val - (nxt - u) <= target:
                u_end = u + (val - target)
                break
            val -= nxt - u
            u = nxt
            val += sizes[j]
            j += 1
        out.append((u0, u_end))
        u0, level = u_end, target
    return out


def merge_events(x: MassVector, clocks: ClockFamily) -> list[MergeEvent]:
    """Merge events of the breadth-first-walk partitions as q grows from 0.

    Components are runs of the clock order.  The run rooted at position r
    joins the run before it (rooted at p) once
    xi_(r) <= xi_(p) + q * (mass explored from p up to r),
    so each adjacent pair of runs has an explicit threshold in q.
    """
    order = clocks.order
    t = clocks.xi[order]
    s = np.concatenate([[0.0], np.cumsum(x.masses[order])])
    n = len(x)
    prev = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    alive = [True] * n
    heap = []

    def push(r: int, p: int) -> None:
        heapq.heappush(heap, ((t[r] - t[p]) / (s[r] - s[p]), r, p))

    for r in range(1, n):
        push(r, r - 1)
    events = []
    while heap:
        qr, r, p = heapq.heappop(heap)
        if not alive[r] or prev[r] != p:
            continue
        end_r = nxt[r]
        left = tuple(sorted(int(i) for i in order[p:r]))
        right = tuple(sorted(int(i) for i in order[r:end_r]))
        left, right = sorted((left, right))
        events.append(MergeEvent(float(qr), left, right))
        alive[r] = False
        nxt[p] = end_r
        if end_r < n:
            prev[end_r] = p
            push(end_r, p)
    return events
