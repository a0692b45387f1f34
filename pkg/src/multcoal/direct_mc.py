"""Event-driven simulation of the multiplicative coalescent (pair rate x*y)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import MassVector, Partition, stream_rng

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MergeEvent:
    time: float
    left: tuple[int, ...]
    right: tuple[int, ...]


@dataclass(frozen=True)
class PartitionTrajectory:
    initial: Partition
    events: tuple[MergeEvent, ...]

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": SCHEMA_VERSION,
            "initial": self.initial.to_one_based(),
            "events": [{"t": e.time,
                        "left": [i + 1 for i in e.left],
                        "right": [i + 1 for i in e.right]} for e in self.events],
        })

    @classmethod
    def from_json(cls, text: str) -> "PartitionTrajectory":
        d = json.loads(text)
        events = tuple(MergeEvent(float(e["t"]),
                                  tuple(i - 1 for i in e["left"]),
                                  tuple(i - 1 for i in e["right"])) for e in d["events"])
        return cls(Partition.from_one_based(d["initial"]), events)


class _Fenwick:
    """Prefix sums over block masses, for O(log n) mass-proportional picks."""

    def __init__(self, weights):
        self.n = len(weights)
        self.tree = [0.0] * (self.n + 1)
        for i, w in enumerate(weights):
            self.add(i, w)
        self.top = 1 << self.n.bit_length()

    def add(self, i: int, delta: float) -> None:
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def find(self, u: float) -> int:
        """Smallest index whose prefix sum exceeds ``u``."""
        pos, step = 0, self.top
        while step:
            nxt = pos + step
            if nxt <= self.n and self.tree[nxt] <= u:
                pos = nxt
                u -= self.tree[nxt]
            step >>= 1
        return min(pos, self.n - 1)


def simulate_direct(x: MassVector, horizon: float, seed: int | None = None, stream: int = 0,
                    rng: np.random.Generator | None = None) -> PartitionTrajectory:
    """Gillespie simulation up to ``horizon``; events after the horizon are discarded.

    The total rate (sigma1^2 - sigma2)/2 is updated in O(1) per merge and the
    merging pair is drawn by picking two blocks proportionally to mass and
    rejecting self-pairs, which yields P(a, b) proportional to m_a * m_b.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if rng is None:
        rng = stream_rng(0 if seed is None else seed, "direct", stream)
    n = len(x)
    mass = [float(v) for v in x.masses]
    members: list[list[int] | None] = [[i] for i in range(n)]
    s1 = math.fsum(mass)
    s2 = math.fsum(m * m for m in mass)
    tree = _Fenwick(mass)
    t = 0.0
    events: list[MergeEvent] = []
    blocks = n
    while blocks > 1:
        rate = 0.5 * (s1 * s1 - s2)
        if rate <= 0:
            break
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        while True:
            a = tree.find(rng.random() * s1)
            b = tree.find(rng.random() * s1)
            if a != b and members[a] is not None and members[b] is not None:
                break
        left, right = sorted((tuple(sorted(members[a])), tuple(sorted(members[b]))))
        events.append(MergeEvent(t, left, right))
        members[a] = members[a] + members[b]
        members[b] = None
        s2 += 2.0 * mass[a] * mass[b]
        tree.add(a, mass[b])
        tree.add(b, -mass[b])
        mass[a] += mass[b]
        mass[b] = 0.0
        blocks -= 1
    return PartitionTrajectory(Partition.trivial(n), tuple(events))


def partition_at(traj: PartitionTrajectory, q: float) -> Partition:
    """Partition after applying every event with time <= q."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    label = list(traj.initial.labels())
    for ev in traj.events:
        if ev.time > q:
            break
        keep, drop = label[ev.left[0]], label[ev.right[0]]
        label = [keep if v == drop else v for v in label]
    return Partition.from_labels(label)
