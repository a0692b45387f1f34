"""Shared domain types, seeded random streams and mass-vector statistics.

Block indices are 0-based everywhere inside the package; the JSON/CSV
boundary converts to the 1-based labels used in the literature.
"""
from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DegenerateRateError(ValueError):
    """A block mass is zero or negative, so its clock has no valid rate."""


# --------------------------------------------------------------------------
# randomness contract
# --------------------------------------------------------------------------

def _tag_key(tag: str | int) -> int:
    if isinstance(tag, int):
        return tag
    return zlib.crc32(tag.encode())


def stream_rng(seed: int, *keys: str | int) -> np.random.Generator:
    """Independent deterministic substream for ``(seed, *keys)``.

    Keys may be ints (stream ids, chunk ids) or short string tags naming the
    consumer, e.g. ``stream_rng(1, "direct", 3)``.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_tag_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MassVector:
    """Finite non-increasing vector of positive block masses."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).copy()
        if m.ndim != 1 or m.size == 0:
            raise ValueError("mass vector must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite")
        if np.any(m <= 0):
            raise DegenerateRateError("masses must be strictly positive")
        if np.any(np.diff(m) > 0):
            raise ValueError("masses must be non-increasing")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @classmethod
    def sorted(cls, values: Iterable[float]) -> "MassVector":
        return cls(np.sort(np.asarray(list(values), dtype=float))[::-1])

    def __len__(self) -> int:
        return self.masses.size

    @property
    def total(self) -> float:
        return math.fsum(self.masses)

    def to_json(self) -> str:
        return json.dumps([float(v) for v in self.masses])

    @classmethod
    def from_json(cls, text: str) -> "MassVector":
        return cls(json.loads(text))


@dataclass(frozen=True)
class MomentStats:
    sigma1: float
    sigma2: float
    sigma3: float


def moments(x: MassVector) -> MomentStats:
    """sigma_r = sum of r-th powers of the masses, r = 1, 2, 3 (exactly rounded)."""
    m = x.masses
    return MomentStats(math.fsum(m), math.fsum(m * m), math.fsum(m * m * m))


@dataclass(frozen=True)
class ClockFamily:
    """Exponential clocks, one per block, and the order in which they ring.

    ``order[i]`` is the block whose clock is the i-th smallest, so
    ``xi[order]`` is increasing and ``order`` is a size-biased permutation.
    """

    xi: np.ndarray
    order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        # min > 0 also rejects NaN
        if xi.ndim != 1 or xi.size == 0 or not (xi.min() > 0 and xi.max() < math.inf):
            raise ValueError("clocks must be positive finite reals")
        order = xi.argsort(kind="stable")
        sx = xi[order]
        if (sx[1:] == sx[:-1]).any():
            raise ValueError("clock values must be distinct")
        xi.setflags(write=False)
        order.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return self.xi.size

    @property
    def sorted_xi(self) -> np.ndarray:
        return self.xi[self.order]


def _check_rates(x: MassVector | Sequence[float]) -> np.ndarray:
    m = x.masses if isinstance(x, MassVector) else np.asarray(x, dtype=float)
    if np.any(m <= 0):
        raise DegenerateRateError("every clock rate must be positive")
    return m


def clock_matrix(x: MassVector | Sequence[float], size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent rows of Exp(x_i) clocks; tied rows are redrawn in place."""
    m = _check_rates(x)
    xi = rng.exponential(1.0 / m, size=(size, m.size))
    if m.size > 1:
        while True:
            s = np.sort(xi, axis=1)
            bad = np.any(np.diff(s, axis=1) == 0, axis=1)
            if not bad.any():
                break
            # only the tied entries of a bad row are redrawn
            for r in np.flatnonzero(bad):
                vals, counts = np.unique(xi[r], return_counts=True)
                tied = np.isin(xi[r], vals[counts > 1])
                xi[r, tied] = rng.exponential(1.0 / m[tied])
    return xi


def draw_clocks(x: MassVector, seed: int, stream: int = 0) -> ClockFamily:
    """Clocks xi_i ~ Exp(x_i), a pure function of ``(x, seed, stream)``."""
    return ClockFamily(clock_matrix(x, 1, stream_rng(seed, "clocks", stream))[0])


@dataclass(frozen=True)
class Partition:
    """Set partition of {0..n-1} in canonical form.

    Blocks are sorted tuples, ordered by their smallest element, so equality
    of partitions is plain tuple equality.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        canon = tuple(sorted((tuple(sorted(int(i) for i in b)) for b in self.blocks if len(b)),
                             key=lambda b: b[0]))
        flat = [i for b in canon for i in b]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("blocks must be disjoint and cover 0..n-1")
        object.__setattr__(self, "blocks", canon)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(i)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def from_one_based(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        return cls(tuple(tuple(i - 1 for i in b) for b in blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> np.ndarray:
        out = np.empty(self.n, dtype=int)
        for k, b in enumerate(self.blocks):
            out[list(b)] = k
        return out

    def refines(self, other: "Partition") -> bool:
        """True when every block of ``self`` lies inside a block of ``other``."""
        lab = other.labels()
        return all(len({lab[i] for i in b}) == 1 for b in self.blocks)

    def masses(self, x: MassVector) -> "OrderedLengths":
        return OrderedLengths.from_values(math.fsum(x.masses[list(b)]) for b in self.blocks)

    def to_one_based(self) -> list[list[int]]:
        return [[i + 1 for i in b] for b in self.blocks]

    def to_json(self) -> str:
        return json.dumps(self.to_one_based())

    def __str__(self) -> str:
        return "{" + ",".join("{" + ",".join(str(i) for i in b) + "}" for b in self.to_one_based()) + "}"


@dataclass(frozen=True)
class OrderedLengths:
    """Non-increasing positive lengths (implicitly followed by zeros)."""

    lengths: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.lengths, dtype=float).copy()
        if v.size and (np.any(v <= 0) or np.any(np.diff(v) > 0)):
            raise ValueError("lengths must be positive and non-increasing")
        v.setflags(write=False)
        object.__setattr__(self, "lengths", v)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "OrderedLengths":
        v = np.asarray(list(values), dtype=float)
        return cls(np.sort(v[v > 0])[::-1])

    def __len__(self) -> int:
        return self.lengths.size

    @property
    def total(self) -> float:
        return math.fsum(self.lengths)

    @property
    def largest(self) -> float:
        return float(self.lengths[0]) if self.lengths.size else 0.0

    def allclose(self, other: "OrderedLengths | Sequence[float]", rtol: float = 1e-9) -> bool:
        b = other.lengths if isinstance(other, OrderedLengths) else np.asarray(other, dtype=float)
        return self.lengths.shape == b.shape and bool(np.allclose(self.lengths, b, rtol=rtol, atol=0))
