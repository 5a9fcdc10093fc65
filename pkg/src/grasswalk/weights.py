"""Dominant even weights, the signed-permutation group action, and orbit sums.

The state space everywhere in this package is the semi-lattice of weakly
decreasing vectors of non-negative even integers of a fixed rank ``q``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import NegativeEntry, NotDecreasing, NotInChamber, OddEntry, RankMismatch

__all__ = [
    "Weight",
    "ChamberPoint",
    "make_weight",
    "dominance_leq",
    "weyl_orbit",
    "orbit_sum_eval",
    "weights_below",
    "enumerate_weights",
]


@dataclass(frozen=True, order=True)
class Weight:
    """A dominant even weight: weakly decreasing non-negative even integers."""

    parts: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.parts)

    @property
    def first(self) -> int:
        return self.parts[0]

    @property
    def total(self) -> int:
        return sum(self.parts)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.parts)

    def add(self, other: "Weight") -> "Weight":
        if other.rank != self.rank:
            raise RankMismatch(f"rank {self.rank} vs {other.rank}")
        return Weight(tuple(a + b for a, b in zip(self.parts, other.parts)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.parts, dtype=np.float64)

    def to_text(self) -> str:
        """Serialize as comma-joined integers, e.g. ``"4,2,0"``."""
        return ",".join(str(e) for e in self.parts)

    @classmethod
    def from_text(cls, text: str, q: int | None = None) -> "Weight":
        parts = [int(tok) for tok in text.split(",")]
        return make_weight(parts, q=q)

    def __str__(self) -> str:
        return self.to_text()


def make_weight(parts: Iterable[int], q: int | None = None) -> Weight:
    """Validate membership in the even dominant cone and build a Weight."""
    tup = tuple(int(e) for e in parts)
    if q is not None and len(tup) != q:
        raise RankMismatch(f"expected rank {q}, got {len(tup)}")
    for e in tup:
        if e < 0:
            raise NegativeEntry(f"entry {e} < 0")
        if e % 2:
            raise OddEntry(f"entry {e} is odd")
    if any(a < b for a, b in zip(tup, tup[1:])):
        raise NotDecreasing(f"entries {tup} not weakly decreasing")
    return Weight(tup)


def dominance_leq(mu: Weight, lam: Weight) -> bool:
    """Partial order by prefix sums: mu <= lam iff every prefix sum is <=."""
    if mu.rank != lam.rank:
        raise RankMismatch(f"rank {mu.rank} vs {lam.rank}")
    acc_m = acc_l = 0
    for a, b in zip(mu.parts, lam.parts):
        acc_m += a
        acc_l += b
        if acc_m > acc_l:
            return False
    return True


@lru_cache(maxsize=65536)
def _orbit_tuples(parts: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    q = len(parts)
    seen = set()
    for signs in itertools.product((1, -1), repeat=q):
        flipped = tuple(s * e for s, e in zip(signs, parts))
        for perm in itertools.permutations(flipped):
            seen.add(perm)
    return tuple(sorted(seen))


@lru_cache(maxsize=65536)
def _orbit_array(parts: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(_orbit_tuples(parts), dtype=np.float64)
    arr.setflags(write=False)
    return arr


def weyl_orbit(lam: Weight) -> set[tuple[int, ...]]:
    """Full orbit of the weight under coordinate permutations and sign flips."""
    return set(_orbit_tuples(lam.parts))


def orbit_stabilizer_order(lam: Weight) -> int:
    """Order of the stabilizer; satisfies |orbit| * |stabilizer| = 2^q q!."""
    q = lam.rank
    return (2**q * factorial(q)) // len(_orbit_tuples(lam.parts))


def orbit_sum_eval(lam: Weight, x) -> float:
    """Normalized orbit sum: mean of cos(<mu, x>) over the orbit of lam.

    The sine parts cancel pairwise because the orbit is closed under global
    sign flips, so the value is real with modulus at most 1.
    """
    vecs = _orbit_array(lam.parts)
    coords = np.asarray(getattr(x, "coords", x), dtype=np.float64)
    return float(np.cos(vecs @ coords).mean())


def _even_decreasing(q: int, max_first: int):
    """Yield all even weakly decreasing q-tuples with first entry <= max_first."""
    def rec(prefix: tuple[int, ...], bound: int):
        if len(prefix) == q:
            yield prefix
            return
        for e in range(bound, -1, -2):
            yield from rec(prefix + (e,), e)

    yield from rec((), max_first)


def _total_order_key(parts: tuple[int, ...]):
    return (sum(parts), parts)


def enumerate_weights(q: int, max_first: int) -> list[Weight]:
    """All dominant even weights with first entry <= max_first.

    Sorted by total sum, ties broken lexicographically; this is a linear
    extension of dominance order and is the basis order used everywhere.
    """
    if max_first < 0 or max_first % 2:
        raise ValueError(f"max_first must be even and >= 0, got {max_first}")
    tuples = sorted(_even_decreasing(q, max_first), key=_total_order_key)
    return [Weight(t) for t in tuples]


def weights_below(lam: Weight) -> list[Weight]:
    """All weights dominated by lam, in the global total order; lam is last."""
    out = [mu for mu in enumerate_weights(lam.rank, lam.first) if dominance_leq(mu, lam)]
    return out


@dataclass(frozen=True)
class ChamberPoint:
    """A point with weakly decreasing non-negative coordinates.

    The alcove form additionally requires the first coordinate to stay
    below pi/2.
    """

    coords: tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64)

    @classmethod
    def chamber(cls, coords: Sequence[float]) -> "ChamberPoint":
        tup = tuple(float(c) for c in coords)
        if any(c < 0 for c in tup) or any(a < b for a, b in zip(tup, tup[1:])):
            raise NotInChamber(f"coordinates {tup} not decreasing and non-negative")
        return cls(tup)

    @classmethod
    def alcove(cls, coords: Sequence[float]) -> "ChamberPoint":
        pt = cls.chamber(coords)
        if pt.coords and pt.coords[0] > np.pi / 2 + 1e-12:
            raise NotInChamber(f"first coordinate {pt.coords[0]} exceeds pi/2")
        return pt


def as_vector(x, q: int | None = None) -> np.ndarray:
    """Coerce a ChamberPoint or sequence to a float vector, checking rank."""
    vec = np.asarray(getattr(x, "coords", x), dtype=np.float64).ravel()
    if q is not None and vec.shape[0] != q:
        raise RankMismatch(f"expected {q} coordinates, got {vec.shape[0]}")
    return vec
