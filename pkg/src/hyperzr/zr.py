"""Arithmetic over Z_r, strings in Z_r^n and partial hypermatchings.

Vertices are 0-indexed throughout. A hypermatching is stored in canonical
form (vertices sorted inside each edge, edges sorted by their smallest
vertex) so that equality of matchings is plain tuple equality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

SeedLike = int | np.random.Generator | np.random.SeedSequence | Sequence[int] | None

DEFAULT_ENUMERATION_CAP = 10**6


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Return a numpy Generator, reusing one if it is passed in."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ZrString:
    """An element of Z_r^n."""

    r: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError(f"modulus must be at least 2, got r={self.r}")
        entries = tuple(int(e) for e in self.entries)
        for e in entries:
            if not 0 <= e < self.r:
                raise ValueError(f"entry {e} outside Z_{self.r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, r: int, entries: Iterable[int]) -> ZrString:
        return cls(r, tuple(int(e) for e in entries))

    @classmethod
    def zeros(cls, r: int, n: int) -> ZrString:
        return cls(r, (0,) * n)

    @classmethod
    def random(cls, r: int, n: int, seed: SeedLike = None) -> ZrString:
        rng = as_generator(seed)
        return cls(r, tuple(int(v) for v in rng.integers(0, r, size=n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def _check_compatible(self, other: ZrString) -> None:
        if self.r != other.r or self.n != other.n:
            raise ValueError(
                f"incompatible strings: (r={self.r}, n={self.n}) vs (r={other.r}, n={other.n})"
            )

    def __add__(self, other: ZrString) -> ZrString:
        self._check_compatible(other)
        return ZrString(self.r, tuple((a + b) % self.r for a, b in zip(self, other)))

    def __sub__(self, other: ZrString) -> ZrString:
        self._check_compatible(other)
        return ZrString(self.r, tuple((a - b) % self.r for a, b in zip(self, other)))

    def __neg__(self) -> ZrString:
        return ZrString(self.r, tuple((-a) % self.r for a in self))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.int64)

    def index(self) -> int:
        """Mixed-radix position of the string, first coordinate most significant."""
        return string_index(self.entries, self.r)

    def __str__(self) -> str:
        sep = "" if self.r <= 10 else ","
        return sep.join(str(e) for e in self.entries)


def hamming_weight(s: ZrString) -> int:
    """Number of nonzero entries of ``s``."""
    return sum(1 for e in s.entries if e != 0)


def zr_dot(s: ZrString, x: ZrString) -> int:
    """The pairing S.x = sum S_i x_i mod r."""
    s._check_compatible(x)
    return sum(a * b for a, b in zip(s.entries, x.entries)) % s.r


def string_index(entries: Sequence[int], r: int) -> int:
    idx = 0
    for e in entries:
        idx = idx * r + int(e)
    return idx


def all_strings(r: int, n: int) -> np.ndarray:
    """All of Z_r^n as an (r^n, n) integer array in mixed-radix order.

    Row ``k`` is the string whose :func:`string_index` is ``k``.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((r,) * n, dtype=np.int64)
    return grids.reshape(n, -1).T.copy()


def iter_strings(r: int, n: int) -> Iterator[ZrString]:
    for entries in itertools.product(range(r), repeat=n):
        yield ZrString(r, entries)


def root_powers(r: int) -> np.ndarray:
    """omega_r^k for k = 0..r-1, each from its exact angle 2 pi k / r."""
    k = np.arange(r)
    return np.exp(2j * np.pi * k / r)


def edge_count(n: int, t: int, alpha: float | Fraction) -> int:
    """Number of hyperedges alpha*n/t, validating divisibility."""
    if t < 1 or n < 1:
        raise ValueError(f"need n >= 1 and t >= 1, got n={n}, t={t}")
    if n % t != 0:
        raise ValueError(f"t={t} must divide n={n}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    value = Fraction(alpha).limit_denominator(10**6) * n / t
    if value.denominator != 1:
        raise ValueError(f"alpha*n/t = {float(value)} is not an integer (alpha={alpha}, n={n}, t={t})")
    return int(value)


@dataclass(frozen=True)
class Hypermatching:
    """An alpha-partial t-hypermatching on vertices {0, ..., n-1}."""

    n: int
    t: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        edges = tuple(tuple(sorted(int(v) for v in e)) for e in self.edges)
        edges = tuple(sorted(edges, key=lambda e: e[0] if e else -1))
        seen: set[int] = set()
        for e in edges:
            if len(e) != self.t:
                raise ValueError(f"edge {e} does not have {self.t} vertices")
            for v in e:
                if not 0 <= v < self.n:
                    raise ValueError(f"vertex {v} outside [0, {self.n})")
                if v in seen:
                    raise ValueError(f"vertex {v} used twice")
                seen.add(v)
        if not edges:
            raise ValueError("a hypermatching needs at least one edge")
        if self.n % self.t != 0:
            raise ValueError(f"t={self.t} must divide n={self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def alpha(self) -> Fraction:
        return Fraction(len(self.edges) * self.t, self.n)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def matched_vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def incidence(self) -> np.ndarray:
        """The (alpha n / t) x n 0/1 incidence matrix."""
        mat = np.zeros((len(self.edges), self.n), dtype=np.int64)
        for i, e in enumerate(self.edges):
            mat[i, list(e)] = 1
        return mat


def apply_matching(M: Hypermatching, x: ZrString) -> ZrString:
    """Per-edge sums of ``x`` modulo r."""
    if x.n != M.n:
        raise ValueError(f"string length {x.n} does not match matching size {M.n}")
    return ZrString(x.r, tuple(sum(x.entries[v] for v in e) % x.r for e in M.edges))


def apply_matching_batch(M: Hypermatching, xs: np.ndarray, r: int) -> np.ndarray:
    """Vectorized Mx for every row of ``xs``."""
    return (np.asarray(xs) @ M.incidence().T) % r


def sample_hypermatching(n: int, t: int, alpha: float | Fraction, seed: SeedLike = None) -> Hypermatching:
    """Uniform element of M^alpha_{t,n}: cut a random permutation into t-blocks."""
    k = edge_count(n, t, alpha)
    perm = as_generator(seed).permutation(n)
    return Hypermatching(n, t, tuple(tuple(int(v) for v in perm[i * t:(i + 1) * t]) for i in range(k)))


def count_hypermatchings(n: int, t: int, alpha: float | Fraction) -> int:
    """|M^alpha_{t,n}| = n! / ((t!)^k k! (n - kt)!) with k = alpha n / t."""
    k = edge_count(n, t, alpha)
    num = math.factorial(n)
    den = math.factorial(t) ** k * math.factorial(k) * math.factorial(n - k * t)
    return num // den


def enumerate_hypermatchings(
    n: int, t: int, alpha: float | Fraction, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[Hypermatching]:
    """Every element of M^alpha_{t,n}, canonical and in lexicographic order."""
    k = edge_count(n, t, alpha)
    total = count_hypermatchings(n, t, alpha)
    if total > cap:
        raise ValueError(f"{total} hypermatchings for (n={n}, t={t}, alpha={alpha}) exceeds cap {cap}")
    unmatched_budget = n - k * t
    out: list[Hypermatching] = []

    def extend(remaining: tuple[int, ...], edges: list[tuple[int, ...]], skips: int) -> None:
        if len(edges) == k:
            out.append(Hypermatching(n, t, tuple(edges)))
            return
        if len(remaining) < (k - len(edges)) * t:
            return
        v, rest = remaining[0], remaining[1:]
        # The smallest free vertex either opens an edge or stays unmatched.
        for partners in itertools.combinations(rest, t - 1):
            left = tuple(u for u in rest if u not in partners)
            edges.append((v, *partners))
            extend(left, edges, skips)
            edges.pop()
        if skips < unmatched_budget:
            extend(rest, edges, skips + 1)

    extend(tuple(range(n)), [], 0)
    out.sort(key=lambda m: m.edges)
    return out
