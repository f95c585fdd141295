"""Finite distributions as dictionaries, with the summed total variation distance.

Throughout the package ``tvd(P, Q) = sum_i |P(i) - Q(i)|`` (no factor 1/2),
so the best single-sample distinguishing advantage is ``tvd / 4``.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, TypeVar

K = TypeVar("K", bound=Hashable)
Number = float | Fraction


def tvd(P: Mapping[K, Number], Q: Mapping[K, Number]) -> Number:
    keys = set(P) | set(Q)
    return sum((abs(P.get(k, 0) - Q.get(k, 0)) for k in keys), 0)


def normalize(counts: Mapping[K, Number]) -> dict[K, Number]:
    total = sum(counts.values())
    if not total:
        raise ValueError("cannot normalize an empty distribution")
    if all(isinstance(v, int) for v in counts.values()):
        return {k: Fraction(v, total) for k, v in counts.items()}
    return {k: v / total for k, v in counts.items()}


def empirical(samples: Iterable[K]) -> dict[K, float]:
    counts = Counter(samples)
    total = sum(counts.values())
    return {k: c / total for k, c in counts.items()}


def pushforward(
    X: Mapping[K, Number], W: Mapping[Hashable, Number], f: Callable[[K, Hashable], Hashable]
) -> dict[Hashable, Number]:
    """Exact law of f(X, W) for independent X and W."""
    out: dict[Hashable, Number] = {}
    for x, px in X.items():
        for w, pw in W.items():
            key = f(x, w)
            out[key] = out.get(key, 0) + px * pw
    return out


def mixture(parts: Iterable[tuple[Number, Mapping[K, Number]]]) -> dict[K, Number]:
    out: dict[K, Number] = {}
    for weight, dist in parts:
        for k, v in dist.items():
            out[k] = out.get(k, 0) + weight * v
    return out
