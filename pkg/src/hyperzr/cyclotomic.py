"""Exact arithmetic in Q(omega_r) for sums of the form sum_k c_k omega_r^k.

An element is a length-r list of rational coefficients over the powers
omega^0..omega^(r-1). Two such lists name the same complex number exactly
when their difference is divisible by the r-th cyclotomic polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .zr import root_powers

Coeffs = Sequence[Fraction | int]


def _poly_divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Long division of polynomials stored lowest degree first."""
    num = list(num)
    if len(num) < len(den):
        return [Fraction(0)], num
    quot = [Fraction(0)] * (len(num) - len(den) + 1)
    lead = den[-1]
    for shift in range(len(num) - len(den), -1, -1):
        coef = num[shift + len(den) - 1] / lead
        quot[shift] = coef
        if coef:
            for i, d in enumerate(den):
                num[shift + i] -= coef * d
    rem = num[: len(den) - 1] or [Fraction(0)]
    return quot, rem


@lru_cache(maxsize=None)
def cyclotomic_polynomial(r: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_r, lowest degree first."""
    poly = [Fraction(-1)] + [Fraction(0)] * (r - 1) + [Fraction(1)]
    for d in range(1, r):
        if r % d == 0:
            poly, rem = _poly_divmod(poly, [Fraction(c) for c in cyclotomic_polynomial(d)])
            assert not any(rem)
    return tuple(int(c) for c in poly)


def reduce(coeffs: Coeffs, r: int) -> tuple[Fraction, ...]:
    """Canonical representative modulo Phi_r, padded to degree phi(r) - 1."""
    phi = [Fraction(c) for c in cyclotomic_polynomial(r)]
    _, rem = _poly_divmod([Fraction(c) for c in coeffs], phi)
    rem = list(rem) + [Fraction(0)] * (len(phi) - 1 - len(rem))
    return tuple(rem)


def is_zero(coeffs: Coeffs, r: int) -> bool:
    return not any(reduce(coeffs, r))


def equal(a: Coeffs, b: Coeffs, r: int) -> bool:
    width = max(len(a), len(b))
    diff = [Fraction(a[i] if i < len(a) else 0) - Fraction(b[i] if i < len(b) else 0) for i in range(width)]
    return is_zero(diff, r)


def monomial(k: int, scale: Fraction | int, r: int) -> list[Fraction]:
    """scale * omega^k as a coefficient list."""
    out = [Fraction(0)] * r
    out[k % r] = Fraction(scale)
    return out


def to_complex(coeffs: Coeffs, r: int) -> complex:
    powers = root_powers(r)
    return complex(sum(float(c) * powers[k % r] for k, c in enumerate(coeffs)))


def abs_squared(coeffs: Coeffs, r: int) -> tuple[Fraction, ...]:
    """z * conj(z) as a coefficient list (conjugation sends omega^k to omega^-k)."""
    out = [Fraction(0)] * r
    for a, ca in enumerate(coeffs):
        if not ca:
            continue
        for b, cb in enumerate(coeffs):
            if cb:
                out[(a - b) % r] += Fraction(ca) * Fraction(cb)
    return tuple(out)


def as_array(coeffs: Coeffs) -> np.ndarray:
    return np.array([float(c) for c in coeffs])
