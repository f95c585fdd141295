"""Matrix-valued functions on Z_r^n, their Fourier transform and Schatten norms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .zr import SeedLike, ZrString, all_strings, as_generator, root_powers, string_index

TABLE_BUDGET = 10**8


def _check_budget(r: int, n: int, m: int) -> None:
    if r**n * m * m > TABLE_BUDGET:
        raise ValueError(f"table of size r^n*m^2 = {r**n * m * m} exceeds budget {TABLE_BUDGET} (r={r}, n={n}, m={m})")


@dataclass
class MatrixFunction:
    """A tabulated f: Z_r^n -> C^{m x m}.

    ``table[k]`` is f at the string with mixed-radix index ``k`` (first
    coordinate most significant), so ``table`` has shape (r^n, m, m).
    """

    r: int
    n: int
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.complex128)
        if table.ndim == 1:
            table = table.reshape(-1, 1, 1)
        if table.ndim != 3 or table.shape[1] != table.shape[2]:
            raise ValueError(f"table must have shape (r^n, m, m), got {table.shape}")
        if table.shape[0] != self.r**self.n:
            raise ValueError(f"incomplete table: {table.shape[0]} entries, expected r^n = {self.r**self.n}")
        _check_budget(self.r, self.n, table.shape[1])
        self.table = table

    @property
    def m(self) -> int:
        return self.table.shape[1]

    def __call__(self, x: ZrString | tuple[int, ...]) -> np.ndarray:
        entries = x.entries if isinstance(x, ZrString) else x
        return self.table[string_index(entries, self.r)]

    @classmethod
    def from_callable(cls, r: int, n: int, func: Callable[[ZrString], np.ndarray]) -> MatrixFunction:
        rows = [np.atleast_2d(np.asarray(func(ZrString(r, tuple(x))), dtype=np.complex128)) for x in all_strings(r, n)]
        return cls(r, n, np.stack(rows))

    @classmethod
    def scalar(cls, r: int, n: int, values: np.ndarray) -> MatrixFunction:
        """Wrap a scalar function (flat array of length r^n) as 1x1 matrices."""
        return cls(r, n, np.asarray(values, dtype=np.complex128).reshape(-1, 1, 1))

    def to_json(self) -> str:
        entries = [
            {"x": [int(v) for v in x], "re": self.table[k].real.tolist(), "im": self.table[k].imag.tolist()}
            for k, x in enumerate(all_strings(self.r, self.n))
        ]
        return json.dumps({"r": self.r, "n": self.n, "m": self.m, "entries": entries})

    @classmethod
    def from_json(cls, text: str) -> MatrixFunction:
        data = json.loads(text)
        r, n, m = data["r"], data["n"], data["m"]
        table = np.full((r**n, m, m), np.nan, dtype=np.complex128)
        for entry in data["entries"]:
            table[string_index(entry["x"], r)] = np.asarray(entry["re"]) + 1j * np.asarray(entry["im"])
        if np.isnan(table).any():
            raise ValueError("incomplete table in serialized matrix function")
        return cls(r, n, table)


@dataclass
class FourierTable:
    """Fourier coefficients; ``table[k]`` is the coefficient at the string with index k."""

    r: int
    n: int
    table: np.ndarray

    @property
    def m(self) -> int:
        return self.table.shape[1]

    def __call__(self, S: ZrString | tuple[int, ...]) -> np.ndarray:
        entries = S.entries if isinstance(S, ZrString) else S
        return self.table[string_index(entries, self.r)]


def character_matrix(r: int, sign: int) -> np.ndarray:
    """W[a, b] = omega_r^(sign * a * b), built from the exact root table."""
    powers = root_powers(r)
    a = np.arange(r)
    return powers[(sign * np.outer(a, a)) % r]


def _transform(table: np.ndarray, r: int, n: int, sign: int) -> np.ndarray:
    # The character sum factorizes over coordinates, so apply the r x r
    # character matrix along each of the n axes in turn.
    m = table.shape[1]
    out = table.reshape((r,) * n + (m, m))
    W = character_matrix(r, sign)
    for axis in range(n):
        out = np.moveaxis(np.tensordot(W, out, axes=([1], [axis])), 0, axis)
    return out.reshape(r**n, m, m)


def fourier_transform(f: MatrixFunction) -> FourierTable:
    """f_hat(S) = r^-n sum_x f(x) omega^(-S.x)."""
    coeffs = _transform(f.table, f.r, f.n, -1) / f.r**f.n
    return FourierTable(f.r, f.n, coeffs)


def inverse_fourier(F: FourierTable) -> MatrixFunction:
    """f(x) = sum_S f_hat(S) omega^(S.x)."""
    return MatrixFunction(F.r, F.n, _transform(np.asarray(F.table, dtype=np.complex128), F.r, F.n, +1))


def singular_values(M: np.ndarray) -> np.ndarray:
    """Singular values of a matrix or a stack of matrices (last two axes)."""
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.svd(M, compute_uv=False)


def schatten_norm(M: np.ndarray, p: float, normalized: bool = False) -> float | np.ndarray:
    """Schatten p-norm (sum sigma_i^p)^(1/p), optionally divided by m^(1/p).

    Accepts a stack of square matrices and then returns one norm per matrix.
    ``p = inf`` gives the operator norm.
    """
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got p={p}")
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {M.shape}")
    sv = singular_values(M)
    m = M.shape[-1]
    if np.isinf(p):
        out = sv.max(axis=-1)
    else:
        out = np.sum(sv**p, axis=-1) ** (1.0 / p)
        if normalized:
            out = out / m ** (1.0 / p)
    return float(out) if np.ndim(out) == 0 else out


def random_density_matrix(m: int, seed: SeedLike = None) -> np.ndarray:
    """A random m x m state GG^dagger / Tr(GG^dagger) with complex Gaussian G."""
    if m < 1:
        raise ValueError(f"side must be positive, got m={m}")
    rng = as_generator(seed)
    G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_matrix(m: int, seed: SeedLike = None) -> np.ndarray:
    rng = as_generator(seed)
    return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))


def random_unitary(m: int, seed: SeedLike = None) -> np.ndarray:
    """Haar unitary via QR with the phase correction on R's diagonal."""
    Q, R = np.linalg.qr(random_matrix(m, seed))
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def helstrom_success(rho0: np.ndarray, rho1: np.ndarray, prior: float = 0.5) -> float:
    """Best probability of telling rho0 (prior) from rho1: 1/2 + ||prior rho0 - (1-prior) rho1||_1 / 2."""
    return 0.5 + 0.5 * schatten_norm(prior * np.asarray(rho0) - (1 - prior) * np.asarray(rho1), 1)
