"""Numerical checkers for Schatten-norm convexity and hypercontractive inequalities.

Every checker returns an :class:`InequalityReport` whose ``slack`` is
oriented so that a nonnegative value means the inequality holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .matfourier import MatrixFunction, character_matrix, fourier_transform, schatten_norm
from .zr import SeedLike, all_strings, as_generator

DEFAULT_TOL = 1e-9
ABORT_TOL = 1e-6
ORTHOGONALITY_TOL = 1e-8


@dataclass
class InequalityReport:
    """Both sides of an inequality ``big >= small`` and the margin between them."""

    name: str
    lhs: float
    rhs: float
    slack: float
    params: dict[str, Any]
    tol: float = DEFAULT_TOL
    companions: dict[str, InequalityReport] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.slack >= -self.tol and all(c.holds for c in self.companions.values())

    @property
    def min_slack(self) -> float:
        return min([self.slack, *(c.min_slack for c in self.companions.values())])

    @property
    def hard_failure(self) -> bool:
        """A violation large enough that it cannot be round-off."""
        return self.min_slack < -ABORT_TOL


def _report(name: str, lhs: float, rhs: float, lhs_is_big: bool, params: dict[str, Any], tol: float) -> InequalityReport:
    slack = lhs - rhs if lhs_is_big else rhs - lhs
    return InequalityReport(name, float(lhs), float(rhs), float(slack), params, tol)


def zeta(p: float, r: int) -> float:
    """(p-1)(1-(p-1)^(r-1)) / ((r-1)(2-p)) written as a finite geometric sum."""
    if not 1 <= p <= 2:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    if r < 2:
        raise ValueError(f"r must be at least 2, got {r}")
    q = p - 1.0
    return q * sum(q**j for j in range(r - 1)) / (r - 1)


def _as_stack(A: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"expected a list of equal-sided square matrices, got shape {A.shape}")
    if A.shape[0] < 2:
        raise ValueError("need at least two matrices")
    return A


def _unit_scale(*stacks: np.ndarray) -> float:
    norms = [np.max(np.linalg.norm(s.reshape(s.shape[0], -1), axis=1)) for s in stacks if s.size]
    top = max(norms) if norms else 0.0
    return 1.0 / top if top > 0 else 1.0


def twisted_sums(A: np.ndarray, sign: int = 1) -> np.ndarray:
    """Stack of sum_j omega^(sign*j*k) A_j for k = 0..r-1."""
    W = character_matrix(A.shape[0], sign)
    return np.tensordot(W, A, axes=([1], [0]))


def check_bcl(
    A: Sequence[np.ndarray] | np.ndarray, p: float, normalize: bool = True, tol: float = DEFAULT_TOL
) -> InequalityReport:
    """The r-fold uniform convexity bound, with the dual form as a companion.

    Main form: (1/r sum_k ||sum_j omega^{jk} A_j||_p^p)^(2/p)
    >= ||A_0||_p^2 + zeta(p, r) sum_{k>=1} ||A_k||_p^2.
    """
    A = _as_stack(A)
    if normalize:
        A = A * _unit_scale(A)
    r = A.shape[0]
    z = zeta(p, r)
    params = {"r": r, "p": p, "m": A.shape[1], "zeta": z}

    mixed = schatten_norm(twisted_sums(A, +1), p)
    own = schatten_norm(A, p)
    lhs = np.mean(mixed**p) ** (2 / p)
    rhs = own[0] ** 2 + z * np.sum(own[1:] ** 2)
    report = _report("bcl", lhs, rhs, True, params, tol)

    averaged = schatten_norm(twisted_sums(A, -1) / r, p)
    lhs_dual = np.mean(own**p) ** (2 / p)
    rhs_dual = averaged[0] ** 2 + z * np.sum(averaged[1:] ** 2)
    report.companions["dual"] = _report("bcl-dual", lhs_dual, rhs_dual, True, params, tol)
    return report


def check_weak_bcl(
    A: Sequence[np.ndarray] | np.ndarray, p: float, normalize: bool = True, tol: float = DEFAULT_TOL
) -> InequalityReport:
    """(1/r) sum_k ||sum_j omega^{jk} A_j||_p^2 >= ||A_0||_p^2 + zeta sum_{k>=1} ||A_k||_p^2."""
    A = _as_stack(A)
    if normalize:
        A = A * _unit_scale(A)
    r = A.shape[0]
    z = zeta(p, r)
    mixed = schatten_norm(twisted_sums(A, +1), p)
    own = schatten_norm(A, p)
    lhs = np.mean(mixed**2)
    rhs = own[0] ** 2 + z * np.sum(own[1:] ** 2)
    return _report("bcl-weak", lhs, rhs, True, {"r": r, "p": p, "m": A.shape[1], "zeta": z}, tol)


def abs_power(Z: np.ndarray, exponent: float) -> np.ndarray:
    """|Z*|^exponent = (Z Z^dagger)^(exponent/2), restricted to the range of Z.

    Eigenvalues below round-off are treated as exact zeros, so negative
    exponents act as a pseudo-inverse power.
    """
    vals, vecs = np.linalg.eigh(Z @ Z.conj().T)
    top = vals.max(initial=0.0)
    keep = vals > 1e-13 * top
    powered = np.zeros_like(vals)
    powered[keep] = vals[keep] ** (exponent / 2)
    return (vecs * powered) @ vecs.conj().T


def gradient_direction(Z: np.ndarray, p: float) -> np.ndarray:
    """|Z*|^{p-2} Z, the direction of the gradient of ||Z||_p^2."""
    return abs_power(Z, p - 2) @ Z


def orthogonality_residuals(Z: np.ndarray, W: np.ndarray, p: float) -> tuple[complex, complex]:
    """Tr[G W^dagger] and Tr[W G^dagger] for G = |Z*|^{p-2} Z.

    The second is the conjugate of the first; both are returned so callers
    can state the condition in its symmetric form.
    """
    G = gradient_direction(Z, p)
    return complex(np.trace(G @ W.conj().T)), complex(np.trace(W @ G.conj().T))


def orthogonal_partner(Z: np.ndarray, p: float, seed: SeedLike = None) -> np.ndarray:
    """A random W with both orthogonality traces equal to zero."""
    rng = as_generator(seed)
    m = Z.shape[0]
    W = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    G = gradient_direction(Z, p)
    gg = np.vdot(G, G)
    if abs(gg) > 0:
        W = W - (np.vdot(G, W) / gg) * G
    return W


def check_orthogonal_convexity(
    Z: np.ndarray, W: np.ndarray, p: float, normalize: bool = True, tol: float = DEFAULT_TOL
) -> InequalityReport:
    """||Z + W||_p^2 >= ||Z||_p^2 + (p-1)||W||_p^2 for W orthogonal to Z."""
    Z = np.asarray(Z, dtype=np.complex128)
    W = np.asarray(W, dtype=np.complex128)
    if Z.shape != W.shape or Z.shape[0] != Z.shape[1]:
        raise ValueError(f"Z and W must be square of equal side, got {Z.shape} and {W.shape}")
    if normalize:
        scale = _unit_scale(np.stack([Z, W]))
        Z, W = Z * scale, W * scale
    c1, c2 = orthogonality_residuals(Z, W, p)
    if max(abs(c1), abs(c2)) > ORTHOGONALITY_TOL:
        raise ValueError(f"orthogonality violated: residuals {abs(c1):.3e}, {abs(c2):.3e}")
    lhs = schatten_norm(Z + W, p) ** 2
    rhs = schatten_norm(Z, p) ** 2 + (p - 1) * schatten_norm(W, p) ** 2
    return _report("orthogonal-convexity", lhs, rhs, True, {"p": p, "m": Z.shape[0]}, tol)


class EmbeddingError(RuntimeError):
    """The block embedding failed one of its defining identities."""


def block_embedding(A: Sequence[np.ndarray] | np.ndarray, p: float | None = None, rtol: float = 1e-8) -> np.ndarray:
    """Z_j = diag(omega^{jk} A_j)_{k=0..r-1}, returned as an (r, rm, rm) stack.

    With ``p`` given, also confirms Tr|sum_j Z_j|^p = sum_k Tr|sum_j omega^{jk} A_j|^p
    and ||Z_j||_p^2 = r^(2/p) ||A_j||_p^2.
    """
    A = _as_stack(A)
    r, m = A.shape[0], A.shape[1]
    W = character_matrix(r, +1)
    Z = np.zeros((r, r * m, r * m), dtype=np.complex128)
    for j in range(r):
        for k in range(r):
            Z[j, k * m:(k + 1) * m, k * m:(k + 1) * m] = W[j, k] * A[j]
    if p is not None:
        total = schatten_norm(Z.sum(axis=0), p) ** p
        pieces = np.sum(schatten_norm(twisted_sums(A, +1), p) ** p)
        if not np.isclose(total, pieces, rtol=rtol, atol=1e-12):
            raise EmbeddingError(f"trace identity failed: {total} vs {pieces}")
        lifted = schatten_norm(Z, p) ** 2
        expected = r ** (2 / p) * schatten_norm(A, p) ** 2
        if not np.allclose(lifted, expected, rtol=rtol, atol=1e-12):
            raise EmbeddingError(f"norm scaling failed: {lifted} vs {expected}")
    return Z


def _weights(r: int, n: int, base: float) -> np.ndarray:
    weights = (all_strings(r, n) != 0).sum(axis=1)
    return np.asarray(base, dtype=float) ** weights


def check_hypercontractivity(
    f: MatrixFunction, p: float, rho: float, normalize: bool = True, tol: float = DEFAULT_TOL
) -> InequalityReport:
    """(sum_S rho^{2|S|} ||f_hat(S)||_p^2)^(1/2) <= (r^-n sum_x ||f(x)||_p^p)^(1/p)."""
    if not 1 <= p <= 2:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    limit = np.sqrt(zeta(p, f.r))
    if rho < 0 or rho > limit + 1e-12:
        raise ValueError(f"rho={rho} exceeds the admissible sqrt(zeta(p, r))={limit}")
    table = f.table
    if normalize:
        table = table * _unit_scale(table)
    g = MatrixFunction(f.r, f.n, table)
    coeff_norms = schatten_norm(fourier_transform(g).table, p)
    lhs = np.sqrt(np.sum(_weights(f.r, f.n, rho**2) * coeff_norms**2))
    rhs = np.mean(schatten_norm(table, p) ** p) ** (1 / p)
    return _report("hypercontractivity", lhs, rhs, False, {"r": f.r, "n": f.n, "m": f.m, "p": p, "rho": rho}, tol)


def check_density_fourier_bound(f: MatrixFunction, delta: float, tol: float = DEFAULT_TOL) -> InequalityReport:
    """sum_S delta^|S| ||f_hat(S)||_1^2 <= 2^(2(r-1) delta m) for m-qubit states f(x)."""
    r = f.r
    if not 0 <= delta <= 1 / (r - 1):
        raise ValueError(f"delta={delta} outside [0, 1/(r-1)]")
    side = f.m
    qubits = int(round(np.log2(side)))
    if 2**qubits != side:
        raise ValueError(f"matrix side {side} is not a power of two")
    table = f.table
    if not np.allclose(table, np.conj(np.swapaxes(table, 1, 2)), atol=1e-9):
        raise ValueError("entries must be Hermitian")
    traces = np.trace(table, axis1=1, axis2=2)
    if not np.allclose(traces, 1.0, atol=1e-9):
        raise ValueError("entries must have unit trace")
    if np.linalg.eigvalsh(table).min() < -1e-9:
        raise ValueError("entries must be positive semidefinite")
    coeff_norms = schatten_norm(fourier_transform(f).table, 1)
    lhs = np.sum(_weights(r, f.n, delta) * coeff_norms**2)
    rhs = 2.0 ** (2 * (r - 1) * delta * qubits)
    return _report("density-fourier-bound", lhs, rhs, False, {"r": r, "n": f.n, "qubits": qubits, "delta": delta}, tol)


def check_kkl(indicator: np.ndarray, r: int, delta: float, tol: float = DEFAULT_TOL) -> InequalityReport:
    """sum_S delta^|S| |f_hat(S)|^2 <= (|A| / r^n)^(2 / (1 + r delta)) for f = 1_A."""
    if not 0 <= delta <= 1 / r:
        raise ValueError(f"delta={delta} outside [0, 1/r]")
    values = np.asarray(indicator).reshape(-1)
    n = int(round(np.log(values.size) / np.log(r)))
    if r**n != values.size:
        raise ValueError(f"indicator has {values.size} entries, not a power of r={r}")
    if not np.all((values == 0) | (values == 1)):
        raise ValueError("indicator must be 0/1 valued")
    coeffs = fourier_transform(MatrixFunction.scalar(r, n, values)).table[:, 0, 0]
    lhs = np.sum(_weights(r, n, delta) * np.abs(coeffs) ** 2)
    density = values.sum() / values.size
    rhs = density ** (2 / (1 + r * delta))
    return _report("kkl", lhs, rhs, False, {"r": r, "n": n, "delta": delta, "size": int(values.sum())}, tol)


def _lq(values: np.ndarray, q: float, axis: int, normalized: bool) -> np.ndarray:
    if np.isinf(q):
        return np.max(values, axis=axis)
    agg = np.mean if normalized else np.sum
    return agg(values**q, axis=axis) ** (1 / q)


def check_minkowski(F: np.ndarray, q1: float, q2: float, normalized: bool = False, tol: float = DEFAULT_TOL) -> InequalityReport:
    """Mixed-norm exchange for a nonnegative matrix with rows u_i and columns v_j.

    For 1 <= q1 <= q2: || (||u_i||_{q1})_i ||_{q2} <= || (||v_j||_{q2})_j ||_{q1}.
    With ``normalized`` every l_q norm is taken against the uniform
    probability measure instead of counting measure.
    """
    if not 1 <= q1 <= q2:
        raise ValueError(f"need 1 <= q1 <= q2, got q1={q1}, q2={q2}")
    F = np.abs(np.asarray(F, dtype=float))
    inner_rows = _lq(F, q1, axis=1, normalized=normalized)
    small = _lq(inner_rows, q2, axis=0, normalized=normalized)
    inner_cols = _lq(F, q2, axis=0, normalized=normalized)
    big = _lq(inner_cols, q1, axis=0, normalized=normalized)
    return _report("minkowski", small, big, False, {"q1": q1, "q2": q2, "shape": list(F.shape)}, tol)


def check_diagonal_bound(A: np.ndarray, p: float, tol: float = DEFAULT_TOL) -> InequalityReport:
    """Pinching: ||diag(A)||_p <= ||A||_p."""
    A = np.asarray(A, dtype=np.complex128)
    scale = _unit_scale(A[None])
    A = A * scale
    lhs = schatten_norm(np.diag(np.diagonal(A)), p)
    rhs = schatten_norm(A, p)
    return _report("diagonal-pinching", lhs, rhs, False, {"p": p, "m": A.shape[0]}, tol)
