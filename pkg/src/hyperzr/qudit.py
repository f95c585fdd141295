"""A small dense statevector simulator for composite qudit registers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .zr import root_powers

NORM_TOL = 1e-10


@dataclass
class Statevector:
    """Amplitudes over a tensor product of registers with dimensions ``dims``.

    ``amplitudes`` has shape ``dims``; register 0 is the leftmost factor.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.dims = tuple(int(d) for d in self.dims)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(self.dims)
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm})")

    @classmethod
    def basis(cls, dims: tuple[int, ...], index: tuple[int, ...]) -> Statevector:
        amps = np.zeros(dims, dtype=np.complex128)
        amps[index] = 1
        return cls(dims, amps)

    def attach(self, dim: int, front: bool = True) -> Statevector:
        """Tensor on a fresh register prepared in |0>."""
        zero = np.zeros(dim, dtype=np.complex128)
        zero[0] = 1
        if front:
            return Statevector((dim, *self.dims), np.multiply.outer(zero, self.amplitudes))
        return Statevector((*self.dims, dim), np.multiply.outer(self.amplitudes, zero))

    def apply(self, op: np.ndarray, registers: tuple[int, ...]) -> Statevector:
        """Apply ``op`` acting on the listed registers (in that order)."""
        sub = tuple(self.dims[i] for i in registers)
        size = int(np.prod(sub))
        op = np.asarray(op).reshape(sub + sub) if op.shape == (size, size) else op
        k = len(registers)
        moved = np.tensordot(op, self.amplitudes, axes=(list(range(k, 2 * k)), list(registers)))
        return Statevector(self.dims, np.moveaxis(moved, list(range(k)), list(registers)))

    def probabilities(self, register: int) -> np.ndarray:
        """Born distribution of a computational-basis measurement of one register."""
        weights = np.abs(self.amplitudes) ** 2
        axes = tuple(i for i in range(len(self.dims)) if i != register)
        probs = weights.sum(axis=axes)
        return probs / probs.sum()

    def project(self, projector: np.ndarray, register: int) -> tuple[float, Statevector | None]:
        """Probability of a projective outcome and the renormalized post-measurement state."""
        unnormalized = np.moveaxis(np.tensordot(projector, self.amplitudes, axes=([1], [register])), 0, register)
        prob = float(np.sum(np.abs(unnormalized) ** 2))
        if prob <= 1e-15:
            return prob, None
        return prob, Statevector(self.dims, unnormalized / np.sqrt(prob))

    def measure(self, register: int, rng: np.random.Generator) -> int:
        probs = self.probabilities(register)
        return int(rng.choice(len(probs), p=probs))


def fourier_gate(r: int) -> np.ndarray:
    """Q_r |j> = r^{-1/2} sum_k omega^{jk} |k>."""
    powers = root_powers(r)
    j = np.arange(r)
    return powers[np.outer(j, j) % r] / np.sqrt(r)


def phase_gate(r: int) -> np.ndarray:
    """P |k> = omega^k |k>."""
    return np.diag(root_powers(r))


def reflection_shift(r: int, ell: int) -> np.ndarray:
    """S_ell |k> = |ell - k>."""
    S = np.zeros((r, r), dtype=np.complex128)
    k = np.arange(r)
    S[(ell - k) % r, k] = 1
    return S


def swap_indices(n: int, a: int, b: int) -> np.ndarray:
    """Permutation matrix exchanging basis states |a> and |b> of an n-level register."""
    X = np.eye(n, dtype=np.complex128)
    X[[a, b]] = X[[b, a]]
    return X
