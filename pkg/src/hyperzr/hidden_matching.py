"""The r-ary hidden hypermatching problem.

Alice holds x in Z_r^n, Bob holds a partial hypermatching M and a string w.
On YES instances w = Mx; on NO instances w is uniform. This module samples
instances, runs the classical sampling protocol and the qudit protocol for
t = 2, and evaluates the exact combinatorial quantities used in the
lower-bound argument (the u-quantity, the structured set of each matching,
the probability of landing in it, and message bias).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Literal

import numpy as np

from . import cyclotomic
from .qudit import Statevector, fourier_gate, phase_gate, reflection_shift, swap_indices
from .zr import (
    Hypermatching,
    SeedLike,
    ZrString,
    all_strings,
    apply_matching,
    apply_matching_batch,
    as_generator,
    count_hypermatchings,
    edge_count,
    root_powers,
    sample_hypermatching,
)

Verdict = Literal["YES", "NO"]
EXHAUSTIVE_BUDGET = 10**7


@dataclass(frozen=True)
class HHInstance:
    x: ZrString
    M: Hypermatching
    w: ZrString
    label: Verdict

    def __post_init__(self) -> None:
        if self.label not in ("YES", "NO"):
            raise ValueError(f"label must be YES or NO, got {self.label!r}")
        if self.x.n != self.M.n or self.w.n != self.M.num_edges or self.x.r != self.w.r:
            raise ValueError("instance components have inconsistent sizes")
        if self.label == "YES" and apply_matching(self.M, self.x) != self.w:
            raise ValueError("YES instance must satisfy w = Mx")

    @property
    def r(self) -> int:
        return self.x.r

    def to_json(self) -> str:
        return json.dumps(
            {
                "r": self.r,
                "n": self.M.n,
                "t": self.M.t,
                "alpha": str(self.M.alpha),
                "x": list(self.x.entries),
                "edges": [list(e) for e in self.M.edges],
                "w": list(self.w.entries),
                "label": self.label,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> HHInstance:
        data = json.loads(text)
        r = data["r"]
        M = Hypermatching(data["n"], data["t"], tuple(tuple(e) for e in data["edges"]))
        if M.alpha != Fraction(data["alpha"]):
            raise ValueError(f"alpha {data['alpha']} disagrees with the edge count")
        return cls(ZrString(r, tuple(data["x"])), M, ZrString(r, tuple(data["w"])), data["label"])


def sample_hh_instance(n: int, t: int, alpha: float | Fraction, r: int, label: Verdict, seed: SeedLike = None) -> HHInstance:
    rng = as_generator(seed)
    x = ZrString.random(r, n, rng)
    M = sample_hypermatching(n, t, alpha, rng)
    if label == "YES":
        w = apply_matching(M, x)
    elif label == "NO":
        w = ZrString.random(r, M.num_edges, rng)
    else:
        raise ValueError(f"label must be YES or NO, got {label!r}")
    return HHInstance(x, M, w, label)


def classical_protocol_run(instance: HHInstance, budget: int, seed: SeedLike = None) -> Verdict:
    """Alice reveals ``budget`` random coordinates; Bob rejects only on a fully revealed, violated edge."""
    n = instance.M.n
    if not 0 <= budget <= n:
        raise ValueError(f"budget must lie in [0, {n}], got {budget}")
    revealed = set(as_generator(seed).choice(n, size=budget, replace=False).tolist())
    r = instance.r
    for e, target in zip(instance.M.edges, instance.w):
        if revealed.issuperset(e) and sum(instance.x[v] for v in e) % r != target:
            return "NO"
    return "YES"


# Qudit protocol for t = 2.


def alice_state(x: ZrString) -> Statevector:
    """(1/sqrt n) sum_i |x_i, i> on a value register (dim r) and an index register (dim n)."""
    amps = np.zeros((x.r, x.n), dtype=np.complex128)
    amps[list(x.entries), np.arange(x.n)] = 1 / np.sqrt(x.n)
    return Statevector((x.r, x.n), amps)


def edge_projector(n: int, edge: tuple[int, ...]) -> np.ndarray:
    P = np.zeros((n, n), dtype=np.complex128)
    P[list(edge), list(edge)] = 1
    return P


@lru_cache(maxsize=256)
def _controlled_shift(r: int, n: int, edge: tuple[int, int], ell: int) -> np.ndarray:
    """|k><k| (x) C_ell^k summed over k, on (ancilla, value, index) with C_ell = P S_ell P (x) X."""
    a, b = edge
    C = np.kron(phase_gate(r) @ reflection_shift(r, ell) @ phase_gate(r), swap_indices(n, a, b))
    dim = r * n
    U = np.zeros((r, dim, r, dim), dtype=np.complex128)
    power = np.eye(dim, dtype=np.complex128)
    for k in range(r):
        U[k, :, k, :] = power
        power = C @ power
    return U.reshape(r * dim, r * dim)


def bob_measure_state(state: Statevector, edge: tuple[int, int], ell: int) -> Statevector:
    """Bob's circuit after the edge outcome: ancilla, Q_r, controlled C_ell^k, Q_r^dagger."""
    r, n = state.dims
    s = state.attach(r, front=True)
    s = s.apply(fourier_gate(r), (0,))
    s = s.apply(_controlled_shift(r, n, tuple(edge), ell), (0, 1, 2))
    return s.apply(fourier_gate(r).conj().T, (0,))


def edge_outcome_distribution(x: ZrString, edge: tuple[int, int], ell: int) -> np.ndarray:
    """Exact distribution of Bob's ancilla outcome given the POVM landed on ``edge``."""
    n = x.n
    _, post = alice_state(x).project(edge_projector(n, edge), 1)
    return bob_measure_state(post, edge, ell).probabilities(0)


def measurement_distribution(r: int, ell: int, x0: int, x1: int) -> np.ndarray:
    """Closed-form law of Bob's outcome m for the pair (x0, x1) and test value ell."""
    if (x0 + x1 - ell) % r == 0:
        out = np.zeros(r)
        out[ell % r] = 1.0
        return out
    powers = root_powers(r)
    k = np.arange(r)
    probs = np.empty(r)
    for m in range(r):
        phases = powers[(k * (ell - m)) % r]
        probs[m] = abs(phases[0::2].sum() / r) ** 2 + abs(phases[1::2].sum() / r) ** 2
    return probs


def retry_cap(alpha: float | Fraction) -> int:
    return math.ceil(8 / float(alpha))


def quantum_protocol_run(instance: HHInstance, repetitions: int = 1, seed: SeedLike = None) -> Verdict:
    """Statevector run of the t = 2 protocol; YES iff every repetition reports m = w_i."""
    M = instance.M
    if M.t != 2:
        raise ValueError(f"the qudit protocol needs t = 2, got t = {M.t}")
    rng = as_generator(seed)
    n = M.n
    projectors = [edge_projector(n, e) for e in M.edges]
    for _ in range(repetitions):
        for _ in range(retry_cap(M.alpha)):
            state = alice_state(instance.x)
            probs = [state.project(P, 1)[0] for P in projectors]
            rest = max(0.0, 1.0 - sum(probs))
            outcome = int(rng.choice(len(probs) + 1, p=np.array(probs + [rest]) / (sum(probs) + rest)))
            if outcome == len(probs):
                continue
            _, post = state.project(projectors[outcome], 1)
            ell = instance.w[outcome]
            final = bob_measure_state(post, M.edges[outcome], ell)
            if final.measure(0, rng) != ell:
                return "NO"
            break
    return "YES"


def quantum_acceptance_probability(instance: HHInstance) -> float:
    """Exact single-repetition probability that the protocol outputs YES."""
    M = instance.M
    miss = (1 - float(M.alpha)) ** retry_cap(M.alpha)
    hit = np.mean([edge_outcome_distribution(instance.x, e, ell)[ell] for e, ell in zip(M.edges, instance.w)])
    return miss + (1 - miss) * float(hit)


def collision_acceptance(r: int) -> Fraction:
    """Pr[m = ell] when ell differs from the edge sum: 1/2 for even r, 1/2 + 1/(2r^2) for odd r."""
    return Fraction(1, 2) if r % 2 == 0 else Fraction(1, 2) + Fraction(1, 2 * r * r)


# Exact combinatorial quantities.


def delta_membership(S: ZrString, M: Hypermatching, allow_zero: bool = False) -> bool:
    """S is constant on every edge of M and zero off the matched vertices (S != 0 unless allowed)."""
    if S.n != M.n:
        raise ValueError(f"string length {S.n} does not match matching size {M.n}")
    if not allow_zero and not any(S.entries):
        return False
    matched = M.matched_vertices()
    if any(S[v] for v in range(M.n) if v not in matched):
        return False
    return all(len({S[v] for v in e}) == 1 for e in M.edges)


def _guard(r: int, n: int) -> None:
    if r**n > EXHAUSTIVE_BUDGET:
        raise ValueError(f"exhaustive sum over r^n = {r**n} exceeds {EXHAUSTIVE_BUDGET} (r={r}, n={n})")


def u_coefficients(M: Hypermatching, w: ZrString, S: ZrString, r: int) -> list[Fraction]:
    """u(M, w, S) as exact coefficients over omega^0..omega^(r-1).

    u = (1/2) sum_x p_x p_M omega^{S.x} ([Mx = w] - p_w) with uniform p_x, p_M, p_w.
    """
    n = M.n
    _guard(r, n)
    xs = all_strings(r, n)
    hits = np.all(apply_matching_batch(M, xs, r) == np.asarray(w.entries), axis=1)
    phases = (xs @ np.asarray(S.entries)) % r
    matched = np.bincount(phases[hits], minlength=r)
    total = np.bincount(phases, minlength=r)
    p_w = Fraction(1, r**M.num_edges)
    scale = Fraction(1, 2 * r**n * count_hypermatchings(n, M.t, M.alpha))
    return [scale * (int(matched[k]) - int(total[k]) * p_w) for k in range(r)]


def u_closed_form(M: Hypermatching, w: ZrString, S: ZrString, r: int) -> list[Fraction]:
    """Zero off the structured set; (1/2) r^{-alpha n/t} p_M omega^{sum_i s_i w_i} on it."""
    if not delta_membership(S, M):
        return [Fraction(0)] * r
    phase = sum(S[e[0]] * w[i] for i, e in enumerate(M.edges))
    size = Fraction(1, 2 * r**M.num_edges * count_hypermatchings(M.n, M.t, M.alpha))
    return cyclotomic.monomial(phase, size, r)


def compute_u(M: Hypermatching, w: ZrString, S: ZrString, r: int) -> complex:
    return cyclotomic.to_complex(u_coefficients(M, w, S, r), r)


def prob_delta(counts: Iterable[int], n: int, t: int, alpha: float | Fraction) -> Fraction:
    """Probability over uniform M that a string with k_j * t entries equal to j lies in Delta(M).

    The zero string counts as a member here, so ``counts`` all zero gives 1.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError(f"counts must be nonnegative, got {counts}")
    k = sum(counts)
    if k * t > n:
        raise ValueError(f"support size {k * t} exceeds n={n}")
    edges = edge_count(n, t, alpha)
    if k > edges:
        return Fraction(0)
    value = Fraction(math.comb(edges, k), math.comb(n, k * t))
    value *= Fraction(math.factorial(k), math.factorial(k * t))
    for c in counts:
        value *= Fraction(math.factorial(c * t), math.factorial(c))
    return value


def shape_string(counts: Iterable[int], n: int, t: int, r: int) -> ZrString:
    """The string 1^{k_1 t} 2^{k_2 t} ... 0^{rest} representing a shape class."""
    entries: list[int] = []
    for value, c in enumerate(counts, start=1):
        entries += [value] * (c * t)
    if len(entries) > n:
        raise ValueError("shape does not fit in n coordinates")
    return ZrString(r, tuple(entries + [0] * (n - len(entries))))


def _as_rows(A: Iterable[ZrString] | np.ndarray) -> np.ndarray:
    if isinstance(A, np.ndarray):
        return np.atleast_2d(A)
    return np.array([s.entries for s in A], dtype=np.int64)


def message_distribution(A: Iterable[ZrString] | np.ndarray, M: Hypermatching, r: int) -> list[Fraction]:
    """p_M(z) = |{x in A : Mx = z}| / |A|, indexed by the mixed-radix position of z."""
    rows = _as_rows(A)
    if rows.size == 0:
        raise ValueError("A must be nonempty")
    k = M.num_edges
    if rows.shape[0] * r**k > EXHAUSTIVE_BUDGET:
        raise ValueError("message distribution too large to tabulate")
    z = apply_matching_batch(M, rows, r)
    index = z @ (r ** np.arange(k - 1, -1, -1))
    counts = np.bincount(index, minlength=r**k)
    return [Fraction(int(c), rows.shape[0]) for c in counts]


@dataclass(frozen=True)
class MessageBias:
    tvd: Fraction
    advantage: Fraction


def message_set_bias(A: Iterable[ZrString] | np.ndarray, M: Hypermatching, r: int) -> MessageBias:
    """Total variation (sum of absolute differences) between p_M and uniform."""
    dist = message_distribution(A, M, r)
    uniform = Fraction(1, len(dist))
    tvd = sum((abs(p - uniform) for p in dist), Fraction(0))
    return MessageBias(tvd, tvd / 4)
