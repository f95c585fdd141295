"""Locally decodable codes over Z_r.

Decoders are non-adaptive and described as an explicit finite distribution:
for each message index i, a list of query sets Q with probabilities p(Q)
and output tables f_Q giving a distribution over Z_r for every possible
answer to the queries. This keeps every success probability computable
exactly by enumeration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal

import numpy as np

from .inequalities import InequalityReport, check_diagonal_bound
from .zr import SeedLike, ZrString, all_strings, as_generator, root_powers

HADAMARD_MAX_N = 24
EMBEDDING_MAX_SIDE = 4096
EXHAUSTIVE_BUDGET = 10**7


@dataclass(frozen=True)
class Code:
    """An encoder Z_r^n -> Z_r^N, either Hadamard or an explicit codeword table."""

    r: int
    n: int
    N: int
    kind: Literal["hadamard", "table"] = "hadamard"
    table: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "hadamard":
            if self.n > HADAMARD_MAX_N:
                raise ValueError(f"Hadamard length 2^{self.n} exceeds the limit 2^{HADAMARD_MAX_N}")
            if self.N != 2**self.n:
                raise ValueError(f"Hadamard code over n={self.n} has length {2**self.n}, not {self.N}")
        elif self.kind == "table":
            table = np.asarray(self.table, dtype=np.int64)
            if table.shape != (self.r**self.n, self.N):
                raise ValueError(f"codeword table must have shape {(self.r**self.n, self.N)}, got {table.shape}")
            object.__setattr__(self, "table", table % self.r)
        else:
            raise ValueError(f"unknown code kind {self.kind!r}")

    def encode(self, x: ZrString) -> ZrString:
        if x.n != self.n or x.r != self.r:
            raise ValueError("message does not fit the code")
        if self.kind == "hadamard":
            return hadamard_encode(x)
        return ZrString(self.r, tuple(int(v) for v in self.table[x.index()]))

    def codewords(self) -> np.ndarray:
        """Every codeword, row k encoding the message with mixed-radix index k."""
        if self.kind == "table":
            return self.table
        if self.r**self.n * self.N > EXHAUSTIVE_BUDGET:
            raise ValueError("codeword table too large to enumerate")
        return (all_strings(self.r, self.n) @ hadamard_points(self.n).T) % self.r


def hadamard_code(r: int, n: int) -> Code:
    return Code(r, n, 2**n, "hadamard")


def hadamard_points(n: int) -> np.ndarray:
    """Rows y in {0,1}^n; position j carries bit i of j as y_i."""
    j = np.arange(2**n, dtype=np.int64)
    return (j[:, None] >> np.arange(n)) & 1


def hadamard_encode(x: ZrString) -> ZrString:
    """C(x)_y = sum_i x_i y_i mod r for every y in {0,1}^n."""
    if x.n > HADAMARD_MAX_N:
        raise ValueError(f"Hadamard length 2^{x.n} exceeds the limit 2^{HADAMARD_MAX_N}")
    values = (hadamard_points(x.n) @ x.to_array()) % x.r
    return ZrString(x.r, tuple(int(v) for v in values))


def hadamard_decode(i: int, word: ZrString, seed: SeedLike = None) -> int:
    """Two-query recovery of x_i: difference across the i-th coordinate flip."""
    N = len(word)
    n = N.bit_length() - 1
    if 2**n != N:
        raise ValueError(f"word length {N} is not a power of two")
    if not 0 <= i < n:
        raise ValueError(f"index {i} outside [0, {n})")
    y = int(as_generator(seed).integers(0, N))
    flipped = y ^ (1 << i)
    if (y >> i) & 1:
        return (word[y] - word[flipped]) % word.r
    return (word[flipped] - word[y]) % word.r


@dataclass
class QuerySet:
    """Query positions Q, their probability, and f_table[a_1, ..., a_|Q|, out]."""

    Q: tuple[int, ...]
    p: Fraction
    f_table: np.ndarray


def deterministic_table(r: int, size: int, func: Callable[[tuple[int, ...]], int]) -> np.ndarray:
    table = np.zeros((r,) * size + (r,))
    for answers in np.ndindex(*(r,) * size):
        table[answers + (func(answers) % r,)] = 1.0
    return table


@dataclass
class Decoder:
    r: int
    n: int
    N: int
    queries: list[list[QuerySet]]

    def __post_init__(self) -> None:
        if len(self.queries) != self.n:
            raise ValueError(f"need query distributions for {self.n} indices, got {len(self.queries)}")
        for i, sets in enumerate(self.queries):
            total = sum((qs.p for qs in sets), Fraction(0))
            if total != 1:
                raise ValueError(f"query probabilities for index {i} sum to {total}")

    @property
    def q(self) -> int:
        return max(len(qs.Q) for sets in self.queries for qs in sets)

    def decode(self, i: int, word: ZrString, rng: np.random.Generator) -> int:
        sets = self.queries[i]
        probs = np.array([float(qs.p) for qs in sets])
        chosen = sets[int(rng.choice(len(sets), p=probs / probs.sum()))]
        dist = chosen.f_table[tuple(word[j] for j in chosen.Q)]
        return int(rng.choice(self.r, p=dist / dist.sum()))

    def success_probability(self, i: int, word: np.ndarray | ZrString, target: int) -> float:
        word = word.entries if isinstance(word, ZrString) else word
        return float(sum(float(qs.p) * qs.f_table[tuple(int(word[j]) for j in qs.Q)][target] for qs in self.queries[i]))

    def query_probabilities(self, i: int) -> np.ndarray:
        probs = np.zeros(self.N)
        for qs in self.queries[i]:
            for j in set(qs.Q):
                probs[j] += float(qs.p)
        return probs

    def to_dict(self) -> dict:
        return {
            "queries": [
                {
                    "i": i,
                    "sets": [{"Q": list(qs.Q), "p": str(qs.p), "f_table": qs.f_table.tolist()} for qs in sets],
                }
                for i, sets in enumerate(self.queries)
            ]
        }


def hadamard_decoder(code: Code) -> Decoder:
    """The pair decoder as a distribution over aligned pairs (y, y + e_i) with y_i = 0."""
    r, n, N = code.r, code.n, code.N
    table = deterministic_table(r, 2, lambda a: a[1] - a[0])
    weight = Fraction(2, N)
    queries = []
    for i in range(n):
        pairs = [(y, y | (1 << i)) for y in range(N) if not (y >> i) & 1]
        queries.append([QuerySet(pair, weight, table) for pair in pairs])
    return Decoder(r, n, N, queries)


def code_to_json(code: Code, decoder: Decoder) -> str:
    data = {"r": code.r, "n": code.n, "N": code.N, "type": code.kind}
    if code.kind == "table":
        data["table"] = code.table.tolist()
    data.update(decoder.to_dict())
    return json.dumps(data)


def code_from_json(text: str) -> tuple[Code, Decoder]:
    data = json.loads(text)
    r, n, N = data["r"], data["n"], data["N"]
    code = Code(r, n, N, data["type"], np.asarray(data["table"]) if data["type"] == "table" else None)
    queries = [[] for _ in range(n)]
    for entry in data["queries"]:
        queries[entry["i"]] = [QuerySet(tuple(s["Q"]), Fraction(s["p"]), np.asarray(s["f_table"], dtype=float)) for s in entry["sets"]]
    return code, Decoder(r, n, N, queries)


Adversary = Callable[[ZrString, int, np.random.Generator], list[tuple[int, int]]]


def corrupt(
    codeword: ZrString,
    delta: float,
    mode: Literal["random", "adversarial"] = "random",
    seed: SeedLike = None,
    adversary: Adversary | None = None,
) -> ZrString:
    """Change floor(delta N) positions: at random to different symbols, or as an adversary dictates."""
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    rng = as_generator(seed)
    N, r = len(codeword), codeword.r
    budget = math.floor(delta * N + 1e-12)
    entries = list(codeword.entries)
    if mode == "random":
        for j in rng.choice(N, size=budget, replace=False):
            entries[j] = (entries[j] + int(rng.integers(1, r))) % r
    elif mode == "adversarial":
        if adversary is None:
            raise ValueError("adversarial mode needs an adversary callback")
        changes = adversary(codeword, budget, rng)
        positions = {j for j, _ in changes}
        if len(positions) > budget:
            raise ValueError(f"adversary changed {len(positions)} positions, budget is {budget}")
        for j, value in changes:
            entries[j] = int(value) % r
    else:
        raise ValueError(f"unknown corruption mode {mode!r}")
    return ZrString(r, tuple(entries))


Noise = Callable[[ZrString, np.random.Generator], ZrString]


def random_noise(delta: float) -> Noise:
    return lambda word, rng: corrupt(word, delta, "random", rng)


@dataclass
class RecoveryEstimate:
    success: np.ndarray
    stderr: np.ndarray
    r: int
    trials: int

    @property
    def advantage(self) -> np.ndarray:
        return self.success - 1 / self.r

    @property
    def worst_index(self) -> int:
        return int(np.argmin(self.success))

    @property
    def min_advantage(self) -> float:
        return float(self.advantage.min())


def empirical_recovery(code: Code, decoder: Decoder, noise: Noise, trials: int, seed: SeedLike = None) -> RecoveryEstimate:
    """Monte Carlo success rate per index on fresh random messages and noisy codewords."""
    rng = as_generator(seed)
    hits = np.zeros(code.n)
    for _ in range(trials):
        x = ZrString.random(code.r, code.n, rng)
        word = noise(code.encode(x), rng)
        for i in range(code.n):
            hits[i] += decoder.decode(i, word, rng) == x[i]
    success = hits / trials
    return RecoveryEstimate(success, np.sqrt(success * (1 - success) / trials), code.r, trials)


def exact_success(code: Code, decoder: Decoder) -> np.ndarray:
    """Pr[decoder returns x_i] on the clean codeword, for every (x, i)."""
    words = code.codewords()
    xs = all_strings(code.r, code.n)
    out = np.empty((len(xs), code.n))
    for row, (x, word) in enumerate(zip(xs, words)):
        for i in range(code.n):
            out[row, i] = decoder.success_probability(i, word, int(x[i]))
    return out


@dataclass
class SmoothnessReport:
    q: int
    N: int
    max_query_prob: list[float]
    heavy: list[list[int]]
    heavy_mass: list[float]
    epsilon: float | None

    @property
    def c(self) -> float:
        return self.N * max(self.max_query_prob)

    def as_ldc(self, delta: float) -> tuple[int, float, float | None]:
        """The LDC parameters (q, delta, eps - c delta) implied by smoothness."""
        eps = None if self.epsilon is None else self.epsilon - self.c * delta
        return self.q, delta, eps


def _drop_positions(qs: QuerySet, drop: set[int]) -> QuerySet:
    keep_axes = [a for a, j in enumerate(qs.Q) if j not in drop]
    lose_axes = tuple(a for a, j in enumerate(qs.Q) if j in drop)
    table = qs.f_table.mean(axis=lose_axes) if lose_axes else qs.f_table
    return QuerySet(tuple(qs.Q[a] for a in keep_axes), qs.p, table)


def smoothness_report(code: Code, decoder: Decoder, heavy: list[list[int]] | None = None, heavy_mass: list[float] | None = None) -> SmoothnessReport:
    maxima = [float(decoder.query_probabilities(i).max()) for i in range(code.n)]
    eps = None
    if code.r**code.n * code.N <= EXHAUSTIVE_BUDGET:
        eps = float(exact_success(code, decoder).min()) - 1 / code.r
    return SmoothnessReport(
        decoder.q,
        code.N,
        maxima,
        heavy or [[] for _ in range(code.n)],
        heavy_mass or [0.0] * code.n,
        eps,
    )


def smooth_transform(code: Code, decoder: Decoder, delta: float) -> tuple[Decoder, SmoothnessReport]:
    """Stop querying indices hit with probability above q/(delta N); answer them with uniform guesses."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    threshold = decoder.q / (delta * code.N)
    new_queries, heavy_lists, masses = [], [], []
    for i, sets in enumerate(decoder.queries):
        probs = decoder.query_probabilities(i)
        heavy = {int(j) for j in np.flatnonzero(probs > threshold + 1e-15)}
        heavy_lists.append(sorted(heavy))
        masses.append(float(sum(qs.p for qs in sets if heavy & set(qs.Q))))
        new_queries.append([_drop_positions(qs, heavy) for qs in sets])
    smooth = Decoder(code.r, code.n, code.N, new_queries)
    return smooth, smoothness_report(code, smooth, heavy_lists, masses)


# Correlation extraction from a smooth decoder.


@dataclass
class GoodSet:
    Q: tuple[int, ...]
    correlation: float
    fourier_mass: float


@dataclass
class GoodSetMatching:
    i: int
    epsilon: float
    threshold: float
    matching: list[GoodSet]
    good: list[GoodSet]


def correlation_certificate(code: Code, qs: QuerySet, i: int) -> float:
    """Re sum_{k=1}^{r-1} E_x E_f[omega^{k (f_Q(C(x)_Q) - x_i)}]."""
    r = code.r
    powers = root_powers(r)
    words = code.codewords()
    xs = all_strings(r, code.n)
    total = 0j
    for x, word in zip(xs, words):
        dist = qs.f_table[tuple(int(word[j]) for j in qs.Q)]
        for k in range(1, r):
            total += np.sum(dist * powers[(k * (np.arange(r) - x[i])) % r])
    return float(total.real / len(xs))


def fourier_certificate(code: Code, Q: tuple[int, ...], i: int) -> float:
    """sum_{k=1}^{r-1} sum_S |E_x[omega^{S.C(x)_Q - k x_i}]|, independent of the output table."""
    r = code.r
    powers = root_powers(r)
    words = code.codewords()[:, list(Q)]
    xs = all_strings(r, code.n)
    S_all = all_strings(r, len(Q))
    phases = (words @ S_all.T) % r
    total = 0.0
    for k in range(1, r):
        shifted = (phases - k * xs[:, [i]]) % r
        total += float(np.abs(powers[shifted].mean(axis=0)).sum())
    return total


def good_set_matching(code: Code, decoder: Decoder, i: int, epsilon: float | None = None) -> GoodSetMatching:
    """Query sets whose output correlates with x_i at least r eps / 2, then a greedy disjoint family."""
    if epsilon is None:
        epsilon = float(exact_success(code, decoder)[:, i].min()) - 1 / code.r
    threshold = code.r * epsilon / 2
    good = []
    for qs in sorted(decoder.queries[i], key=lambda s: s.Q):
        corr = correlation_certificate(code, qs, i)
        if corr >= threshold - 1e-12:
            good.append(GoodSet(qs.Q, corr, fourier_certificate(code, qs.Q, i)))
    used: set[int] = set()
    matching = []
    for g in good:
        if used.isdisjoint(g.Q):
            matching.append(g)
            used.update(g.Q)
    return GoodSetMatching(i, epsilon, threshold, matching, good)


# Rank-one matrix embedding of a code.


def embedding_side(code: Code) -> int:
    return code.r**2 * code.N


def rank1_vector(code: Code, x: ZrString) -> np.ndarray:
    """v_x[N (r j + m) + l] = omega^{j C(x)_l}: r blocks per j, each repeated r times."""
    R = embedding_side(code)
    if R > EMBEDDING_MAX_SIDE:
        raise ValueError(f"embedding side {R} exceeds {EMBEDDING_MAX_SIDE}")
    c = np.asarray(code.encode(x).entries)
    powers = root_powers(code.r)
    blocks = [powers[(j * c) % code.r] for j in range(code.r) for _ in range(code.r)]
    return np.concatenate(blocks)


def rank1_embedding(code: Code, x: ZrString) -> np.ndarray:
    """f(x) = v_x v_x^T (plain transpose), whose only nonzero singular value is r^2 N."""
    v = rank1_vector(code, x)
    return np.outer(v, v)


def fourier_slice(code: Code, i: int, k: int) -> np.ndarray:
    """r^-n sum_x f(x) omega^{-k x_i}, the coefficient of f at k e_i."""
    R = embedding_side(code)
    if code.r**code.n * R * R > 10**9:
        raise ValueError("Fourier slice too expensive to tabulate")
    powers = root_powers(code.r)
    acc = np.zeros((R, R), dtype=np.complex128)
    for x in all_strings(code.r, code.n):
        v = rank1_vector(code, ZrString(code.r, tuple(x)))
        acc += np.outer(v, v) * powers[(-k * x[i]) % code.r]
    return acc / code.r**code.n


def pair_permutation(r: int, N: int, pairs: list[tuple[int, int]]) -> np.ndarray:
    """Row order that swaps N(r S1 + S2) + Q1 with N(r S2 + S1) + Q2 for every pair and S."""
    perm = np.arange(r * r * N)
    for q1, q2 in pairs:
        if q1 == q2:
            raise ValueError("pairs must consist of two distinct positions")
        for s1 in range(r):
            for s2 in range(r):
                a, b = N * (r * s1 + s2) + q1, N * (r * s2 + s1) + q2
                perm[a], perm[b] = perm[b], perm[a]
    return perm


def diagonal_correlations(code: Code, i: int, k: int, pairs: list[tuple[int, int]]) -> dict[tuple[tuple[int, int], tuple[int, int]], complex]:
    """Diagonal of the row-permuted Fourier slice at the positions N(r S1 + S2) + Q1."""
    r, N = code.r, code.N
    permuted = fourier_slice(code, i, k)[pair_permutation(r, N, pairs)]
    out = {}
    for q1, q2 in pairs:
        for s1 in range(r):
            for s2 in range(r):
                pos = N * (r * s1 + s2) + q1
                out[((q1, q2), (s1, s2))] = complex(permuted[pos, pos])
    return out


def pair_correlation(code: Code, i: int, k: int, Q: tuple[int, int], S: tuple[int, int]) -> complex:
    """E_x[omega^{S.C(x)_Q - k x_i}] by direct enumeration."""
    r = code.r
    words = code.codewords()
    xs = all_strings(r, code.n)
    phase = (S[0] * words[:, Q[0]] + S[1] * words[:, Q[1]] - k * xs[:, i]) % r
    return complex(root_powers(r)[phase].mean())


def slice_diagonal_bound(code: Code, i: int, k: int, pairs: list[tuple[int, int]], p: float) -> InequalityReport:
    """||diag(P f_hat)||_p <= ||f_hat||_p for the pair permutation P."""
    permuted = fourier_slice(code, i, k)[pair_permutation(code.r, code.N, pairs)]
    return check_diagonal_bound(permuted, p)


def min_length_log2(n: int, r: int, delta: float, epsilon: float) -> float:
    """log2 of :func:`min_length_bound`, usable when the bound overflows a float."""
    if n < 1 or r < 2 or not 0 < delta <= 1 or not 0 < epsilon <= 1:
        raise ValueError(f"parameters out of range: n={n}, r={r}, delta={delta}, epsilon={epsilon}")

    def holds(L: float) -> bool:
        p = 1 + 1 / L
        lhs = n * (p - 1) * r**-4 * (delta * epsilon / 4) ** (2 / p) * (epsilon / 2) ** 2
        return lhs <= 2 ** (L * 2 * (p - 1) / p)

    # The left side falls and the right side grows with L = log2 R, so the
    # feasible set is a ray and bisection finds its endpoint.
    lo = 2 * math.log2(r)
    if holds(lo):
        return 0.0
    hi = 2 * lo
    while not holds(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1e-12 * hi:
        mid = (lo + hi) / 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi - 2 * math.log2(r)


def min_length_bound(n: int, r: int, delta: float, epsilon: float) -> float:
    """Smallest N = R / r^2 with n (p-1) r^-4 (delta eps/4)^(2/p) (eps/2)^2 <= R^(2(p-1)/p), p = 1 + 1/log2 R.

    Returns 1 when the constraint already holds at N = 1.
    """
    log_n = min_length_log2(n, r, delta, epsilon)
    return 2.0**log_n if log_n < 1000 else math.inf
