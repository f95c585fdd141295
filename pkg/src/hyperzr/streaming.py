"""Unique Games on t-uniform hypergraphs over Z_r, as a stream of constraints.

A constraint ``(edge, target)`` asks for sum_{i in edge} x_i = target (mod r).
Y instances are planted on a hidden assignment z; N instances use uniform
targets. Both are built from ``k`` stages, each one a uniformly random
alpha-partial hypermatching, and arrive in stage order.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Literal

import numpy as np

from .distributions import mixture, tvd
from .hidden_matching import sample_hh_instance
from .zr import (
    Hypermatching,
    SeedLike,
    ZrString,
    as_generator,
    edge_count,
    enumerate_hypermatchings,
    sample_hypermatching,
)

Edge = tuple[int, ...]
Constraint = tuple[Edge, int]
Label = Literal["Y", "N"]
BRUTE_FORCE_BUDGET = 10**7
EXACT_WORK_BUDGET = 2 * 10**6
MAX_HISTOGRAM_STATES = 10**6


@dataclass(frozen=True)
class UGInstance:
    r: int
    n: int
    t: int
    constraints: tuple[Constraint, ...]
    hidden: ZrString | None = None
    label: Label | None = None

    def __post_init__(self) -> None:
        for edge, target in self.constraints:
            if len(edge) != self.t or len(set(edge)) != self.t:
                raise ValueError(f"edge {edge} is not a set of {self.t} vertices")
            if not all(0 <= v < self.n for v in edge):
                raise ValueError(f"edge {edge} has a vertex outside [0, {self.n})")
            if not 0 <= target < self.r:
                raise ValueError(f"target {target} outside Z_{self.r}")

    def __len__(self) -> int:
        return len(self.constraints)

    def satisfied(self, x: ZrString) -> int:
        return sum(1 for e, q in self.constraints if sum(x[v] for v in e) % self.r == q)

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"edge": list(e), "target": q}) + "\n" for e, q in self.constraints)

    @classmethod
    def from_jsonl(cls, text: str, r: int, n: int, t: int) -> UGInstance:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(r, n, t, tuple((tuple(row["edge"]), int(row["target"])) for row in rows))


def stage_constraints(M: Hypermatching, targets: Iterable[int]) -> tuple[Constraint, ...]:
    return tuple((e, int(q)) for e, q in zip(M.edges, targets))


def planted_targets(M: Hypermatching, z: ZrString) -> tuple[int, ...]:
    return tuple(sum(z[v] for v in e) % z.r for e in M.edges)


def sample_stage(label: Label, z: ZrString | None, n: int, t: int, r: int, alpha: float | Fraction, rng: np.random.Generator) -> tuple[Constraint, ...]:
    M = sample_hypermatching(n, t, alpha, rng)
    if label == "Y":
        return stage_constraints(M, planted_targets(M, z))
    return stage_constraints(M, rng.integers(0, r, size=M.num_edges))


def sample_ug(label: Label, n: int, t: int, r: int, k: int, alpha: float | Fraction, seed: SeedLike = None) -> UGInstance:
    """k stages of alpha-partial hypermatchings; Y plants a hidden z, N draws uniform targets."""
    if label not in ("Y", "N"):
        raise ValueError(f"label must be 'Y' or 'N', got {label!r}")
    if k < 1:
        raise ValueError(f"need at least one stage, got k={k}")
    edge_count(n, t, alpha)
    rng = as_generator(seed)
    z = ZrString.random(r, n, rng) if label == "Y" else None
    constraints: list[Constraint] = []
    for _ in range(k):
        constraints += sample_stage(label, z, n, t, r, alpha, rng)
    return UGInstance(r, n, t, tuple(constraints), z, label)


def stages_for_gap(n: int, t: int, r: int, alpha: float, eps: float, failure: float = 0.01) -> int:
    """Smallest k with r^n exp(-eps^2 k alpha n / (3 r t)) <= failure."""
    need = 3 * r * t * (n * math.log(r) - math.log(failure)) / (eps**2 * alpha * n)
    return max(1, math.ceil(need - 1e-12))


def _assignments(r: int, n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = r ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % r


def ug_opt_bruteforce(instance: UGInstance, chunk: int = 1 << 16) -> tuple[int, ZrString]:
    """Exact maximum number of satisfiable constraints and a maximizing assignment."""
    r, n = instance.r, instance.n
    if r**n > BRUTE_FORCE_BUDGET:
        raise ValueError(f"r^n = {r**n} exceeds brute-force budget {BRUTE_FORCE_BUDGET} (r={r}, n={n})")
    weights = Counter(instance.constraints)
    best_value, best_index = -1, 0
    for start in range(0, r**n, chunk):
        xs = _assignments(r, n, start, min(start + chunk, r**n))
        score = np.zeros(len(xs), dtype=np.int64)
        for (edge, target), count in weights.items():
            score += count * ((xs[:, list(edge)].sum(axis=1) % r) == target)
        top = int(np.argmax(score))
        if score[top] > best_value:
            best_value, best_index = int(score[top]), start + top
    witness = ZrString(r, tuple(int(v) for v in _assignments(r, n, best_index, best_index + 1)[0]))
    return best_value, witness


# Streaming algorithms. States are hashable so their laws can be tabulated.


class StreamingAlgorithm(ABC):
    name: str = "abstract"

    @abstractmethod
    def init(self, r: int, n: int, t: int) -> Hashable: ...

    @abstractmethod
    def update(self, state: Hashable, constraint: Constraint) -> Hashable: ...

    @abstractmethod
    def output(self, state: Hashable) -> float: ...

    def run(self, r: int, n: int, t: int, stream: Iterable[Constraint]) -> Hashable:
        state = self.init(r, n, t)
        for c in stream:
            state = self.update(state, c)
        return state


class EdgeCounter(StreamingAlgorithm):
    """Counts constraints; outputs |E| / r, which lies in [OPT/r, OPT]."""

    name = "counter"

    def init(self, r: int, n: int, t: int) -> tuple[int, int]:
        return (r, 0)

    def update(self, state: tuple[int, int], constraint: Constraint) -> tuple[int, int]:
        return (state[0], state[1] + 1)

    def output(self, state: tuple[int, int]) -> float:
        r, count = state
        return count / r


class ConstantMemory(StreamingAlgorithm):
    """Ignores its input entirely."""

    name = "constant"

    def init(self, r: int, n: int, t: int) -> int:
        return 0

    def update(self, state: int, constraint: Constraint) -> int:
        return state

    def output(self, state: int) -> float:
        return 0.0


class FullMemory(StreamingAlgorithm):
    """Stores the whole stream and answers with the exact optimum."""

    name = "full"

    def init(self, r: int, n: int, t: int) -> tuple:
        return (r, n, t, ())

    def update(self, state: tuple, constraint: Constraint) -> tuple:
        r, n, t, seen = state
        return (r, n, t, seen + (constraint,))

    def output(self, state: tuple) -> float:
        r, n, t, seen = state
        return float(ug_opt_bruteforce(UGInstance(r, n, t, seen))[0])


class PrefixMemory(StreamingAlgorithm):
    """Keeps only the first ``limit`` constraints of the stream."""

    name = "prefix"

    def __init__(self, limit: int):
        self.limit = limit

    def init(self, r: int, n: int, t: int) -> tuple:
        return (r, n, t, ())

    def update(self, state: tuple, constraint: Constraint) -> tuple:
        r, n, t, seen = state
        if len(seen) >= self.limit:
            return state
        return (r, n, t, seen + (constraint,))

    def output(self, state: tuple) -> float:
        r, n, t, seen = state
        return float(ug_opt_bruteforce(UGInstance(r, n, t, seen))[0])


REGISTRY: dict[str, type[StreamingAlgorithm]] = {
    "counter": EdgeCounter,
    "constant": ConstantMemory,
    "full": FullMemory,
}


def make_algorithm(name: str, **kwargs) -> StreamingAlgorithm:
    if name == "prefix":
        return PrefixMemory(**kwargs)
    try:
        return REGISTRY[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown streaming algorithm {name!r}; choose from {sorted([*REGISTRY, 'prefix'])}") from None


def trivial_stream_approx(stream: UGInstance | Iterable[Constraint], r: int | None = None) -> float:
    """The counting r-approximation |E| / r, computed with a single counter."""
    if isinstance(stream, UGInstance):
        r, constraints = stream.r, stream.constraints
    else:
        if r is None:
            raise ValueError("r is required for a bare constraint stream")
        constraints = stream
    alg = EdgeCounter()
    state = alg.init(r, 0, 0)
    for c in constraints:
        state = alg.update(state, c)
    return alg.output(state)


# Memory-state laws under the Y and N stage distributions.


@dataclass(frozen=True)
class StreamParams:
    n: int
    t: int
    r: int
    alpha: float | Fraction = 1

    def __post_init__(self) -> None:
        edge_count(self.n, self.t, self.alpha)

    @property
    def edges_per_stage(self) -> int:
        return edge_count(self.n, self.t, self.alpha)


class _TooLarge(Exception):
    pass


def _stage_law(params: StreamParams, label: Label, z: ZrString | None) -> list[tuple[float, tuple[Constraint, ...]]]:
    matchings = enumerate_hypermatchings(params.n, params.t, params.alpha, cap=10**4)
    out = []
    if label == "Y":
        for M in matchings:
            out.append((1 / len(matchings), stage_constraints(M, planted_targets(M, z))))
        return out
    k, r = params.edges_per_stage, params.r
    weight = 1 / (len(matchings) * r**k)
    for M in matchings:
        for targets in np.ndindex(*(r,) * k):
            out.append((weight, stage_constraints(M, targets)))
    return out


def _advance(alg: StreamingAlgorithm, dist: dict, law: list, budget: list[int]) -> dict:
    out: dict = {}
    budget[0] -= len(dist) * len(law)
    if budget[0] < 0:
        raise _TooLarge
    for state, ps in dist.items():
        for pl, constraints in law:
            s = state
            for c in constraints:
                s = alg.update(s, c)
            out[s] = out.get(s, 0.0) + ps * pl
    return out


def exact_state_laws(alg: StreamingAlgorithm, params: StreamParams, labels: list[Label]) -> list[dict]:
    """Law of the memory after each prefix of the stage sequence ``labels``.

    Y stages share one uniformly random planted z, so the laws are
    computed per z and then averaged. Returns len(labels) + 1 laws.
    """
    r, n = params.r, params.n
    budget = [EXACT_WORK_BUDGET]
    init = alg.init(r, n, params.t)
    no_law = _stage_law(params, "N", None) if "N" in labels else []
    zs = list(np.ndindex(*(r,) * n)) if "Y" in labels else [None]
    if len(zs) * max(len(no_law), 1) > EXACT_WORK_BUDGET:
        raise _TooLarge
    per_z: list[list[dict]] = []
    for zt in zs:
        z = ZrString(r, zt) if zt is not None else None
        yes_law = _stage_law(params, "Y", z) if z is not None else []
        laws = [{init: 1.0}]
        for label in labels:
            laws.append(_advance(alg, laws[-1], yes_law if label == "Y" else no_law, budget))
        per_z.append(laws)
    weight = 1 / len(zs)
    return [mixture((weight, laws[j]) for laws in per_z) for j in range(len(labels) + 1)]


def _sample_states(alg: StreamingAlgorithm, params: StreamParams, labels: list[Label], rng: np.random.Generator) -> list[Hashable]:
    r, n, t = params.r, params.n, params.t
    z = ZrString.random(r, n, rng)
    state = alg.init(r, n, t)
    states = [state]
    for label in labels:
        for c in sample_stage(label, z, n, t, r, params.alpha, rng):
            state = alg.update(state, c)
        states.append(state)
    return states


def sampled_state_laws(alg: StreamingAlgorithm, params: StreamParams, labels: list[Label], trials: int, rng: np.random.Generator) -> list[dict]:
    counts = [Counter() for _ in range(len(labels) + 1)]
    for _ in range(trials):
        for j, s in enumerate(_sample_states(alg, params, labels, rng)):
            counts[j][s] += 1
    if any(len(c) > MAX_HISTOGRAM_STATES for c in counts):
        raise ValueError(f"more than {MAX_HISTOGRAM_STATES} distinct memory states observed")
    return [{s: c / trials for s, c in cnt.items()} for cnt in counts]


def state_laws(alg: StreamingAlgorithm, params: StreamParams, labels: list[Label], trials: int, rng: np.random.Generator, exact: bool | None = None) -> tuple[list[dict], bool]:
    """Exact laws when enumeration fits the work budget, otherwise histograms."""
    if exact is not False:
        try:
            return exact_state_laws(alg, params, labels), True
        except (_TooLarge, ValueError):
            if exact:
                raise
    return sampled_state_laws(alg, params, labels, trials, rng), False


@dataclass
class TvdProfile:
    """Per-stage tvd between Y-fed and N-fed memory; entry j is after j stages."""

    values: list[float]
    exact: bool
    trials: int = 0

    @property
    def increments(self) -> list[float]:
        return [b - a for a, b in zip(self.values, self.values[1:])]

    @property
    def informative_index(self) -> int:
        """Stage j (1-based) with the largest jump values[j] - values[j-1]."""
        inc = self.increments
        return 1 + int(np.argmax(inc)) if inc else 0

    @property
    def increment(self) -> float:
        inc = self.increments
        return max(inc) if inc else 0.0

    @property
    def average_increment(self) -> float:
        k = len(self.values) - 1
        return (self.values[-1] - self.values[0]) / k if k else 0.0


def find_informative_index(alg: StreamingAlgorithm, k: int, params: StreamParams, trials: int = 2000, seed: SeedLike = None, exact: bool | None = None) -> TvdProfile:
    rng = as_generator(seed)
    yes, exact_y = state_laws(alg, params, ["Y"] * k, trials, rng, exact)
    no, exact_n = state_laws(alg, params, ["N"] * k, trials, rng, exact_y and exact is not False)
    values = [float(tvd(a, b)) for a, b in zip(yes, no)]
    values[0] = 0.0
    return TvdProfile(values, exact_y and exact_n, 0 if exact_y and exact_n else trials)


@dataclass
class ReductionResult:
    bias: float
    stderr: float
    accept_yes: float
    accept_no: float
    table_tvd: float
    exact_tables: bool
    trials: int
    details: dict = field(default_factory=dict)


def run_reduction(
    alg: StreamingAlgorithm,
    j_star: int,
    params: StreamParams,
    trials: int = 10_000,
    seed: SeedLike = None,
    exact: bool | None = None,
) -> ReductionResult:
    """Turn a streaming algorithm into a one-way protocol for hidden hypermatching.

    Alice feeds j_star planted stages built on her own x; Bob appends one
    constraint per edge of his matching with his w as targets and compares
    the likelihood of the resulting memory under the two hypotheses.
    """
    rng = as_generator(seed)
    yes_laws, exact_y = state_laws(alg, params, ["Y"] * (j_star + 1), trials, rng, exact)
    no_laws, exact_n = state_laws(alg, params, ["Y"] * j_star + ["N"], trials, rng, exact_y and exact is not False)
    p_yes, p_no = yes_laws[-1], no_laws[-1]

    accepted = {"YES": 0, "NO": 0}
    seen = {"YES": 0, "NO": 0}
    r, n, t = params.r, params.n, params.t
    for trial in range(trials):
        label = "YES" if trial % 2 == 0 else "NO"
        inst = sample_hh_instance(n, t, params.alpha, r, label, rng)
        state = alg.init(r, n, t)
        for _ in range(j_star):
            for c in sample_stage("Y", inst.x, n, t, r, params.alpha, rng):
                state = alg.update(state, c)
        for e, q in zip(inst.M.edges, inst.w):
            state = alg.update(state, (e, q))
        seen[label] += 1
        if p_yes.get(state, 0.0) >= p_no.get(state, 0.0):
            accepted[label] += 1

    a_yes = accepted["YES"] / max(seen["YES"], 1)
    a_no = accepted["NO"] / max(seen["NO"], 1)
    stderr = math.sqrt(a_yes * (1 - a_yes) / max(seen["YES"], 1) + a_no * (1 - a_no) / max(seen["NO"], 1))
    return ReductionResult(
        bias=a_yes - a_no,
        stderr=stderr,
        accept_yes=a_yes,
        accept_no=a_no,
        table_tvd=float(tvd(p_yes, p_no)),
        exact_tables=exact_y and exact_n,
        trials=trials,
    )
