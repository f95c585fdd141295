"""Verification suites: seeded batches of checks that produce flat report rows.

Each suite is a list of independent tasks. Task ``k`` of a run with root
seed ``s`` draws from ``default_rng([s, k])`` so results do not depend on
scheduling, and rows are assembled in task order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Literal

import numpy as np

from . import cyclotomic
from . import hidden_matching as hm
from . import inequalities as ineq
from . import ldc
from . import streaming as ug
from .distributions import pushforward, tvd
from .matfourier import MatrixFunction, random_density_matrix
from .zr import ZrString, all_strings, enumerate_hypermatchings, iter_strings

SUITES = ("inequalities", "hh", "ug", "ldc")
Kind = Literal["hard", "statistical"]


@dataclass
class CheckRow:
    anchor: str
    params: dict[str, Any]
    lhs: float
    rhs: float
    slack: float
    passed: bool
    kind: Kind = "hard"
    suite: str = ""

    def __post_init__(self) -> None:
        self.lhs, self.rhs, self.slack = float(self.lhs), float(self.rhs), float(self.slack)
        self.passed = bool(self.passed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "anchor": self.anchor,
            "kind": self.kind,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass
class SuiteConfig:
    suite: str = "all"
    seed: int = 0
    trials: int | None = None
    tol: float = ineq.DEFAULT_TOL
    threads: int = 1
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.suite not in (*SUITES, "all"):
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join((*SUITES, 'all'))}")
        if self.threads < 1:
            raise ValueError(f"threads must be positive, got {self.threads}")
        if self.trials is not None and self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")


@dataclass
class SuiteResult:
    suite: str
    params: dict[str, Any]
    rows: list[CheckRow]

    @property
    def hard_failures(self) -> list[CheckRow]:
        return [row for row in self.rows if row.kind == "hard" and not row.passed]

    @property
    def warnings(self) -> list[CheckRow]:
        return [row for row in self.rows if row.kind == "statistical" and not row.passed]

    def summary(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "params": self.params,
            "checks": [row.to_dict() for row in self.rows],
            "failures": [row.anchor for row in self.hard_failures],
            "warnings": [row.anchor for row in self.warnings],
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["suite", "anchor", "kind", "params", "lhs", "rhs", "slack", "pass"])
        for row in self.rows:
            writer.writerow(
                [row.suite, row.anchor, row.kind, json.dumps(row.params, sort_keys=True), repr(row.lhs), repr(row.rhs), repr(row.slack), int(row.passed)]
            )
        return buf.getvalue()


Task = Callable[[np.random.Generator], list[CheckRow]]


class SuiteAbort(RuntimeError):
    """An inequality failed by more than round-off can explain."""


def _inequality_row(anchor: str, reports: list[ineq.InequalityReport], params: dict[str, Any], tol: float) -> CheckRow:
    worst = min(reports, key=lambda rep: rep.min_slack)
    slack = worst.min_slack
    if worst.hard_failure:
        raise SuiteAbort(f"{anchor} violated by {-slack:.3e} at {worst.params}")
    return CheckRow(anchor, {**params, "count": len(reports)}, worst.lhs, worst.rhs, slack, slack >= -tol)


def _equality_row(anchor: str, params: dict[str, Any], measured: float, expected: float, tol: float, kind: Kind = "hard") -> CheckRow:
    slack = tol - abs(measured - expected)
    return CheckRow(anchor, params, float(measured), float(expected), float(slack), slack >= 0, kind)


def _random_stack(rng: np.random.Generator, r: int, m: int) -> np.ndarray:
    return rng.standard_normal((r, m, m)) + 1j * rng.standard_normal((r, m, m))


# Inequalities.

INEQUALITY_DEFAULTS = {
    "r_values": [2, 3, 4, 5],
    "p_grid": [round(1 + 0.1 * k, 1) for k in range(11)],
    "max_side": 4,
    "hyper_r": [2, 3, 4],
    "hyper_n": [1, 2, 3],
    "delta_points": 10,
}


def inequality_tasks(params: dict[str, Any], trials: int, tol: float) -> list[Task]:
    tasks: list[Task] = []

    def bcl_cell(r: int, p: float) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            main, weak = [], []
            for _ in range(trials):
                A = _random_stack(rng, r, int(rng.integers(1, params["max_side"] + 1)))
                main.append(ineq.check_bcl(A, p, tol=tol))
                weak.append(ineq.check_weak_bcl(A, p, tol=tol))
            cell = {"r": r, "p": p}
            return [_inequality_row("bcl", main, cell, tol), _inequality_row("bcl-weak", weak, cell, tol)]

        return run

    for r in params["r_values"]:
        for p in params["p_grid"]:
            tasks.append(bcl_cell(r, p))

    def zeta_checks(rng: np.random.Generator) -> list[CheckRow]:
        rows = []
        gaps = [ineq.zeta(p, 2) - (p - 1) for p in params["p_grid"]]
        rows.append(_equality_row("zeta-two", {}, max(abs(g) for g in gaps), 0.0, 1e-15))
        floor = min(ineq.zeta(p, r) - (p - 1) / (r - 1) for p in params["p_grid"] for r in range(2, 11))
        rows.append(CheckRow("zeta-floor", {}, floor, 0.0, floor, floor >= -1e-15))
        return rows

    tasks.append(zeta_checks)

    def orthogonal(rng: np.random.Generator) -> list[CheckRow]:
        reports = []
        for _ in range(trials):
            p = float(rng.choice(params["p_grid"]))
            m = int(rng.integers(1, params["max_side"] + 1))
            Z = _random_stack(rng, 1, m)[0]
            reports.append(ineq.check_orthogonal_convexity(Z, ineq.orthogonal_partner(Z, p, rng), p, tol=tol))
        return [_inequality_row("orthogonal-convexity", reports, {}, tol)]

    tasks.append(orthogonal)

    def embedding(rng: np.random.Generator) -> list[CheckRow]:
        ok = 0
        for _ in range(trials):
            r = int(rng.choice(params["r_values"]))
            ineq.block_embedding(_random_stack(rng, r, int(rng.integers(1, 4))), p=float(rng.choice(params["p_grid"])))
            ok += 1
        return [CheckRow("block-embedding", {"count": ok}, ok, trials, 0.0, ok == trials)]

    tasks.append(embedding)

    def hyper(r: int, n: int) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            reports = []
            for _ in range(max(1, trials // 5)):
                p = float(rng.choice(params["p_grid"]))
                m = int(rng.integers(1, params["max_side"] + 1))
                f = MatrixFunction(r, n, _random_stack(rng, r**n, m))
                reports.append(ineq.check_hypercontractivity(f, p, math.sqrt(ineq.zeta(p, r)), tol=tol))
            return [_inequality_row("hypercontractivity", reports, {"r": r, "n": n}, tol)]

        return run

    for r in params["hyper_r"]:
        for n in params["hyper_n"]:
            tasks.append(hyper(r, n))

    def density(rng: np.random.Generator) -> list[CheckRow]:
        r, n, qubits = 3, 2, 2
        reports = []
        for _ in range(max(1, trials // 5)):
            f = MatrixFunction(r, n, np.stack([random_density_matrix(2**qubits, rng) for _ in range(r**n)]))
            for delta in np.linspace(0, 1 / (r - 1), params["delta_points"]):
                reports.append(ineq.check_density_fourier_bound(f, float(delta), tol=tol))
        return [_inequality_row("density-fourier-bound", reports, {"r": r, "n": n, "qubits": qubits}, tol)]

    def kkl(rng: np.random.Generator) -> list[CheckRow]:
        r, n = 3, 4
        reports = []
        for _ in range(trials):
            indicator = (rng.random(r**n) < rng.random()).astype(int)
            for delta in np.linspace(0, 1 / r, params["delta_points"]):
                reports.append(ineq.check_kkl(indicator, r, float(delta), tol=tol))
        return [_inequality_row("kkl", reports, {"r": r, "n": n}, tol)]

    def minkowski(rng: np.random.Generator) -> list[CheckRow]:
        reports = []
        for _ in range(trials):
            q1 = 1 + 2 * rng.random()
            q2 = q1 + 2 * rng.random()
            F = rng.random(tuple(rng.integers(1, 6, size=2)))
            reports.append(ineq.check_minkowski(F, q1, q2, normalized=bool(rng.integers(2)), tol=tol))
        return [_inequality_row("minkowski", reports, {}, tol)]

    tasks += [density, kkl, minkowski]
    return tasks


# Hidden hypermatching.

HH_DEFAULTS = {"r_values": [2, 3, 4, 5], "n": 6, "exhaustive": [[2, 4, 2], [3, 3, 3], [2, 6, 3]]}


def hh_tasks(params: dict[str, Any], trials: int, tol: float) -> list[Task]:
    tasks: list[Task] = []
    n = params["n"]

    def closed_form(r: int) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            rows = []
            x = ZrString.random(r, n, rng)
            worst = 0.0
            for e in [(a, b) for a in range(n) for b in range(a + 1, n)][:6]:
                for ell in range(r):
                    sim = hm.edge_outcome_distribution(x, e, ell)
                    worst = max(worst, float(np.abs(sim - hm.measurement_distribution(r, ell, x[e[0]], x[e[1]])).max()))
            rows.append(_equality_row("qudit-vs-closed-form", {"r": r}, worst, 0.0, 1e-9))
            ell = (x[0] + x[1] + 1) % r
            rows.append(_equality_row("collision-acceptance", {"r": r}, hm.edge_outcome_distribution(x, (0, 1), ell)[ell], float(hm.collision_acceptance(r)), 1e-9))
            yes = hm.sample_hh_instance(n, 2, 1, r, "YES", rng)
            rows.append(_equality_row("quantum-yes-certain", {"r": r}, hm.quantum_acceptance_probability(yes), 1.0, 1e-9))
            # Single-shot acceptance on edges whose w differs from the true sum.
            M = yes.M
            w = ZrString(r, tuple((v + 1) % r for v in yes.w))
            no = hm.HHInstance(yes.x, M, w, "NO")
            shots = trials
            hits = sum(hm.quantum_protocol_run(no, 1, rng) == "YES" for _ in range(shots))
            rate = hits / shots
            expected = float(hm.collision_acceptance(r))
            sigma = math.sqrt(expected * (1 - expected) / shots)
            rows.append(_equality_row("quantum-no-acceptance", {"r": r, "shots": shots}, rate, expected, max(0.01, 3 * sigma), "statistical"))
            return rows

        return run

    for r in params["r_values"]:
        tasks.append(closed_form(r))

    def u_exhaustive(r: int, n_: int, t: int) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            mismatches = checked = 0
            for M in enumerate_hypermatchings(n_, t, 1):
                for w in iter_strings(r, M.num_edges):
                    for S in iter_strings(r, n_):
                        checked += 1
                        if not cyclotomic.equal(hm.u_coefficients(M, w, S, r), hm.u_closed_form(M, w, S, r), r):
                            mismatches += 1
            return [CheckRow("u-closed-form", {"r": r, "n": n_, "t": t, "checked": checked}, mismatches, 0, -mismatches, mismatches == 0)]

        return run

    for r, n_, t in params["exhaustive"]:
        tasks.append(u_exhaustive(r, n_, t))

    def delta_probability(rng: np.random.Generator) -> list[CheckRow]:
        mismatches = checked = 0
        for r, n_, t, alpha in [(2, 4, 2, 1), (3, 6, 3, 1), (3, 6, 2, 1), (2, 6, 2, Fraction(2, 3)), (3, 8, 2, Fraction(1, 2))]:
            matchings = enumerate_hypermatchings(n_, t, alpha)
            for counts in itertools.product(range(n_ // t + 1), repeat=r - 1):
                if sum(counts) * t > n_:
                    continue
                S = hm.shape_string(counts, n_, t, r)
                frac = Fraction(sum(hm.delta_membership(S, M, allow_zero=True) for M in matchings), len(matchings))
                checked += 1
                mismatches += frac != hm.prob_delta(counts, n_, t, alpha)
        spot = hm.prob_delta([1], 4, 2, 1)
        return [
            CheckRow("delta-probability", {"checked": checked}, mismatches, 0, -mismatches, mismatches == 0),
            _equality_row("delta-probability-spot", {"r": 2, "n": 4, "t": 2}, float(spot), 1 / 3, 0.0 if spot == Fraction(1, 3) else -1.0),
        ]

    def one_sided(rng: np.random.Generator) -> list[CheckRow]:
        wrong = 0
        for _ in range(trials // 10 or 1):
            inst = hm.sample_hh_instance(n, 2, 1, int(rng.choice(params["r_values"])), "YES", rng)
            wrong += hm.classical_protocol_run(inst, int(rng.integers(0, n + 1)), rng) == "NO"
            wrong += hm.quantum_protocol_run(inst, 2, rng) == "NO"
        return [CheckRow("one-sided-error", {}, wrong, 0, -wrong, wrong == 0)]

    def bias_point(rng: np.random.Generator) -> list[CheckRow]:
        r = 3
        M = enumerate_hypermatchings(4, 2, 1)[0]
        bias = hm.message_set_bias([ZrString.random(r, 4, rng)], M, r)
        expected = 2 * (1 - Fraction(1, r**M.num_edges))
        return [_equality_row("message-bias-point", {"r": r}, float(bias.tvd), float(expected), 0.0 if bias.tvd == expected else -1.0)]

    tasks += [delta_probability, one_sided, bias_point]
    return tasks


# Streaming.

UG_DEFAULTS = {"eps": 0.5, "instances": 200, "gap_samples": 100}


def ug_tasks(params: dict[str, Any], trials: int, tol: float) -> list[Task]:
    def approx(rng: np.random.Generator) -> list[CheckRow]:
        bad = y_bad = 0
        for k in range(params["instances"]):
            r = 2 + k % 2
            n = int(rng.choice([4, 6, 8, 10, 12] if r == 2 else [4, 6, 8]))
            label = "Y" if k % 4 < 2 else "N"
            inst = ug.sample_ug(label, n, 2, r, int(rng.integers(1, 6)), 1, rng)
            opt, _ = ug.ug_opt_bruteforce(inst)
            value = ug.trivial_stream_approx(inst)
            bad += not (opt / r - 1e-12 <= value <= opt + 1e-12)
            y_bad += label == "Y" and opt != len(inst)
        return [
            CheckRow("trivial-approx-range", {"instances": params["instances"]}, bad, 0, -bad, bad == 0),
            CheckRow("planted-opt", {}, y_bad, 0, -y_bad, y_bad == 0),
        ]

    def gap(r: int, n: int) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            eps = params["eps"]
            k = ug.stages_for_gap(n, 2, r, 1, eps)
            samples = params["gap_samples"]
            good = 0
            for _ in range(samples):
                inst = ug.sample_ug("N", n, 2, r, k, 1, rng)
                good += ug.ug_opt_bruteforce(inst)[0] / len(inst) <= (1 + eps) / r
            rate = good / samples
            return [CheckRow("unplanted-gap", {"r": r, "n": n, "k": k, "eps": eps}, rate, 0.99, rate - 0.99, rate >= 0.99, "statistical")]

        return run

    def reduction(r: int) -> Task:
        def run(rng: np.random.Generator) -> list[CheckRow]:
            p = ug.StreamParams(2, 2, r, 1)
            full = ug.run_reduction(ug.FullMemory(), 1, p, trials, rng)
            const = ug.run_reduction(ug.ConstantMemory(), 1, p, trials, rng)
            target = 0.9 * (1 - 1 / r)
            return [
                CheckRow("reduction-full-memory", {"r": r, "trials": trials}, full.bias, target, full.bias - target, full.bias >= target, "statistical"),
                CheckRow("reduction-constant-memory", {"r": r}, const.bias, 0.0, 3 * const.stderr - abs(const.bias), abs(const.bias) <= 3 * const.stderr, "statistical"),
                CheckRow("reduction-tvd-bound", {"r": r}, full.bias, full.table_tvd / 2, full.table_tvd / 2 + 3 * full.stderr - full.bias, full.bias <= full.table_tvd / 2 + 3 * full.stderr, "statistical"),
            ]

        return run

    def profile(rng: np.random.Generator) -> list[CheckRow]:
        rows = []
        for r in (2, 3):
            prof = ug.find_informative_index(ug.FullMemory(), 4, ug.StreamParams(2, 2, r, 1), seed=rng)
            expected = [0.0] + [2 * (1 - r ** (1 - j)) for j in range(1, 5)]
            err = max(abs(a - b) for a, b in zip(prof.values, expected))
            rows.append(_equality_row("tvd-profile", {"r": r}, err, 0.0, 1e-12))
            rows.append(CheckRow("informative-increment", {"r": r}, prof.increment, prof.average_increment, prof.increment - prof.average_increment, prof.increment >= prof.average_increment - 1e-12))
        return rows

    def data_processing(rng: np.random.Generator) -> list[CheckRow]:
        worst = None
        for _ in range(trials // 20 or 1):
            size = int(rng.integers(2, 6))

            def law(k: int) -> dict[int, Fraction]:
                raw = [int(v) + 1 for v in rng.integers(0, 10, size=k)]
                return {i: Fraction(v, sum(raw)) for i, v in enumerate(raw)}

            X, Y, W = law(size), law(size), law(3)
            table = {(a, b): int(rng.integers(0, 3)) for a in range(size) for b in range(3)}
            f = lambda a, b: table[(a, b)]
            gap_ = tvd(X, Y) - tvd(pushforward(X, W, f), pushforward(Y, W, f))
            worst = gap_ if worst is None else min(worst, gap_)
        return [CheckRow("data-processing", {}, float(worst), 0.0, float(worst), worst >= 0)]

    tasks: list[Task] = [approx, gap(2, 12), gap(3, 6), reduction(2), reduction(3), profile, data_processing]
    return tasks


# Locally decodable codes.

LDC_DEFAULTS = {"noise": 0.05}


def ldc_tasks(params: dict[str, Any], trials: int, tol: float) -> list[Task]:
    def clean(rng: np.random.Generator) -> list[CheckRow]:
        worst = 1.0
        for n in range(1, 5):
            for r in range(2, 6):
                code = ldc.hadamard_code(r, n)
                worst = min(worst, float(ldc.exact_success(code, ldc.hadamard_decoder(code)).min()))
        return [_equality_row("hadamard-clean", {}, worst, 1.0, 1e-12)]

    def noisy(rng: np.random.Generator) -> list[CheckRow]:
        delta = params["noise"]
        code = ldc.hadamard_code(3, 6)
        est = ldc.empirical_recovery(code, ldc.hadamard_decoder(code), ldc.random_noise(delta), trials // 10 or 1, rng)
        floor = 1 - 2 * delta - 3 * float(est.stderr.max())
        worst = float(est.success.min())
        return [CheckRow("hadamard-noisy", {"delta": delta, "r": 3, "n": 6}, worst, floor, worst - floor, worst >= floor, "statistical")]

    def good_sets(rng: np.random.Generator) -> list[CheckRow]:
        rows = []
        for r in (2, 3):
            code = ldc.hadamard_code(r, 2)
            dec = ldc.hadamard_decoder(code)
            rep = ldc.smoothness_report(code, dec)
            for i in range(2):
                res = ldc.good_set_matching(code, dec, i)
                low = min(g.correlation for g in res.good) if res.good else -math.inf
                dominated = all(g.fourier_mass >= g.correlation - 1e-12 for g in res.good)
                complete = len(res.good) == len(dec.queries[i])
                size_floor = res.epsilon * code.N / (2 * rep.c * rep.q)
                ok = complete and dominated and low >= res.threshold and len(res.matching) >= size_floor
                rows.append(CheckRow("good-set-certificates", {"r": r, "i": i}, low, res.threshold, low - res.threshold, ok))
        return rows

    def embedding(rng: np.random.Generator) -> list[CheckRow]:
        code = ldc.hadamard_code(2, 2)
        worst = 0.0
        for x in iter_strings(2, 2):
            F = ldc.rank1_embedding(code, x)
            R = F.shape[0]
            for p in (1.0, 1.5, 2.0):
                value = ineq.schatten_norm(F, p, normalized=True) ** p
                worst = max(worst, abs(value - R ** (p - 1)) / R ** (p - 1))
        return [_equality_row("rank-one-norm", {"r": 2, "n": 2}, worst, 0.0, 1e-9)]

    def diagonal(rng: np.random.Generator) -> list[CheckRow]:
        reports = []
        for _ in range(trials // 20 or 1):
            m = int(rng.integers(1, 7))
            reports.append(ineq.check_diagonal_bound(_random_stack(rng, 1, m)[0], float(1 + rng.random()), tol=tol))
        return [_inequality_row("diagonal-pinching", reports, {}, tol)]

    def bound(rng: np.random.Generator) -> list[CheckRow]:
        values = [ldc.min_length_log2(n, 2, 0.5, 0.5) for n in (10, 10**4, 10**5, 10**6, 10**7)]
        monotone = all(a <= b for a, b in zip(values, values[1:]))
        return [CheckRow("length-bound-monotone", {}, values[-1], values[0], values[-1] - values[0], monotone)]

    return [clean, noisy, good_sets, embedding, diagonal, bound]


SUITE_TABLE: dict[str, tuple[Callable, dict[str, Any], int]] = {
    "inequalities": (inequality_tasks, INEQUALITY_DEFAULTS, 50),
    "hh": (hh_tasks, HH_DEFAULTS, 2000),
    "ug": (ug_tasks, UG_DEFAULTS, 4000),
    "ldc": (ldc_tasks, LDC_DEFAULTS, 2000),
}


def run_suite(config: SuiteConfig) -> SuiteResult:
    names = SUITES if config.suite == "all" else (config.suite,)
    tasks: list[tuple[str, Task]] = []
    resolved: dict[str, Any] = {"seed": config.seed, "tol": config.tol}
    for name in names:
        builder, defaults, default_trials = SUITE_TABLE[name]
        params = {**defaults, **config.params.get(name, {})}
        trials = config.trials or default_trials
        resolved[name] = {**params, "trials": trials}
        tasks += [(name, task) for task in builder(params, trials, config.tol)]

    def execute(item: tuple[int, tuple[str, Task]]) -> list[CheckRow]:
        index, (name, task) = item
        rows = task(np.random.default_rng([config.seed, index]))
        for row in rows:
            row.suite = name
        return rows

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        batches = list(pool.map(execute, enumerate(tasks)))
    rows = [row for batch in batches for row in batch]
    return SuiteResult(config.suite, resolved, rows)
