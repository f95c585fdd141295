"""Acceptance criteria 1-11, each reported as one PASS/FAIL line."""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from hyperzr import cyclotomic
from hyperzr.distributions import pushforward, tvd
from hyperzr.hidden_matching import (
    HHInstance,
    collision_acceptance,
    compute_u,
    delta_membership,
    edge_outcome_distribution,
    measurement_distribution,
    prob_delta,
    quantum_protocol_run,
    sample_hh_instance,
    shape_string,
    u_closed_form,
    u_coefficients,
)
from hyperzr.inequalities import (
    check_bcl,
    check_density_fourier_bound,
    check_diagonal_bound,
    check_hypercontractivity,
    check_kkl,
    check_weak_bcl,
    twisted_sums,
    zeta,
)
from hyperzr.ldc import (
    empirical_recovery,
    embedding_side,
    exact_success,
    good_set_matching,
    hadamard_code,
    hadamard_decoder,
    random_noise,
    rank1_embedding,
)
from hyperzr.matfourier import MatrixFunction, random_density_matrix, schatten_norm
from hyperzr.streaming import (
    ConstantMemory,
    FullMemory,
    StreamParams,
    run_reduction,
    sample_ug,
    stages_for_gap,
    trivial_stream_approx,
    ug_opt_bruteforce,
)
from hyperzr.suites import SUITES, SuiteConfig, run_suite
from hyperzr.zr import ZrString, apply_matching, count_hypermatchings, enumerate_hypermatchings, iter_strings, sample_hypermatching

P_GRID = [round(1 + 0.1 * i, 1) for i in range(11)]
TOL = 1e-9


def svd_norm(M: np.ndarray, p: float) -> float:
    return float(np.sum(np.linalg.svd(M, compute_uv=False) ** p) ** (1 / p))


def complex_stack(rng: np.random.Generator, count: int, m: int) -> np.ndarray:
    return rng.standard_normal((count, m, m)) + 1j * rng.standard_normal((count, m, m))


def test_criterion_01_generalized_convexity(acceptance_log):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = {"main": math.inf, "dual": math.inf, "weak": math.inf}
    count = 0
    for r in range(2, 6):
        for p in P_GRID:
            for _ in range(1000):
                A = complex_stack(rng, r, int(rng.integers(1, 5)))
                main = check_bcl(A, p)
                weak = check_weak_bcl(A, p)
                worst["main"] = min(worst["main"], main.slack)
                worst["dual"] = min(worst["dual"], main.companions["dual"].slack)
                worst["weak"] = min(worst["weak"], weak.slack)
                count += 1
    elapsed = time.perf_counter() - start
    passed = min(worst.values()) >= -TOL and elapsed < 60
    acceptance_log(1, passed, f"{count} instances, min slack main={worst['main']:.2e} dual={worst['dual']:.2e} weak={worst['weak']:.2e}, {elapsed:.1f}s")
    assert passed


def test_criterion_02_two_matrix_case(acceptance_log):
    exact = all(zeta(p, 2) == p - 1 for p in np.linspace(1, 2, 101))
    rng = np.random.default_rng(102)
    max_dev, min_slack = 0.0, math.inf
    for _ in range(200):
        m = int(rng.integers(1, 5))
        A, B = complex_stack(rng, 2, m)
        p = float(rng.choice(P_GRID))
        rep = check_bcl([A, B], p, normalize=False)
        lhs = ((svd_norm(A + B, p) ** p + svd_norm(A - B, p) ** p) / 2) ** (2 / p)
        rhs = svd_norm(A, p) ** 2 + (p - 1) * svd_norm(B, p) ** 2
        max_dev = max(max_dev, abs(rep.lhs - lhs) / lhs, abs(rep.rhs - rhs) / rhs)
        min_slack = min(min_slack, check_bcl([A, B], p).min_slack)
    passed = exact and max_dev <= 1e-10 and min_slack >= -TOL
    acceptance_log(2, passed, f"zeta(p,2)=p-1 exact={exact}, 200 pairs max rel dev={max_dev:.1e}, min slack={min_slack:.2e}")
    assert passed


def test_criterion_03_hypercontractivity(acceptance_log):
    rng = np.random.default_rng(103)
    min_slack, max_dev, count = math.inf, 0.0, 0
    for r, n, m, p in itertools.product(range(2, 5), range(1, 4), range(1, 5), P_GRID):
        for _ in range(2):
            f = MatrixFunction(r, n, complex_stack(rng, r**n, m))
            rep = check_hypercontractivity(f, p, math.sqrt(zeta(p, r)))
            min_slack = min(min_slack, rep.slack)
            count += 1
            if n == 1:
                A = complex_stack(rng, r, m)
                g = MatrixFunction(r, 1, twisted_sums(A))
                hyper = check_hypercontractivity(g, p, math.sqrt(zeta(p, r)), normalize=False)
                bcl = check_bcl(A, p, normalize=False)
                max_dev = max(max_dev, abs(hyper.lhs**2 - bcl.rhs) / bcl.rhs, abs(hyper.rhs**2 - bcl.lhs) / bcl.lhs)
    passed = min_slack >= -TOL and max_dev <= 1e-10
    acceptance_log(3, passed, f"{count} functions, min slack={min_slack:.2e}, single-coordinate vs convexity rel dev={max_dev:.1e}")
    assert passed


def test_criterion_04_density_and_kkl_sweeps(acceptance_log):
    rng = np.random.default_rng(104)
    start = time.perf_counter()
    min_density, min_kkl, count = math.inf, math.inf, 0
    for r, n, qubits in [(3, 2, 1), (3, 2, 2), (2, 3, 1), (2, 2, 2), (4, 2, 1)]:
        side = 2**qubits
        for delta in np.linspace(0, 1 / (r - 1), 10):
            for _ in range(20):
                f = MatrixFunction(r, n, np.stack([random_density_matrix(side, rng) for _ in range(r**n)]))
                min_density = min(min_density, check_density_fourier_bound(f, delta).slack)
                count += 1
    for delta in np.linspace(0, 1 / 3, 10):
        for _ in range(100):
            indicator = (rng.random(81) < rng.random()).astype(int)
            min_kkl = min(min_kkl, check_kkl(indicator, 3, delta).slack)
            count += 1
    elapsed = time.perf_counter() - start
    passed = min(min_density, min_kkl) >= -TOL and elapsed < 60
    acceptance_log(4, passed, f"{count} checks, min slack density={min_density:.2e} kkl={min_kkl:.2e}, {elapsed:.1f}s")
    assert passed


def strict_no_instance(n: int, r: int, rng: np.random.Generator) -> HHInstance:
    x = ZrString.random(r, n, rng)
    M = sample_hypermatching(n, 2, 1, rng)
    w = ZrString(r, tuple((v + int(rng.integers(1, r))) % r for v in apply_matching(M, x).entries))
    return HHInstance(x, M, w, "NO")


def test_criterion_05_quantum_protocol(acceptance_log):
    rng = np.random.default_rng(105)
    worst_yes = 0.0
    for r in range(2, 6):
        for n in (2, 4, 6, 8):
            for _ in range(3):
                inst = sample_hh_instance(n, 2, 1, r, "YES", rng)
                for e, ell in zip(inst.M.edges, inst.w):
                    worst_yes = max(worst_yes, abs(edge_outcome_distribution(inst.x, e, ell)[ell] - 1))
    shots = 10_000
    deviations = {}
    for r in range(2, 6):
        accepted = sum(quantum_protocol_run(strict_no_instance(4, r, rng), 1, rng) == "YES" for _ in range(shots))
        deviations[r] = abs(accepted / shots - float(collision_acceptance(r)))
    closed_ok = all(
        measurement_distribution(r, ell, 0, 1)[ell] == pytest.approx(float(collision_acceptance(r)), abs=1e-12)
        for r in range(2, 6)
        for ell in range(r)
        if ell != 1 % r
    )
    passed = worst_yes <= 1e-9 and max(deviations.values()) <= 0.01 and closed_ok
    detail = ", ".join(f"r={r} dev={d:.4f}" for r, d in deviations.items())
    acceptance_log(5, passed, f"YES max |Pr-1|={worst_yes:.1e}; NO single-shot vs 1/2 or 1/2+1/(2r^2): {detail}")
    assert passed


def test_criterion_06_u_quantity(acceptance_log):
    checked, mismatches, max_float = 0, 0, 0.0
    for r, n, t in [(2, 4, 2), (3, 3, 3), (2, 6, 3)]:
        for M in enumerate_hypermatchings(n, t, 1):
            for w in iter_strings(r, M.num_edges):
                for S in iter_strings(r, n):
                    exact = u_coefficients(M, w, S, r)
                    closed = u_closed_form(M, w, S, r)
                    if not cyclotomic.equal(exact, closed, r):
                        mismatches += 1
                    value = compute_u(M, w, S, r)
                    if delta_membership(S, M):
                        target = 0.5 * r ** -M.num_edges / count_hypermatchings(n, t, 1)
                        max_float = max(max_float, abs(abs(value) - target))
                    else:
                        max_float = max(max_float, abs(value))
                    checked += 1
    passed = mismatches == 0 and max_float <= 1e-12
    acceptance_log(6, passed, f"{checked} triples (M,w,S), exact mismatches={mismatches}, float dev={max_float:.1e}")
    assert passed


PROB_DELTA_CASES = [
    (2, 4, 2, 1),
    (2, 4, 2, Fraction(1, 2)),
    (2, 6, 2, 1),
    (3, 6, 2, 1),
    (3, 6, 2, Fraction(2, 3)),
    (3, 6, 3, 1),
    (2, 6, 3, Fraction(1, 2)),
    (4, 8, 2, 1),
    (3, 8, 2, Fraction(1, 2)),
    (2, 8, 4, 1),
    (3, 9, 3, 1),
    (5, 10, 2, 1),
    (2, 10, 2, Fraction(3, 5)),
]


def test_criterion_07_membership_probability(acceptance_log):
    checked, mismatches = 0, 0
    for r, n, t, alpha in PROB_DELTA_CASES:
        matchings = enumerate_hypermatchings(n, t, alpha)
        assert len(matchings) <= 10**4
        edges = matchings[0].num_edges
        for counts in itertools.product(range(edges + 1), repeat=r - 1):
            if sum(counts) * t > n:
                continue
            S = shape_string(counts, n, t, r)
            enumerated = Fraction(sum(delta_membership(S, M, allow_zero=True) for M in matchings), len(matchings))
            mismatches += prob_delta(counts, n, t, alpha) != enumerated
            checked += 1
    spot = prob_delta([1], 4, 2, 1) == Fraction(1, 3)
    passed = mismatches == 0 and spot
    acceptance_log(7, passed, f"{checked} shape vectors over {len(PROB_DELTA_CASES)} parameter sets, mismatches={mismatches}, (2,4,2,1,k=1) -> 1/3: {spot}")
    assert passed


def test_criterion_08_streaming_instances(acceptance_log):
    rng = np.random.default_rng(108)
    shapes = [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3), (10, 2), (12, 2), (12, 3)]
    in_range, y_opt_ok, count = 0, 0, 0
    y_count = 0
    for idx in range(200):
        n, t = shapes[idx % len(shapes)]
        r = 2 if n >= 10 else int(rng.integers(2, 4))
        label = "Y" if idx % 2 == 0 else "N"
        inst = sample_ug(label, n, t, r, int(rng.integers(1, 6)), 1, rng)
        opt = ug_opt_bruteforce(inst)[0]
        approx = trivial_stream_approx(inst)
        in_range += opt / r - 1e-12 <= approx <= opt + 1e-12
        if label == "Y":
            y_count += 1
            y_opt_ok += opt == len(inst)
        count += 1
    eps = 0.5
    gap_results = {}
    for n, t, r in [(4, 2, 2), (3, 3, 3)]:
        k = stages_for_gap(n, t, r, 1, eps)
        good = 0
        for _ in range(100):
            inst = sample_ug("N", n, t, r, k, 1, rng)
            good += ug_opt_bruteforce(inst)[0] <= (1 + eps) / r * len(inst)
        gap_results[(n, t, r, k)] = good
    passed = in_range == count and y_opt_ok == y_count and all(g >= 99 for g in gap_results.values())
    gaps = ", ".join(f"(n={n},t={t},r={r},k={k}): {g}/100" for (n, t, r, k), g in gap_results.items())
    acceptance_log(8, passed, f"approx in [OPT/r, OPT] {in_range}/{count}, planted OPT=|E| {y_opt_ok}/{y_count}, gap {gaps}")
    assert passed


def test_criterion_09_reduction(acceptance_log):
    trials = 10_000
    biases = {}
    ok = True
    for r in (2, 3):
        res = run_reduction(FullMemory(), 1, StreamParams(4, 2, r), trials=trials, seed=109 + r)
        biases[r] = res.bias
        ok &= res.bias >= 0.9 * (1 - 1 / r)
    const = run_reduction(ConstantMemory(), 1, StreamParams(4, 2, 3), trials=trials, seed=112)
    sigma = max(const.stderr, math.sqrt(0.25 * 2 / trials))
    ok &= abs(const.bias) <= 3 * sigma

    rng = np.random.default_rng(109)
    dp_ok = True
    for _ in range(200):
        size, noise, out = int(rng.integers(2, 6)), int(rng.integers(1, 4)), int(rng.integers(2, 5))

        def rand_dist(k):
            raw = rng.integers(1, 30, size=k)
            return {i: Fraction(int(c), int(raw.sum())) for i, c in enumerate(raw)}

        X, Y, W = rand_dist(size), rand_dist(size), rand_dist(noise)
        table = rng.integers(0, out, size=(size, noise))
        f = lambda x, w: int(table[x, w])
        dp_ok &= tvd(pushforward(X, W, f), pushforward(Y, W, f)) <= tvd(X, Y)
    passed = bool(ok and dp_ok)
    detail = ", ".join(f"r={r} full-memory bias={b:.4f} (need {0.9 * (1 - 1 / r):.3f})" for r, b in biases.items())
    acceptance_log(9, passed, f"{detail}; constant-memory bias={const.bias:.4f}; data processing exact on 200 cases: {dp_ok}")
    assert passed


def test_criterion_10_ldc(acceptance_log):
    clean = all(np.all(exact_success(hadamard_code(r, n), hadamard_decoder(hadamard_code(r, n))) == 1.0) for r in range(2, 6) for n in range(1, 5))

    delta, trials = 0.05, 4000
    noisy_ok, worst_margin = True, math.inf
    for r in (2, 3, 5):
        code = hadamard_code(r, 6)
        est = empirical_recovery(code, hadamard_decoder(code), random_noise(delta), trials, seed=110 + r)
        margin = est.success - (1 - 2 * delta - 3 * np.maximum(est.stderr, 1 / trials))
        worst_margin = min(worst_margin, float(margin.min()))
        noisy_ok &= bool(np.all(margin >= 0))

    certified = True
    for r in (2, 3):
        code = hadamard_code(r, 2)
        decoder = hadamard_decoder(code)
        for i in range(2):
            res = good_set_matching(code, decoder, i)
            aligned = {(y, y | (1 << i)) for y in range(code.N) if not (y >> i) & 1}
            certified &= {g.Q for g in res.good} == aligned
            certified &= all(g.correlation >= r * res.epsilon / 2 - 1e-12 for g in res.good)

    rng = np.random.default_rng(110)
    max_dev = 0.0
    for r, n in [(2, 1), (2, 2), (3, 2), (2, 4), (5, 2)]:
        code = hadamard_code(r, n)
        R = embedding_side(code)
        f = rank1_embedding(code, ZrString.random(r, n, rng))
        for p in (1, 1.5, 2):
            max_dev = max(max_dev, abs(schatten_norm(f, p, normalized=True) ** p / R ** (p - 1) - 1))

    diag_min = math.inf
    for _ in range(500):
        m = int(rng.integers(1, 9))
        diag_min = min(diag_min, check_diagonal_bound(complex_stack(rng, 1, m)[0], float(rng.uniform(1, 4))).slack)

    passed = clean and noisy_ok and certified and max_dev <= 1e-9 and diag_min >= -TOL
    acceptance_log(
        10,
        passed,
        f"clean exact={clean}, noisy worst margin={worst_margin:.4f}, good sets certified={certified}, "
        f"rank-one rel dev={max_dev:.1e}, pinching min slack={diag_min:.2e}",
    )
    assert passed


def test_criterion_11_deterministic_csv(acceptance_log):
    same = {}
    for suite in SUITES:
        first = run_suite(SuiteConfig(suite=suite, seed=11, threads=1)).csv_text()
        second = run_suite(SuiteConfig(suite=suite, seed=11, threads=4)).csv_text()
        same[suite] = first == second
    passed = all(same.values())
    acceptance_log(11, passed, "byte-identical reruns: " + ", ".join(f"{s}={v}" for s, v in same.items()))
    assert passed
