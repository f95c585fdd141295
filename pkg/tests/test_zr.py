from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from hyperzr.zr import (
    Hypermatching,
    ZrString,
    all_strings,
    apply_matching,
    apply_matching_batch,
    count_hypermatchings,
    edge_count,
    enumerate_hypermatchings,
    hamming_weight,
    sample_hypermatching,
    string_index,
    zr_dot,
)


def brute_matchings(n: int, t: int, k: int) -> set[tuple[tuple[int, ...], ...]]:
    """All sets of k disjoint t-subsets of range(n), as sorted edge tuples."""
    found = set()
    for edges in itertools.combinations(itertools.combinations(range(n), t), k):
        used = [v for e in edges for v in e]
        if len(set(used)) == len(used):
            found.add(tuple(sorted(edges)))
    return found


@pytest.mark.parametrize(
    "r, entries, expected",
    [(3, (0, 0, 0), 0), (3, (1, 0, 2), 2), (5, (4, 4, 4, 4), 4), (2, (), 0)],
)
def test_hamming_weight(r, entries, expected):
    assert hamming_weight(ZrString(r, entries)) == expected


@pytest.mark.parametrize(
    "r, s, x, expected",
    [(2, (1, 1), (1, 1), 0), (3, (1, 2), (2, 1), 1), (4, (0, 0, 0), (3, 1, 2), 0), (5, (2, 3), (4, 4), 0)],
)
def test_zr_dot(r, s, x, expected):
    assert zr_dot(ZrString(r, s), ZrString(r, x)) == expected


@pytest.mark.parametrize("a, b", [(ZrString(2, (1,)), ZrString(3, (1,))), (ZrString(3, (1,)), ZrString(3, (1, 2)))])
def test_zr_dot_rejects_mismatch(a, b):
    with pytest.raises(ValueError):
        zr_dot(a, b)


@pytest.mark.parametrize("entries", [(0, 3), (-1, 0)])
def test_zrstring_rejects_out_of_range(entries):
    with pytest.raises(ValueError):
        ZrString(3, entries)


@pytest.mark.parametrize(
    "n, t, edges, r, x, expected",
    [
        (2, 2, [(0, 1)], 2, (1, 1), (0,)),
        (4, 2, [(0, 1), (2, 3)], 3, (1, 2, 1, 2), (0, 0)),
        (3, 3, [(0, 1, 2)], 2, (1, 1, 0), (0,)),
        (4, 2, [(2, 3)], 5, (1, 2, 3, 4), (2,)),
    ],
)
def test_apply_matching_examples(n, t, edges, r, x, expected):
    M = Hypermatching(n, t, tuple(edges))
    assert apply_matching(M, ZrString(r, x)).entries == expected


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_apply_matching_is_linear(r, seed):
    rng = np.random.default_rng(seed)
    M = sample_hypermatching(6, 2, 1, rng)
    x, y = ZrString.random(r, 6, rng), ZrString.random(r, 6, rng)
    lhs = apply_matching(M, x + y)
    rhs = apply_matching(M, x) + apply_matching(M, y)
    assert lhs == rhs


@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_batch_matches_single(r, seed):
    rng = np.random.default_rng(seed)
    M = sample_hypermatching(6, 3, Fraction(1, 2), rng)
    xs = all_strings(r, 6)[rng.choice(r**6, size=20)]
    batch = apply_matching_batch(M, xs, r)
    for row, x in zip(batch, xs):
        assert tuple(row) == apply_matching(M, ZrString(r, tuple(x))).entries


def test_all_strings_order_matches_index():
    xs = all_strings(3, 3)
    assert xs.shape == (27, 3)
    for k, x in enumerate(xs):
        assert string_index(x, 3) == k
        assert ZrString(3, tuple(x)).index() == k
    assert tuple(xs[1]) == (0, 0, 1)


@pytest.mark.parametrize(
    "edges",
    [[(0, 1), (1, 2)], [(0, 1, 2)], [(0, 4)], []],
)
def test_hypermatching_rejects_invalid(edges):
    with pytest.raises(ValueError):
        Hypermatching(4, 2, tuple(edges))


def test_hypermatching_canonical_form():
    M = Hypermatching(6, 2, ((5, 3), (1, 0)))
    assert M.edges == ((0, 1), (3, 5))
    assert M == Hypermatching(6, 2, ((0, 1), (3, 5)))
    assert M.alpha == Fraction(2, 3)


@pytest.mark.parametrize("n, t, alpha", [(5, 2, 1), (4, 2, Fraction(1, 3)), (6, 3, 0), (6, 3, Fraction(3, 2))])
def test_edge_count_rejects(n, t, alpha):
    with pytest.raises(ValueError):
        edge_count(n, t, alpha)


@pytest.mark.parametrize(
    "n, t, alpha, expected",
    [(4, 2, 1, 3), (6, 3, 1, 10), (2, 2, 1, 1), (4, 2, Fraction(1, 2), 6), (8, 2, 1, 105), (6, 2, Fraction(1, 3), 15)],
)
def test_count_examples(n, t, alpha, expected):
    assert count_hypermatchings(n, t, alpha) == expected
    assert len(enumerate_hypermatchings(n, t, alpha)) == expected


FEASIBLE = [
    (n, t, Fraction(k * t, n))
    for n in range(2, 11)
    for t in range(2, n + 1)
    if n % t == 0
    for k in range(1, n // t + 1)
]


@pytest.mark.parametrize("n, t, alpha", FEASIBLE)
def test_count_equals_enumeration(n, t, alpha):
    total = count_hypermatchings(n, t, alpha)
    if total > 10**4:
        pytest.skip("beyond the enumeration scale of this check")
    listed = enumerate_hypermatchings(n, t, alpha)
    assert len(listed) == total
    assert len({m.edges for m in listed}) == total
    k = edge_count(n, t, alpha)
    if math.comb(math.comb(n, t), k) <= 2 * 10**5:
        assert {m.edges for m in listed} == brute_matchings(n, t, k)


def test_count_is_exact_big_integer():
    value = count_hypermatchings(60, 3, 1)
    assert value == math.factorial(60) // (math.factorial(3) ** 20 * math.factorial(20))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        enumerate_hypermatchings(12, 2, 1, cap=100)


def test_sample_unique_matching():
    assert sample_hypermatching(2, 2, 1, seed=7).edges == ((0, 1),)


def test_sample_deterministic():
    a = sample_hypermatching(12, 3, 1, seed=3)
    b = sample_hypermatching(12, 3, 1, seed=3)
    assert a == b


@given(st.sampled_from(FEASIBLE), st.integers(0, 2**31 - 1))
def test_sampled_matchings_are_valid(params, seed):
    n, t, alpha = params
    M = sample_hypermatching(n, t, alpha, seed)
    assert M.num_edges == edge_count(n, t, alpha)
    assert all(len(e) == t and list(e) == sorted(e) for e in M.edges)
    assert len(M.matched_vertices()) == M.num_edges * t
    assert [e[0] for e in M.edges] == sorted(e[0] for e in M.edges)


@pytest.mark.parametrize("n, t, alpha", [(4, 2, 1), (4, 2, Fraction(1, 2)), (6, 3, 1), (6, 2, Fraction(2, 3))])
def test_sampling_is_uniform(n, t, alpha):
    support = [m.edges for m in enumerate_hypermatchings(n, t, alpha)]
    rng = np.random.default_rng(2024)
    counts = dict.fromkeys(support, 0)
    for _ in range(10_000):
        counts[sample_hypermatching(n, t, alpha, rng).edges] += 1
    assert len(counts) == len(support)
    assert chisquare(list(counts.values())).pvalue > 0.01


def test_half_matching_support_is_six_edges():
    seen = {sample_hypermatching(4, 2, Fraction(1, 2), s).edges for s in range(400)}
    assert seen == {((a, b),) for a, b in itertools.combinations(range(4), 2)}
