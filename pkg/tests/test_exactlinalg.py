"""Tests for exact rank / kernel / Smith normal form machinery."""

from fractions import Fraction
from itertools import combinations, permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensor_rigidity.exactlinalg import (
    GF,
    LARGE_PRIME,
    QQ,
    SECOND_PRIME,
    FieldMatrix,
    SnfResult,
    _mulmod,
    is_prime,
    kernel_basis,
    prime_factors,
    rank,
    smith_normal_form,
    stack_rank,
)


# ---------------------------------------------------------------------------
# modular multiply: exactness against Python big-int arithmetic
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("q", [2, 3, 97, (1 << 31) - 1, SECOND_PRIME, LARGE_PRIME])
def test_mulmod_matches_bigint_reference(q):
    rng = np.random.default_rng(2024)
    a = rng.integers(0, q, size=4000, dtype=np.int64).astype(np.uint64) % np.uint64(q)
    b = rng.integers(0, q, size=4000, dtype=np.int64).astype(np.uint64) % np.uint64(q)
    edge = np.array([0, 1, 2, q - 1, q - 2, min(q - 1, 1 << 31), min(q - 1, (1 << 51) + 3)], dtype=np.uint64)
    a = np.concatenate([a, np.repeat(edge, edge.size)])
    b = np.concatenate([b, np.tile(edge, edge.size)])
    got = _mulmod(a, b, q)
    expected = np.array([(int(x) * int(y)) % q for x, y in zip(a.tolist(), b.tolist())], dtype=np.uint64)
    assert np.array_equal(got, expected)


@given(
    st.integers(min_value=0, max_value=LARGE_PRIME - 1),
    st.integers(min_value=0, max_value=LARGE_PRIME - 1),
)
@settings(max_examples=300, deadline=None)
def test_mulmod_large_prime_hypothesis(a, b):
    got = int(_mulmod(np.uint64(a), np.uint64(b), LARGE_PRIME))
    assert got == (a * b) % LARGE_PRIME


# ---------------------------------------------------------------------------
# rank: independent oracles
# ---------------------------------------------------------------------------


def _det_leibniz(rows):
    """Determinant by the Leibniz permutation formula (independent oracle)."""
    n = len(rows)
    total = Fraction(0)
    for perm in permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = Fraction(1)
        for i in range(n):
            term *= Fraction(rows[i][perm[i]])
        total += sign * term
    return total


def _rank_by_minors(rows):
    """Largest r with a nonsingular r x r submatrix (brute force)."""
    nr, nc = len(rows), len(rows[0]) if rows else 0
    for r in range(min(nr, nc), 0, -1):
        for ri in combinations(range(nr), r):
            for ci in combinations(range(nc), r):
                sub = [[rows[i][j] for j in ci] for i in ri]
                if _det_leibniz(sub) != 0:
                    return r
    return 0


def test_rank_q_matches_minor_oracle_on_small_random_matrices():
    rng = np.random.default_rng(5)
    for _ in range(60):
        nr, nc = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        rows = rng.integers(-4, 5, size=(nr, nc)).tolist()
        m = FieldMatrix.from_rows(rows, QQ)
        assert m.rank() == _rank_by_minors(rows)


def _rank_gf_bruteforce(rows, q):
    """N - dim of the left kernel, counted by full enumeration over GF(q)."""
    nr = len(rows)
    solutions = 0
    for vec in product(range(q), repeat=nr):
        if all(sum(v * row[j] for v, row in zip(vec, rows)) % q == 0 for j in range(len(rows[0]))):
            solutions += 1
    null_dim = round(np.log(solutions) / np.log(q))
    return nr - null_dim


@pytest.mark.parametrize("q", [2, 3])
def test_rank_mod_matches_enumeration_oracle(q):
    rng = np.random.default_rng(13)
    for _ in range(25):
        nr, nc = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        rows = rng.integers(0, q, size=(nr, nc)).tolist()
        m = FieldMatrix.from_rows(rows, GF(q))
        assert m.rank() == _rank_gf_bruteforce(rows, q)


def test_rank_zero_and_identity():
    assert FieldMatrix.zeros(4, 7, QQ).rank() == 0
    assert FieldMatrix.zeros(4, 7, GF(5)).rank() == 0
    assert FieldMatrix.identity(6, QQ).rank() == 6
    assert FieldMatrix.identity(6, GF(2)).rank() == 6


def test_rank_certified_modular_path_agrees_with_bareiss():
    # force the modular path with a matrix wider than the Bareiss threshold
    rng = np.random.default_rng(99)
    small = rng.integers(-3, 4, size=(7, 30))
    wide = np.hstack([small] + [small for _ in range(7)])  # 7 x 240, rank == rank(small)
    m = FieldMatrix.from_rows(wide.tolist(), QQ)
    m_small = FieldMatrix.from_rows(small.tolist(), QQ)
    assert m.ncols > 200
    assert m.rank() == m_small.rank()


def test_rank_over_gfp_never_exceeds_rational_rank():
    rng = np.random.default_rng(7)
    for _ in range(200):
        nr, nc = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        rows = rng.integers(0, 2, size=(nr, nc)).tolist()
        rq = FieldMatrix.from_rows(rows, QQ).rank()
        rp = FieldMatrix.from_rows(rows, GF(LARGE_PRIME)).rank()
        assert rp <= rq
        assert rp == rq  # 0/1 matrices this small cannot have 61-bit bad primes


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("field", [QQ, GF(2), GF(7), GF(LARGE_PRIME)])
def test_kernel_vectors_annihilate_exactly(field):
    rng = np.random.default_rng(21)
    for _ in range(40):
        nr, nc = int(rng.integers(1, 6)), int(rng.integers(1, 7))
        rows = rng.integers(-3, 4, size=(nr, nc)).tolist()
        m = FieldMatrix.from_rows(rows, field)
        basis = m.kernel_basis("right")
        assert basis.nrows == nc - m.rank()
        if basis.nrows:
            assert basis.rank() == basis.nrows  # linear independence
            prod = m @ basis.transpose()
            assert prod.is_zero()
        left = m.kernel_basis("left")
        assert left.nrows == nr - m.rank()
        if left.nrows:
            assert (left @ m).is_zero()


def test_kernel_of_identity_is_empty():
    assert FieldMatrix.identity(5, QQ).kernel_basis().nrows == 0
    assert FieldMatrix.identity(5, GF(3)).kernel_basis().nrows == 0


# ---------------------------------------------------------------------------
# stack_rank
# ---------------------------------------------------------------------------


def test_stack_rank_single_matrix_is_rank():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    m = FieldMatrix.from_rows(rows, QQ)
    assert stack_rank([m]) == m.rank() == 2


def test_stack_rank_with_negation_unchanged():
    rows = [[1, 0, 2], [3, 1, 0]]
    m = FieldMatrix.from_rows(rows, QQ)
    neg = FieldMatrix.from_rows([[-x for x in r] for r in rows], QQ)
    assert stack_rank([m, neg]) == m.rank()


def test_stack_rank_rejects_mismatched_inputs():
    a = FieldMatrix.zeros(2, 3, QQ)
    b = FieldMatrix.zeros(2, 4, QQ)
    c = FieldMatrix.zeros(2, 3, GF(5))
    with pytest.raises(ValueError):
        stack_rank([a, b])
    with pytest.raises(ValueError):
        stack_rank([a, c])
    with pytest.raises(ValueError):
        stack_rank([])


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def test_snf_of_diagonal_matrix():
    res = smith_normal_form([[1, 0, 0], [0, 2, 0], [0, 0, 0]])
    assert res.elementary_divisors == (1, 2)
    assert res.bad_primes == frozenset({2})


def test_snf_of_single_entry():
    res = smith_normal_form([[6]])
    assert res.elementary_divisors == (6,)
    assert res.bad_primes == frozenset({2, 3})


def test_snf_empty_and_zero():
    assert smith_normal_form([[0, 0], [0, 0]]).elementary_divisors == ()
    assert smith_normal_form([[0, 0], [0, 0]]).bad_primes == frozenset()


def _gcd_of_minors(rows, r):
    import math

    nr, nc = len(rows), len(rows[0])
    g = 0
    for ri in combinations(range(nr), r):
        for ci in combinations(range(nc), r):
            sub = [[rows[i][j] for j in ci] for i in ri]
            g = math.gcd(g, int(_det_leibniz(sub)))
    return g


def test_snf_divisor_products_match_minor_gcds():
    rng = np.random.default_rng(31)
    for _ in range(25):
        nr, nc = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        rows = rng.integers(-5, 6, size=(nr, nc)).tolist()
        res = smith_normal_form(rows)
        prod = 1
        for i, d in enumerate(res.elementary_divisors, start=1):
            prod *= d
            assert prod == _gcd_of_minors(rows, i)


@given(st.lists(st.lists(st.integers(-5, 5), min_size=1, max_size=5), min_size=1, max_size=5))
@settings(max_examples=60, deadline=None)
def test_snf_predicts_modular_ranks(rows):
    if len({len(r) for r in rows}) != 1:
        rows = [r[: min(len(x) for x in rows)] for r in rows]
    res = smith_normal_form(rows)
    assert res.rank == FieldMatrix.from_rows(rows, QQ).rank()
    for q in (2, 3, 5, 7, 11):
        assert res.rank_mod(q) == FieldMatrix.from_rows(rows, GF(q)).rank()


def test_snf_divisibility_chain():
    rng = np.random.default_rng(47)
    for _ in range(40):
        rows = rng.integers(-9, 10, size=(int(rng.integers(1, 7)), int(rng.integers(1, 7)))).tolist()
        divs = smith_normal_form(rows).elementary_divisors
        assert all(b % a == 0 for a, b in zip(divs, divs[1:]))
        assert all(d > 0 for d in divs)


# ---------------------------------------------------------------------------
# misc surface
# ---------------------------------------------------------------------------


def test_debug_dump_round_trip():
    m = FieldMatrix.from_rows([[Fraction(1, 2), 3], [0, Fraction(-7, 5)]], QQ)
    again = FieldMatrix.from_debug_dump(m.to_debug_dump())
    assert again == m
    g = FieldMatrix.from_rows([[1, 2], [3, 4]], GF(5))
    again_g = FieldMatrix.from_debug_dump(g.to_debug_dump())
    assert again_g == g
    assert again_g.field == GF(5)


def test_primes_helpers():
    assert is_prime(LARGE_PRIME)
    assert is_prime(SECOND_PRIME)
    assert not is_prime(1) and not is_prime(0) and not is_prime((1 << 61) - 3)
    assert prime_factors(360) == (2, 3, 5)
    assert prime_factors(1) == ()
    assert prime_factors(-97) == (97,)


def test_prime_field_validation():
    with pytest.raises(ValueError):
        GF(4)
    with pytest.raises(ValueError):
        GF((1 << 53) + 5)  # out of supported range even if prime


def test_matmul_and_identity():
    m = FieldMatrix.from_rows([[1, 2], [3, 4]], QQ)
    ident = FieldMatrix.identity(2, QQ)
    assert (m @ ident) == m
    g = FieldMatrix.from_rows([[1, 2], [3, 4]], GF(5))
    gi = FieldMatrix.identity(2, GF(5))
    assert (g @ gi) == g
