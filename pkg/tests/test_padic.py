from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logkernel.errors import InvalidInput, PrecisionExhausted
from logkernel.padic import (PadicInt, PMatrix, iwasawa_log, kernel_basis, smith_normal_form,
                             teichmuller)

from oracles import iwasawa_log_by_powers, snf_exponents_by_minors, teichmuller_by_iteration

PRIMES = [3, 5, 7, 11, 13]


def test_padic_int_reduces_value():
    x = PadicInt(3, 100, 3)
    assert x.value == 100 % 27
    assert 0 <= x.value < x.modulus


def test_precision_honesty():
    a, b = PadicInt(3, 5, 6), PadicInt(3, 7, 4)
    assert (a + b).prec == 4
    assert (a * b).prec == 4
    q = PadicInt(3, 18, 6).exact_divide(2)
    assert (q.value, q.prec) == (2, 4)


def test_exact_divide_rejects_non_multiples():
    with pytest.raises(InvalidInput):
        PadicInt(3, 4, 5).exact_divide(1)
    with pytest.raises(PrecisionExhausted):
        PadicInt(3, 0, 2).exact_divide(3)


def test_inverse_of_non_unit_refused():
    with pytest.raises(InvalidInput):
        PadicInt(3, 6, 4).inverse()
    assert (PadicInt(3, 2, 4) * PadicInt(3, 2, 4).inverse()).value == 1


def test_even_prime_rejected():
    with pytest.raises(InvalidInput):
        teichmuller(1, 2, 3)
    with pytest.raises(InvalidInput):
        iwasawa_log(3, 4, 3)


@pytest.mark.parametrize("a, ell, m, expected", [(1, 3, 3, 1), (2, 3, 3, 26), (2, 5, 2, 7)])
def test_teichmuller_examples(a, ell, m, expected):
    assert teichmuller(a, ell, m).value == expected


def test_teichmuller_of_multiple_rejected():
    with pytest.raises(InvalidInput):
        teichmuller(6, 3, 4)


@pytest.mark.parametrize("x, ell, m, expected", [(3, 3, 5, 0), (-1, 3, 5, 0), (4, 3, 3, 21), (2, 3, 3, 24)])
def test_iwasawa_log_examples(x, ell, m, expected):
    assert iwasawa_log(x, ell, m).value == expected


def test_iwasawa_log_zero_rejected():
    with pytest.raises(InvalidInput):
        iwasawa_log(0, 3, 4)


@given(st.sampled_from(PRIMES), st.integers(1, 12), st.integers(1, 10**6))
def test_teichmuller_matches_iteration(ell, m, a):
    if a % ell == 0:
        a += 1
    t = teichmuller(a, ell, m)
    assert t.value == teichmuller_by_iteration(a, ell, m)
    assert pow(t.value, ell - 1, ell**m) == 1
    assert (t.value - a) % ell == 0
    assert iwasawa_log(t.value, ell, m).value == 0


@given(st.sampled_from(PRIMES), st.integers(1, 25),
       st.fractions().filter(lambda f: f != 0))
def test_iwasawa_log_matches_power_limit(ell, m, x):
    assert iwasawa_log(x, ell, m).value == iwasawa_log_by_powers(x, ell, m)


@given(st.sampled_from(PRIMES), st.integers(1, 40), st.integers(1, 10**9), st.integers(1, 10**9))
def test_iwasawa_log_additive(ell, m, u, v):
    lhs = iwasawa_log(u * v, ell, m).value
    rhs = (iwasawa_log(u, ell, m).value + iwasawa_log(v, ell, m).value) % ell**m
    assert lhs == rhs


@given(st.sampled_from(PRIMES), st.integers(1, 20), st.integers(2, 10**4), st.integers(-100, 100))
def test_iwasawa_log_of_powers(ell, m, x, k):
    lhs = iwasawa_log(Fraction(x) ** k, ell, m).value
    assert lhs == k * iwasawa_log(x, ell, m).value % ell**m


def test_iwasawa_log_of_ell_power_vanishes():
    assert iwasawa_log(Fraction(1, 243), 3, 10).value == 0
    assert iwasawa_log(-7 * 125, 5, 8).value == iwasawa_log(7, 5, 8).value


# ---------------------------------------------------------------------------
# Smith normal form


def test_snf_examples():
    assert smith_normal_form(PMatrix.from_entries([[1, 0], [0, 1]], 3, 4)).divisor_exponents == (0, 0)
    assert smith_normal_form(PMatrix.from_entries([[2, 0], [0, 3]], 3, 4)).divisor_exponents == (0, 1)
    zero = smith_normal_form(PMatrix.from_entries([[0, 0], [0, 0]], 3, 4))
    assert zero.divisor_exponents == (4, 4)
    assert not zero.resolved()


def test_snf_empty():
    res = smith_normal_form(PMatrix(3, 5, ()))
    assert res.divisor_exponents == ()
    assert res.cokernel_exponents() == []


def _check_transforms(M: PMatrix, res) -> None:
    mod = M.ell**M.prec
    A = np.array(M.rows, dtype=object)
    D = res.U.astype(object).dot(A).dot(res.V.astype(object)) % mod
    assert (D == res.diagonal()).all()
    n, c = M.shape
    assert ((res.U.astype(object).dot(res.U_inv.astype(object)) % mod) == np.eye(n, dtype=object)).all()
    assert ((res.V.astype(object).dot(res.V_inv.astype(object)) % mod) == np.eye(c, dtype=object)).all()


matrices = st.integers(1, 4).flatmap(
    lambda n: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-200, 200), min_size=c, max_size=c), min_size=n, max_size=n)))


@given(st.sampled_from([3, 5, 7]), st.integers(1, 6), matrices)
def test_snf_matches_determinantal_divisors(ell, m, rows):
    M = PMatrix.from_entries(rows, ell, m)
    res = smith_normal_form(M)
    assert list(res.divisor_exponents) == snf_exponents_by_minors(rows, ell, m)
    assert list(res.divisor_exponents) == sorted(res.divisor_exponents)
    _check_transforms(M, res)


@given(st.sampled_from([3, 5]), st.integers(1, 6), matrices, st.randoms(use_true_random=False))
def test_snf_invariant_under_unimodular_changes(ell, m, rows, rnd):
    mod = ell**m
    n, c = len(rows), len(rows[0])

    def unimodular(k):
        U = np.eye(k, dtype=object)
        for _ in range(3 * k):
            i, j = rnd.randrange(k), rnd.randrange(k)
            if i != j:
                U[i] = (U[i] + rnd.randrange(mod) * U[j]) % mod
            else:
                u = rnd.randrange(1, mod)
                if u % ell:
                    U[i] = U[i] * u % mod
        return U

    A = np.array(rows, dtype=object)
    B = unimodular(n).dot(A).dot(unimodular(c)) % mod
    a = smith_normal_form(PMatrix.from_entries(rows, ell, m)).divisor_exponents
    b = smith_normal_form(PMatrix.from_entries(B.tolist(), ell, m)).divisor_exponents
    assert a == b


def test_snf_deterministic():
    rows = [[3, 6, 9], [2, 4, 1], [0, 9, 27]]
    a = smith_normal_form(PMatrix.from_entries(rows, 3, 6))
    b = smith_normal_form(PMatrix.from_entries(rows, 3, 6))
    assert a.divisor_exponents == b.divisor_exponents
    assert (a.U == b.U).all() and (a.V == b.V).all()


def test_snf_large_precision_uses_exact_integers():
    rows = [[3**30, 1], [2, 3**40]]
    res = smith_normal_form(PMatrix.from_entries(rows, 3, 64))
    assert res.divisor_exponents == (0, 0)
    _check_transforms(PMatrix.from_entries(rows, 3, 64), res)


# ---------------------------------------------------------------------------
# kernels


def _in_kernel(vec, row, mod):
    return sum(v * r.value for v, r in zip(vec, row)) % mod == 0


def test_kernel_basis_examples():
    row = [PadicInt(3, 6, 3), PadicInt(3, 3, 3)]
    assert kernel_basis(row) == [[1, -2]]
    assert kernel_basis([PadicInt(3, 1, 3)]) == []
    sym = kernel_basis([PadicInt(3, 3, 4), PadicInt(3, 3, 4)])
    assert sym == [[1, -1]]


def test_kernel_basis_of_vanishing_form():
    with pytest.raises(PrecisionExhausted):
        kernel_basis([PadicInt(3, 0, 3), PadicInt(3, 27, 3)])


@given(st.lists(st.integers(0, 3**8 - 1), min_size=1, max_size=6))
def test_kernel_basis_vectors_are_in_kernel(vals):
    row = [PadicInt(3, v, 8) for v in vals]
    if all(v % 3**8 == 0 for v in vals):
        return
    basis = kernel_basis(row)
    assert len(basis) == len(vals) - 1
    for vec in basis:
        assert _in_kernel(vec, row, 3**8)
