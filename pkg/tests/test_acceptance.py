"""Acceptance criteria 1-9.

Each test carries a ``criterion`` marker; conftest prints one PASS/FAIL line
per criterion at the end of the run.  A criterion that the mathematics does
not support is kept as a strict xfail, so it reports FAIL and would flip the
suite red if it ever started passing.
"""

import random
import time
from fractions import Fraction

import pytest
from sympy.ntheory import sqrt_mod

from logkernel.chidecomp import V4, idempotents
from logkernel.codescent import (capitulation_kernel, characteristic_polynomial, fixture,
                                 iwasawa_invariants, level_size_exponent, level_alphas,
                                 twisted_coinvariants)
from logkernel.logarith import choose_T, log_class_data, log_class_group
from logkernel.quadfield import RATIONAL, class_group, is_squarefree, make_field
from logkernel.wildkernel import (cor14_triviality, cubic_field, cubic_fields, cubic_log_ramification,
                                  reflection_check, wk_structure)

from oracles import (BruteFormGroup, fundamental_discriminants, iwasawa_log_by_powers,
                     split_imaginary_log_class_exponent, vp)

criterion = pytest.mark.criterion

REAL_D = [d for d in range(2, 501) if d != 3 and is_squarefree(d)]


# ---------------------------------------------------------------------------
# 1


@criterion(1, "exact trivialities for Q and Q(sqrt -3)")
def test_c1_trivialities():
    start = time.perf_counter()
    assert log_class_group(RATIONAL, 3).is_trivial
    assert log_class_group(make_field(-3), 3).is_trivial
    for i in range(-6, 7):
        rep = wk_structure(-3, i, 1)
        assert rep.quotient_structure.is_trivial and rep.stabilized
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 2 and 3


@pytest.fixture(scope="module")
def reflection_scan():
    start = time.perf_counter()
    rows = [reflection_check(d) for d in REAL_D]
    return rows, time.perf_counter() - start


@criterion(2, "reflection scan 1 < d <= 500")
def test_c2_scan_stabilized_and_fast(reflection_scan):
    rows, elapsed = reflection_scan
    assert len(rows) == len(REAL_D)
    assert all(r.stabilized for r in rows)
    assert elapsed < 300


@criterion(2, "reflection scan 1 < d <= 500")
def test_c2_mirrored_inequality(reflection_scan):
    rows, _ = reflection_scan
    assert all(r.mirror_inequality_holds for r in rows)


@criterion(2, "reflection scan 1 < d <= 500")
@pytest.mark.xfail(strict=True, reason="delta = -1 occurs (first at d = 29, where Q(sqrt 29) has trivial "
                                        "C~l_3 and Q(sqrt -87) has 3-rank 1); the inequality holds "
                                        "with k and k* exchanged")
def test_c2_delta_between_0_and_1(reflection_scan):
    rows, _ = reflection_scan
    bad = [r.d for r in rows if not r.inequality_holds]
    assert bad == []


@criterion(3, "product formula on every generator of the scan")
def test_c3_product_formula(reflection_scan):
    rows, _ = reflection_scan
    count = 0
    for r in rows:
        for d, s in ((r.d, r.structure_k), (r.d_star, r.structure_k_star)):
            data = log_class_data(make_field(d), 3, s.precision_used)
            res = data.product_formula_residues()
            assert res == [0] * len(data.units.generators), d
            count += len(res)
    assert count > 2 * len(rows)


# ---------------------------------------------------------------------------
# 4


SAMPLE50 = sorted(random.Random(2024).sample(
    [d for d in range(-500, 501) if d not in (0, 1) and is_squarefree(d)], 50))


@criterion(4, "T-independence, rescaling and monotonicity on 50 fields")
@pytest.mark.parametrize("d", SAMPLE50)
def test_c4_robustness(d):
    K = make_field(d)
    base = log_class_group(K, 3)
    assert base.stabilized
    m = base.precision_used
    assert log_class_group(K, 3, T=choose_T(K, 3, extra=2)).exponents == base.exponents
    rng = random.Random(d)
    data = log_class_data(K, 3, m)
    scale = {p: 1 + 3 * rng.randrange(1, 100) if rng.random() < 0.5 else 3 * rng.randrange(1, 100) - 1
             for p in data.places}
    again = log_class_group(K, 3, m, fixed_precision=True, degree_units=scale)
    assert again.exponents == base.exponents
    assert log_class_group(K, 3, m + 2, fixed_precision=True).exponents == base.exponents
    assert log_class_group(K, 3, 2 * m, fixed_precision=True).exponents == base.exponents


# ---------------------------------------------------------------------------
# 5


@criterion(5, "C~l_3(Q(sqrt -23)) trivial, matching the hand oracle")
def test_c5_minus_23():
    assert log_class_group(make_field(-23), 3).is_trivial
    assert split_imaginary_log_class_exponent(-23) == 0
    # p^3 = (beta) with beta = 2 + sqrt(-23) of norm 27; under both roots of
    # x^2 = -23 in Z_3 the image of beta has Iwasawa logarithm of valuation 1
    prec = 30
    mod = 3**prec
    t = sqrt_mod(-23, mod)
    vals = []
    for root in (t, mod - t):
        img = (2 + root) % mod
        vals.append(vp(iwasawa_log_by_powers(Fraction(img), 3, 20), 3))
    assert vals == [1, 1]


# ---------------------------------------------------------------------------
# 6


@criterion(6, "cyclic cubic triviality criteria at m = 8")
@pytest.mark.parametrize("f, trivial", [(7, True), (13, True), (19, False), (91, False)])
def test_c6_decisions(f, trivial):
    for N in cubic_fields(f):
        assert cor14_triviality(N, 1, m=8).trivial is trivial


@criterion(6, "cyclic cubic triviality criteria at m = 8")
def test_c6_conductor_9_log_unramified():
    assert cubic_log_ramification(cubic_field(9), m=8).sorted() == []


@criterion(6, "cyclic cubic triviality criteria at m = 8")
@pytest.mark.xfail(strict=True, reason="3 is not a cube modulo 7, so at conductor 63 the local character "
                                        "at 3 does not kill 3, the completion at 3 is not the cyclotomic "
                                        "cubic and R~ = {3, 7}")
def test_c6_conductor_63():
    for N in cubic_fields(63):
        assert cubic_log_ramification(N, m=8).sorted() == [7]


# ---------------------------------------------------------------------------
# 7


@criterion(7, "V4 idempotent table modulo 3^m, m <= 32")
def test_c7_v4_table():
    signs = {"1": (1, 1, 1, 1), "omega": (1, 1, -1, -1), "phi": (1, -1, 1, -1), "phi*": (1, -1, -1, 1)}
    for m in range(1, 33):
        mod = 3**m
        q = pow(4, -1, mod)
        tab = idempotents(V4, 3, m)
        assert tab.verify()
        for phi in V4.characters():
            assert tab[phi] == tuple(s * q % mod for s in signs[phi.name()])


# ---------------------------------------------------------------------------
# 8


@criterion(8, "codescent fixtures")
def test_c8_codescent():
    start = time.perf_counter()
    three = {"T-ell": (0, 1, ()), "ell,T": (0, 0, (1,)), "ell": (1, 0, ())}
    for name, (mu, lam, finite_part) in three.items():
        X = fixture(name)
        inv = iwasawa_invariants(X, levels=(1, 2, 3))
        assert (inv.mu, inv.lam) == (mu, lam)
        for n, nu in inv.nu_table:
            assert level_size_exponent(X, n) == mu * 3**n + lam * n + nu
        for n in (2, 3):
            assert capitulation_kernel(X, n, 2).exponents == finite_part
        if mu == 0:
            alphas = level_alphas(X, 2)
            assert alphas is not None and len(alphas) == lam
        mod = 3**X.precision
        coeffs = characteristic_polynomial(X)
        for i in range(-4, 5):
            point = (pow(4, -i, mod) - 1) % mod
            value = sum(c * point**k for k, c in enumerate(coeffs)) % mod
            assert twisted_coinvariants(X, i, 4).finite == (value != 0)
    assert not twisted_coinvariants(fixture("T-ell"), -1, 4).finite
    assert time.perf_counter() - start < 60


# ---------------------------------------------------------------------------
# 9


@criterion(9, "class groups match brute-force form enumeration, |D| <= 300")
def test_c9_class_groups():
    discs = fundamental_discriminants(300)
    assert len(discs) > 150
    for D in discs:
        assert class_group(D).elementary_divisors() == BruteFormGroup(D).elementary_divisors(), D
