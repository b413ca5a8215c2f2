import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Poly, resultant, symbols

from logkernel.codescent import (LambdaPresentation, capitulation_kernel, characteristic_polynomial,
                                 direct_sum, fixture, iwasawa_invariants, level_quotient,
                                 level_size_exponent, omega_poly, presentation, level_alphas,
                                 twisted_coinvariants)
from logkernel.errors import InvalidInput, NotTorsionCertified, ResourceLimit
from logkernel.padic import PadicInt

from oracles import vp

T = symbols("T")


def test_omega_poly():
    # (1 + T)^3 - 1 = 3T + 3T^2 + T^3
    assert omega_poly(3, 1) == [0, 3, 3, 1]
    assert omega_poly(3, 0) == [0, 1]


@pytest.mark.parametrize("n", range(0, 5))
def test_level_examples(n):
    assert level_quotient(fixture("T-ell"), n).exponents == (n + 1,)
    assert level_quotient(fixture("ell,T"), n).exponents == (1,)
    assert level_size_exponent(fixture("ell"), n) == 3**n
    assert level_quotient(fixture("one"), n).is_trivial


def _resultant_exponent(f_coeffs, n, ell=3):
    f = Poly(list(reversed(f_coeffs)), T)
    w = Poly((1 + T) ** (ell**n) - 1, T)
    return vp(int(resultant(f.as_expr(), w.as_expr(), T)), ell)


@pytest.mark.parametrize("f", [[-3, 1], [27, -12, 1], [-3, 0, 1], [6, 3, 1], [-9, 1], [3, 1, 1]])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_level_size_matches_resultant(f, n):
    X = presentation(3, [[f]], 24)
    assert level_size_exponent(X, n) == _resultant_exponent(f, n)


def test_level_size_cap():
    with pytest.raises(ResourceLimit):
        level_quotient(fixture("ell"), 7)


def test_capitulation_examples():
    for n in range(0, 4):
        for j in (1, 2):
            assert capitulation_kernel(fixture("T-ell"), n, j).is_trivial
            assert capitulation_kernel(fixture("ell,T"), n, j).exponents == (1,)
    s = fixture("T-ell+ell,T")
    for n in range(1, 4):
        cap = capitulation_kernel(s, n, 2)
        assert cap.exponents == (1,)
        assert sorted(level_quotient(s, n).exponents) == sorted((1, n + 1))


def test_capitulation_of_mu_module_vanishes():
    for n in range(0, 3):
        assert capitulation_kernel(fixture("ell"), n, 1).is_trivial


@pytest.mark.parametrize("name, mu, lam", [("T-ell", 0, 1), ("ell", 1, 0), ("(T-ell)(T-ell^2)", 0, 2),
                                           ("ell,T", 0, 0), ("T-ell+ell,T", 0, 1), ("one", 0, 0)])
def test_invariants(name, mu, lam):
    inv = iwasawa_invariants(fixture(name), levels=(1, 2, 3))
    assert (inv.mu, inv.lam) == (mu, lam)
    assert inv.nu is not None


def test_char_polys():
    assert characteristic_polynomial(fixture("T-ell")) == [-3, 1]
    assert characteristic_polynomial(fixture("(T-ell)(T-ell^2)")) == [27, -12, 1]
    assert characteristic_polynomial(fixture("ell,T")) == [1]
    assert characteristic_polynomial(fixture("ell")) == [3]


def test_non_torsion_module_rejected():
    X = presentation(3, [[[0]]])
    with pytest.raises(NotTorsionCertified):
        iwasawa_invariants(X)


def test_level_alphas():
    assert level_alphas(fixture("T-ell"), 2) == (1,)
    assert level_alphas(fixture("T-ell+ell,T"), 2) == (1,)
    assert level_alphas(fixture("ell"), 2) is None


def test_twist_examples():
    X = fixture("T-ell")
    t0 = twisted_coinvariants(X, 0, PadicInt(3, 4, 16))
    assert t0.finite and t0.structure.exponents == (1,)
    t1 = twisted_coinvariants(X, -1, PadicInt(3, 4, 16))
    assert t1.possibly_infinite and t1.char_value == 0
    z = twisted_coinvariants(fixture("one"), 3, 4)
    assert z.finite and z.structure.is_trivial


def test_twist_needs_kappa_one_mod_ell():
    with pytest.raises(InvalidInput):
        twisted_coinvariants(fixture("T-ell"), 0, 2)


@pytest.mark.parametrize("name", ["T-ell", "ell,T", "ell", "(T-ell)(T-ell^2)", "T-ell+ell,T"])
@pytest.mark.parametrize("i", range(-4, 5))
def test_twist_flag_equals_char_poly_evaluation(name, i):
    X = fixture(name)
    kappa = 4
    mod = 3**X.precision
    point = (pow(kappa, -i, mod) - 1) % mod
    P = Poly(list(reversed(characteristic_polynomial(X))), T)
    value = int(P.eval(point)) % mod
    res = twisted_coinvariants(X, i, kappa)
    assert res.finite == (value != 0)
    assert res.point == point


# ---------------------------------------------------------------------------
# presentations


polys = st.lists(st.integers(-30, 30), min_size=1, max_size=4)


@given(st.integers(1, 3).flatmap(lambda k: st.tuples(
    st.just(k),
    st.integers(0, 2).flatmap(lambda extra: st.lists(
        st.lists(polys, min_size=k + extra, max_size=k + extra), min_size=k, max_size=k)))),
    st.sampled_from([3, 5, 7]), st.integers(4, 30))
def test_text_round_trip(kr, ell, prec):
    _, rows = kr
    X = presentation(ell, rows, prec)
    assert LambdaPresentation.from_text(X.to_text()) == X
    assert LambdaPresentation.from_dict(X.to_dict()) == X
    assert X.to_text() == LambdaPresentation.from_text(X.to_text()).to_text()


def test_text_format():
    text = fixture("ell,T").to_text()
    assert text.startswith("{\n")
    assert '"generators": 1' in text
    assert text.endswith("}\n")


@pytest.mark.parametrize("bad", ['{"ell": 3}', '{"ell": 4, "precision": 8, "generators": 1, "matrix": [[[1]]]}',
                                 "not json", '{"ell": 3, "precision": 8, "generators": 2, "matrix": [[[1]]]}'])
def test_from_text_rejects(bad):
    with pytest.raises(InvalidInput):
        LambdaPresentation.from_text(bad)


def test_direct_sum_shape():
    s = direct_sum(fixture("T-ell"), fixture("ell,T"))
    assert (s.generators, s.relations) == (2, 3)


def test_size_law_on_fixtures():
    for name in ("T-ell", "ell", "(T-ell)(T-ell^2)", "T-ell+ell,T"):
        X = fixture(name)
        inv = iwasawa_invariants(X, levels=(1, 2, 3))
        for n, nu in inv.nu_table:
            assert level_size_exponent(X, n) == inv.mu * 3**n + inv.lam * n + nu
