"""Finitely presented modules over Lambda = Z_ell[[T]], T = gamma - 1.

A presentation is a k x r matrix of integer polynomials (r >= k): the
module is Lambda^k modulo the span of the r columns.  Square matrices cover
torsion modules of projective dimension one; finite modules such as
Lambda/(ell, T) need more relations than generators.

Levels X_n = X / omega_n X use Lambda/omega_n = Z_ell^(ell^n), on which T
acts by the companion matrix of (1 + T)^(ell^n) - 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
from sympy import Matrix, Poly, gcd as poly_gcd, symbols

from .errors import InvalidInput, NotTorsionCertified, PrecisionExhausted, ResourceLimit
from .logarith import GUARD, AbelianGroupStructure
from .padic import PadicInt, PMatrix, check_odd_prime, smith_normal_form, valuation

SIZE_CAP = 2000
DEFAULT_PRECISION = 16
T_SYM = symbols("T")

PolyCoeffs = tuple[int, ...]


def _trim(p: Sequence[int]) -> list[int]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _padd(p: Sequence[int], q: Sequence[int]) -> list[int]:
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pmod_monic(p: Sequence[int], f: Sequence[int], mod: int) -> list[int]:
    """Remainder of p by the monic polynomial f, coefficients mod ``mod``."""
    p = [c % mod for c in p]
    d = len(f) - 1
    for top in range(len(p) - 1, d - 1, -1):
        c = p[top]
        if c:
            for k in range(d + 1):
                p[top - d + k] = (p[top - d + k] - c * f[k]) % mod
    return (p + [0] * d)[:d]


def omega_poly(ell: int, n: int) -> list[int]:
    """(1 + T)^(ell^n) - 1, constant term first."""
    N = ell**n
    return [0] + [comb(N, k) for k in range(1, N + 1)]


def nu_poly(ell: int, n: int, j: int) -> list[int]:
    """omega_{n+j} / omega_n = sum_{t < ell^j} (1 + T)^(ell^n t)."""
    base = [comb(ell**n, k) for k in range(ell**n + 1)]
    out: list[int] = []
    power = [1]
    for _ in range(ell**j):
        out = _padd(out, power)
        power = _pmul(power, base)
    return out


@dataclass(frozen=True)
class LambdaPresentation:
    ell: int
    precision: int
    matrix: tuple[tuple[PolyCoeffs, ...], ...]

    def __post_init__(self):
        check_odd_prime(self.ell)
        if self.precision < 1:
            raise InvalidInput("precision must be positive")
        mat = tuple(tuple(tuple(int(c) for c in entry) for entry in row) for row in self.matrix)
        if not mat or not mat[0]:
            raise InvalidInput("empty presentation")
        if len({len(r) for r in mat}) != 1:
            raise InvalidInput("presentation rows have different lengths")
        if len(mat[0]) < len(mat):
            raise InvalidInput("fewer relations than generators: the module cannot be torsion")
        object.__setattr__(self, "matrix", mat)

    @property
    def generators(self) -> int:
        return len(self.matrix)

    @property
    def relations(self) -> int:
        return len(self.matrix[0])

    @property
    def is_square(self) -> bool:
        return self.generators == self.relations

    @property
    def degree_bound(self) -> int:
        return max((len(_trim(e)) - 1 for r in self.matrix for e in r), default=0)

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {"ell": self.ell, "precision": self.precision, "generators": self.generators,
                "matrix": [[list(e) for e in row] for row in self.matrix]}

    def to_text(self) -> str:
        """Canonical text: one matrix row per line, constant terms first."""
        rows = ",\n  ".join(json.dumps([list(e) for e in row]) for row in self.matrix)
        return ("{\n"
                f' "ell": {self.ell},\n'
                f' "precision": {self.precision},\n'
                f' "generators": {self.generators},\n'
                f' "matrix": [\n  {rows}\n ]\n'
                "}\n")

    @classmethod
    def from_dict(cls, data: dict) -> "LambdaPresentation":
        try:
            ell, prec, k, mat = data["ell"], data["precision"], data["generators"], data["matrix"]
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed presentation: {exc}") from None
        if len(mat) != k:
            raise InvalidInput(f"matrix has {len(mat)} rows but generators = {k}")
        return cls(int(ell), int(prec), tuple(tuple(tuple(e) for e in row) for row in mat))

    @classmethod
    def from_text(cls, text: str) -> "LambdaPresentation":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"presentation is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def sympy_matrix(self) -> Matrix:
        return Matrix([[Poly(list(reversed(e)) or [0], T_SYM).as_expr() for e in row] for row in self.matrix])


def presentation(ell: int, rows: Sequence[Sequence[Sequence[int]]], precision: int = DEFAULT_PRECISION) -> LambdaPresentation:
    return LambdaPresentation(ell, precision, tuple(tuple(tuple(e) for e in r) for r in rows))


def direct_sum(X: LambdaPresentation, Y: LambdaPresentation) -> LambdaPresentation:
    if X.ell != Y.ell:
        raise InvalidInput("direct sum of presentations over different ell")
    zero: PolyCoeffs = (0,)
    rows = [tuple(r) + (zero,) * Y.relations for r in X.matrix]
    rows += [(zero,) * X.relations + tuple(r) for r in Y.matrix]
    return LambdaPresentation(X.ell, max(X.precision, Y.precision), tuple(rows))


# ---------------------------------------------------------------------------
# levels


def _mult_matrix(p: Sequence[int], omega: Sequence[int], mod: int) -> np.ndarray:
    """Matrix of multiplication by p on Z[T]/omega in the basis 1, T, ..."""
    N = len(omega) - 1
    M = np.zeros((N, N), dtype=object)
    cur = _pmod_monic(p, omega, mod)
    for a in range(N):
        M[:, a] = cur
        cur = _pmod_monic([0] + cur, omega, mod)
    return M


def _check_size(X: LambdaPresentation, n: int) -> None:
    if X.ell**n * max(X.generators, X.relations) > SIZE_CAP:
        raise ResourceLimit(f"level {n} exceeds the size cap ell^n * k <= {SIZE_CAP}")


def expanded_matrix(X: LambdaPresentation, n: int, prec: int) -> PMatrix:
    _check_size(X, n)
    omega = omega_poly(X.ell, n)
    mod = X.ell**prec
    N = len(omega) - 1
    k, r = X.generators, X.relations
    big = np.zeros((k * N, r * N), dtype=object)
    for i in range(k):
        for j in range(r):
            big[i * N:(i + 1) * N, j * N:(j + 1) * N] = _mult_matrix(X.matrix[i][j], omega, mod)
    return PMatrix(X.ell, prec, tuple(tuple(int(x) for x in row) for row in big))


def _level_snf(X: LambdaPresentation, n: int, prec: int):
    return smith_normal_form(expanded_matrix(X, n, prec))


def _structure(ell: int, exps: Sequence[int], m: int, stable: bool) -> AbelianGroupStructure:
    nz = tuple(sorted(a for a in exps if a > 0))
    return AbelianGroupStructure(ell, nz, m, stable, all(a < m for a in nz))


def level_quotient(X: LambdaPresentation, n: int, prec: int | None = None) -> AbelianGroupStructure:
    """X_n = X / omega_n X as a finite abelian ell-group (when finite)."""
    m = prec or X.precision
    top = _level_snf(X, n, m).cokernel_exponents()
    low = _level_snf(X, n, m - GUARD).cokernel_exponents() if m > GUARD else top
    s_top = _structure(X.ell, top, m, False)
    s_low = _structure(X.ell, low, m - GUARD, False)
    stable = (s_top.finiteness_certificate and max(s_top.exponents, default=0) <= m - GUARD
              and s_top.exponents == s_low.exponents)
    return _structure(X.ell, top, m, stable)


def level_size_exponent(X: LambdaPresentation, n: int, prec: int | None = None) -> int:
    """log_ell |X_n|."""
    s = level_quotient(X, n, prec)
    if not s.finiteness_certificate:
        raise PrecisionExhausted(f"X_{n} is not resolved at precision {s.precision_used}")
    return s.order_exponent


def capitulation_kernel(X: LambdaPresentation, n: int, j: int, prec: int | None = None) -> AbelianGroupStructure:
    """Kernel of X_n -> X_{n+j}, x -> (omega_{n+j}/omega_n) x."""
    if j < 0:
        raise InvalidInput("j must be nonnegative")
    ell = X.ell
    E = prec or X.precision
    mod = ell**E
    if j == 0:
        return _structure(ell, [], E, True)
    s1 = _level_snf(X, n, E)
    s2 = _level_snf(X, n + j, E)
    a = s1.cokernel_exponents()
    b = s2.cokernel_exponents()
    if max(a + b, default=0) >= E:
        raise PrecisionExhausted("level quotients are not resolved at this precision")
    N1, N2 = ell**n, ell ** (n + j)
    k = X.generators
    nu = nu_poly(ell, n, j)
    phi_block = np.zeros((N2, N1), dtype=object)
    for col in range(N1):
        coeffs = [0] * col + nu
        phi_block[:len(coeffs), col] = [c % mod for c in coeffs][:N2]
    phi = np.zeros((k * N2, k * N1), dtype=object)
    for i in range(k):
        phi[i * N2:(i + 1) * N2, i * N1:(i + 1) * N1] = phi_block
    U2 = np.array(s2.U, dtype=object)
    U1_inv = np.array(s1.U_inv, dtype=object)
    G = U2.dot(phi).dot(U1_inv) % mod
    # x in the A-coordinates is in the kernel iff ell^(E - b_i) (G x)_i = 0 mod ell^E
    H = np.array([[G[i, c] * ell ** (E - b[i]) % mod for c in range(G.shape[1])] for i in range(G.shape[0])],
                 dtype=object)
    sh = smith_normal_form(PMatrix(ell, E, tuple(tuple(int(x) for x in r) for r in H)))
    s = G.shape[1]
    c = list(sh.divisor_exponents) + [E] * (s - len(sh.divisor_exponents))
    c = c[:s]
    V_inv = np.array(sh.V_inv, dtype=object)
    # kernel lattice W = V diag(ell^(E - c_j)); Cap = W / diag(ell^a) Z^s
    Y = V_inv.dot(np.diag([ell**ai for ai in a]).astype(object)) % mod
    cols = []
    for i in range(s):
        col = []
        for jj in range(s):
            e = E - min(c[jj], E)
            if Y[jj, i] % ell**e:
                raise ArithmeticError("transition map is not well defined on X_n")
            col.append(Y[jj, i] // ell**e)
        cols.append(col)
    rel = [[(ell ** min(c[r_], E) if r_ == cc else 0) for cc in range(s)] for r_ in range(s)]
    full = [rel[r_] + [cols[i][r_] for i in range(s)] for r_ in range(s)]
    snf = smith_normal_form(PMatrix(ell, E, tuple(tuple(int(x) % mod for x in r) for r in full)))
    return _structure(ell, snf.cokernel_exponents(), E, True)


# ---------------------------------------------------------------------------
# characteristic polynomial and invariants


def _to_poly(coeffs: Sequence[int]) -> Poly:
    return Poly(list(reversed(_trim(coeffs))) or [0], T_SYM, domain="ZZ")


def _from_poly(p: Poly) -> list[int]:
    return [int(c) for c in reversed(p.all_coeffs())]


@dataclass(frozen=True)
class IwasawaInvariants:
    mu: int
    lam: int
    char_poly: tuple[int, ...]
    nu_table: tuple[tuple[int, int], ...] = ()

    @property
    def nu(self) -> int | None:
        vals = {v for _, v in self.nu_table}
        return vals.pop() if len(vals) == 1 else None


def characteristic_polynomial(X: LambdaPresentation) -> list[int]:
    """Generator of the Fitting ideal in Lambda, as an integer polynomial.

    For square presentations this is the determinant.  Otherwise the
    Lambda-gcd of the maximal minors is ell^mu times the distinguished part
    of their gcd over Q[T]; the latter is returned made primitive.
    """
    M = X.sympy_matrix()
    k, r = X.generators, X.relations
    if k == r:
        det = Poly(M.det(method="berkowitz"), T_SYM, domain="ZZ")
        return _from_poly(det) if not det.is_zero else []
    minors = []
    for cols in combinations(range(r), k):
        p = Poly(M[:, list(cols)].det(method="berkowitz"), T_SYM, domain="ZZ")
        if not p.is_zero:
            minors.append(p)
    if not minors:
        return []
    g = minors[0]
    for p in minors[1:]:
        g = poly_gcd(g, p)
    mu = min(_mu(_from_poly(p), X.ell) for p in minors)
    g = g.primitive()[1]
    if g.LC() < 0:
        g = -g
    gl = _from_poly(g)
    gl = [c // X.ell ** _mu(gl, X.ell) for c in gl]
    # drop the factor that is a unit in Lambda: keep the distinguished part only
    dist = _distinguished_part(gl, X.ell)
    return [c * X.ell**mu for c in dist]


def _mu(p: Sequence[int], ell: int) -> int:
    return min(valuation(c, ell) for c in p if c)


def _weierstrass_degree(p: Sequence[int], ell: int) -> int:
    mu = _mu(p, ell)
    for i, c in enumerate(p):
        if c and valuation(c, ell) == mu:
            return i
    raise ArithmeticError("zero polynomial")


def _distinguished_part(p: list[int], ell: int) -> list[int]:
    """Product of the irreducible Q[T]-factors of p having roots in the open unit disc.

    Over Z_ell these are exactly the factors that are not units in Lambda;
    an irreducible primitive factor q has its roots inside the disc iff its
    Weierstrass degree equals its degree.
    """
    out = [1]
    for fac, e in _to_poly(p).factor_list()[1]:
        q = _from_poly(fac)
        if len(q) > 1 and _weierstrass_degree(q, ell) == len(q) - 1:
            if q[-1] < 0:
                q = [-c for c in q]
            for _ in range(e):
                out = _pmul(out, q)
    return out


def iwasawa_invariants(X: LambdaPresentation, levels: Sequence[int] = (1, 2)) -> IwasawaInvariants:
    P = characteristic_polynomial(X)
    if not P:
        raise NotTorsionCertified("characteristic polynomial vanishes: X is not Lambda-torsion")
    mu = _mu(P, X.ell)
    lam = _weierstrass_degree(P, X.ell)
    table = []
    for n in levels:
        try:
            size = level_size_exponent(X, n)
        except (PrecisionExhausted, ResourceLimit):
            continue
        table.append((n, size - mu * X.ell**n - lam * n))
    return IwasawaInvariants(mu, lam, tuple(P), tuple(table))


def level_alphas(X: LambdaPresentation, n: int) -> tuple[int, ...] | None:
    """alpha_j with X_n = (+)_j Z/ell^(n + alpha_j) (+) Cap_n, checked at n and n + 1.

    Returns None when the exponent multisets do not split that way.
    """
    inv = iwasawa_invariants(X, levels=())
    if inv.mu != 0:
        return None
    rests = []
    for level in (n, n + 1):
        xs = list(level_quotient(X, level).exponents)
        cap = capitulation_kernel(X, level, 2)
        for a in cap.exponents:
            if a not in xs:
                return None
            xs.remove(a)
        if len(xs) != inv.lam:
            return None
        rests.append(sorted(xs))
    if [x + 1 for x in rests[0]] != rests[1]:
        return None
    return tuple(x - n for x in rests[0])


# ---------------------------------------------------------------------------
# twisted coinvariants


@dataclass(frozen=True)
class TwistedCoinvariants:
    structure: AbelianGroupStructure
    finite: bool
    point: int              # kappa^-i(gamma) - 1 modulo ell^m
    char_value: int         # characteristic polynomial at that point, modulo ell^m

    @property
    def possibly_infinite(self) -> bool:
        return not self.finite


def twisted_coinvariants(X: LambdaPresentation, i: int, kappa_gamma: PadicInt | int,
                         prec: int | None = None) -> TwistedCoinvariants:
    """Cokernel of the presentation evaluated at T = kappa(gamma)^(-i) - 1.

    Finite iff the characteristic polynomial does not vanish there; a value
    that is 0 modulo ell^m is reported as possibly infinite.
    """
    m = prec or X.precision
    ell = X.ell
    mod = ell**m
    k = kappa_gamma.value if isinstance(kappa_gamma, PadicInt) else int(kappa_gamma)
    if isinstance(kappa_gamma, PadicInt):
        m = min(m, kappa_gamma.prec)
        mod = ell**m
    if (k - 1) % ell:
        raise InvalidInput("kappa(gamma) must be congruent to 1 mod ell")
    t = (pow(k, -i, mod) - 1) % mod
    rows = []
    for row in X.matrix:
        rows.append(tuple(sum(c * pow(t, e, mod) for e, c in enumerate(entry)) % mod for entry in row))
    snf = smith_normal_form(PMatrix(ell, m, tuple(rows)))
    P = characteristic_polynomial(X)
    val = sum(c * pow(t, e, mod) for e, c in enumerate(P)) % mod if P else 0
    finite = val != 0
    exps = snf.cokernel_exponents()
    return TwistedCoinvariants(_structure(ell, exps, m, finite), finite, t, val)


# ---------------------------------------------------------------------------
# fixtures


def fixture(name: str, ell: int = 3, precision: int = DEFAULT_PRECISION) -> LambdaPresentation:
    """The standard test modules: 'T-ell', 'ell,T', 'ell', 'T-ell+ell,T', 'one',
    '(T-ell)(T-ell^2)'."""
    lin = (-ell, 1)
    table = {
        "T-ell": [[lin]],
        "ell,T": [[(ell,), (0, 1)]],
        "ell": [[(ell,)]],
        "one": [[(1,)]],
        "(T-ell)(T-ell^2)": [[tuple(_pmul(lin, (-ell * ell, 1)))]],
    }
    if name == "T-ell+ell,T":
        return direct_sum(fixture("T-ell", ell, precision), fixture("ell,T", ell, precision))
    if name not in table:
        raise InvalidInput(f"unknown fixture {name!r}")
    return presentation(ell, table[name], precision)
