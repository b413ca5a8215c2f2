"""Logarithmic valuations, divisors and the ell-group of logarithmic classes.

Degrees are normalized by deg ell = ell and deg q = Log_Iw(q) for q != ell,
so that deg_F p = f~_p deg q.  Any other normalization that keeps the
logarithmic valuations surjective differs by ell-adic units place by place
and yields an isomorphic class group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from sympy import factorint

from .errors import InvalidInput, PrecisionExhausted
from .padic import (PadicInt, PMatrix, check_odd_prime, iwasawa_log, log_unit,
                    smith_normal_form, valuation)
from .quadfield import (ClassGroupData, PlaceId, QuadElem, QuadField, SUnitSystem,
                        class_group, elem, embed_at_ell, place_dlog, place_valuation,
                        primes_from, s_unit_system, split_prime)

GUARD = 2
START_PRECISION = 8
PRECISION_CAP = 64


@dataclass(frozen=True)
class LogLocalData:
    place: PlaceId
    e: int
    f: int
    e_log: int
    f_log: int


def _two_adic_class(d: int) -> int:
    """Representative of d in Q_2^x / squares, in {1,3,5,7,2,6,10,14} (signs folded mod 8)."""
    v = valuation(d, 2)
    u = d >> v if d > 0 else -((-d) >> v)
    return (2 if v % 2 else 1) * (u % 8)


def log_inertia(K: QuadField, q: int, ell: int) -> list[LogLocalData]:
    check_odd_prime(ell)
    out = []
    for p in split_prime(K, q):
        if p.kind in ("rational", "split"):
            out.append(LogLocalData(p, 1, 1, 1, 1))
            continue
        e, f = (2, 1) if p.kind == "ramified" else (1, 2)
        if q == 2:
            et, ft = (1, 2) if _two_adic_class(K.d) in (2, 5, 10) else (2, 1)
        else:
            et, ft = (1, 2) if p.kind == "inert" else (2, 1)
        out.append(LogLocalData(p, e, f, et, ft))
    return out


def local_data(K: QuadField, place: PlaceId, ell: int) -> LogLocalData:
    for loc in log_inertia(K, place.q, ell):
        if loc.place == place:
            return loc
    raise InvalidInput(f"{place} is not a place of {K}")


def _deg_q(q: int, ell: int, m: int) -> PadicInt:
    if q == ell:
        return PadicInt(ell, ell % ell**m, m)
    return iwasawa_log(q, ell, m)


def place_degree(K: QuadField, place: PlaceId, ell: int, m: int) -> PadicInt:
    if place.is_infinite:
        raise InvalidInput("only finite places carry a logarithmic degree")
    ft = local_data(K, place, ell).f_log
    return _deg_q(place.q, ell, m) * ft


def _local_norm_log(K: QuadField, place: PlaceId, x: QuadElem, ell: int, m: int) -> PadicInt:
    """Log_Iw of the local norm of x at a place above ell, modulo ell^m."""
    norms = embed_at_ell(K, x, ell, m)
    if K.is_rational or place.kind != "split":
        ln = norms[0]
    else:
        ln = norms[place.index]
    return PadicInt(ell, log_unit(ln.unit.value, ell, m), m)


def log_valuation(K: QuadField, place: PlaceId, x: QuadElem | Fraction | int, ell: int, m: int) -> PadicInt:
    check_odd_prime(ell)
    if not isinstance(x, QuadElem):
        x = elem(K, x)
    if x.is_zero():
        raise InvalidInput("logarithmic valuation of zero")
    loc = local_data(K, place, ell)
    if place.q != ell:
        v = place_valuation(K, place, x)
        return PadicInt.from_rational(Fraction(v * loc.f, loc.f_log), ell, m)
    # deg p = f~ * ell: one extra digit absorbs the division by ell
    lg = _local_norm_log(K, place, x, ell, m + 1)
    if lg.value % ell:
        raise PrecisionExhausted("logarithm not divisible by ell at this precision")
    q = lg.exact_divide(1)
    return -(q / PadicInt.from_rational(loc.f_log, ell, m))


@dataclass(frozen=True)
class LogDivisor:
    ell: int
    prec: int
    support: Mapping[PlaceId, PadicInt]
    degree: PadicInt

    def is_zero(self) -> bool:
        return not self.support


def _support_primes(K: QuadField, x: QuadElem) -> set[int]:
    n = x.norm() if not K.is_rational else x.r
    out = set()
    for part in (n.numerator, n.denominator):
        if abs(part) > 1:
            out.update(factorint(abs(part)).keys())
    return out


def log_divisor(K: QuadField, x: QuadElem | Fraction | int, ell: int, m: int) -> LogDivisor:
    if not isinstance(x, QuadElem):
        x = elem(K, x)
    primes = _support_primes(K, x) | {ell}
    support = {}
    deg = PadicInt(ell, 0, m)
    for q in sorted(primes):
        for p in split_prime(K, q):
            v = log_valuation(K, p, x, ell, m)
            if v.is_zero():
                continue
            support[p] = v
            deg = deg + v * place_degree(K, p, ell, m)
    return LogDivisor(ell, m, support, deg)


def is_log_unit(K: QuadField, x, ell: int, m: int) -> bool:
    return log_divisor(K, x, ell, m).is_zero()


# ---------------------------------------------------------------------------
# the logarithmic class group


@dataclass(frozen=True)
class AbelianGroupStructure:
    """A finite ell-group as sorted exponents a_i, group = sum Z/ell^a_i.

    ``stabilized`` is the certificate that the exponents are final: all of
    them lie GUARD digits below the working precision and a rerun two digits
    lower gives the same answer.  An exponent equal to ``precision_used``
    means the corresponding factor was not resolved (possibly infinite).
    """

    ell: int
    exponents: tuple[int, ...]
    precision_used: int
    stabilized: bool
    finiteness_certificate: bool

    @property
    def is_trivial(self) -> bool:
        return not self.exponents

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def order_exponent(self) -> int:
        return sum(self.exponents)

    def truncate(self, r: int) -> "AbelianGroupStructure":
        """Structure of the quotient by ell^r."""
        return AbelianGroupStructure(self.ell, tuple(min(a, r) for a in self.exponents),
                                     self.precision_used, self.stabilized, self.finiteness_certificate)

    def describe(self) -> str:
        if not self.exponents:
            return "1"
        return " x ".join(f"Z/{self.ell}^{a}" if a > 1 else f"Z/{self.ell}" for a in self.exponents)


def structure_from_exponents(ell: int, exps: Sequence[int], m: int) -> AbelianGroupStructure:
    nz = tuple(sorted(a for a in exps if a > 0))
    finite = all(a < m for a in nz)
    return AbelianGroupStructure(ell, nz, m, False, finite)


@dataclass(frozen=True)
class LogClassData:
    """Everything used to present C~l at one precision."""

    field: QuadField
    ell: int
    prec: int
    places: tuple[PlaceId, ...]
    units: SUnitSystem
    valuations: tuple[tuple[int, ...], ...]   # rows: places, columns: generators
    degrees: tuple[int, ...]
    pivot: int

    def product_formula_residues(self) -> list[int]:
        mod = self.ell**self.prec
        out = []
        for j in range(len(self.units.generators)):
            out.append(sum(self.valuations[i][j] * self.degrees[i] for i in range(len(self.places))) % mod)
        return out

    def reduced_matrix(self) -> PMatrix:
        rows = [r for i, r in enumerate(self.valuations) if i != self.pivot]
        return PMatrix(self.ell, self.prec, tuple(tuple(r) for r in rows))


@lru_cache(maxsize=4096)
def _cached_class_group(K: QuadField) -> ClassGroupData:
    return class_group(K)


def _subgroup_index_ell_part(cl: ClassGroupData, dlogs: Sequence[Sequence[int]], ell: int) -> int:
    """v_ell of the index of the subgroup generated by the given classes."""
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_decomp
    k = len(cl.generators)
    if k == 0:
        return 0
    cols = [list(v) for v in dlogs] + [list(r) for r in cl.relations]
    A = Matrix(cols).T
    S, _, _ = smith_normal_decomp(A)
    idx = 1
    for i in range(k):
        idx *= abs(int(S[i, i]))
    return valuation(idx, ell) if idx else 10**9


def choose_T(K: QuadField, ell: int, cl: ClassGroupData | None = None, extra: int = 0) -> list[PlaceId]:
    """Smallest primes q != ell whose classes, with those of the places above
    ell, generate the ell-Sylow of the class group.  ``extra`` adds further
    primes beyond the minimal choice (used to test T-independence)."""
    if K.is_rational:
        S: list[PlaceId] = []
    else:
        S = split_prime(K, ell)
    cl = cl or _cached_class_group(K)
    dl = [place_dlog(K, cl, p) for p in S]
    T: list[PlaceId] = []
    base = _subgroup_index_ell_part(cl, dl, ell)
    added_extra = 0
    for q in primes_from(2):
        if q == ell:
            continue
        if base == 0 and added_extra >= extra:
            break
        p = split_prime(K, q)[0]
        dp = place_dlog(K, cl, p)
        if base == 0:
            added_extra += 1
        else:
            new = _subgroup_index_ell_part(cl, dl + [dp], ell)
            if new == base:
                continue
            base = new
        T.append(p)
        dl.append(dp)
    return T


def log_class_data(K: QuadField, ell: int, m: int, *, T: Sequence[PlaceId] | None = None,
                   degree_units: Mapping[PlaceId, int] | None = None,
                   units: SUnitSystem | None = None) -> LogClassData:
    """Presentation of C~l_K at precision m.

    Reduction to S u T: with T chosen so that <S u T> has index prime to ell
    in Cl, any other place q has q^h = (alpha) * (S u T-part) with h prime to
    ell; as v~_q(alpha) = h f/f~ is an ell-adic unit, the class of q in C~l
    already comes from S u T.  The principal divisors supported on S u T are
    those of Z_ell (x) E_{S u T} (Z_ell is flat), so C~l is the cokernel of
    the S u T-unit valuations inside the degree-zero S u T-divisors.
    """
    check_odd_prime(ell)
    if m < 1:
        raise InvalidInput("precision must be positive")
    if units is None:
        S = [] if K.is_rational else split_prime(K, ell)
        S = [PlaceId(ell, 0, "rational")] if K.is_rational else S
        if T is None:
            T = choose_T(K, ell)
        units = s_unit_system(K, list(S) + list(T), _cached_class_group(K))
    places = units.places
    scale = degree_units or {}
    mod = ell**m
    degs = []
    for p in places:
        u = scale.get(p, 1)
        if u % ell == 0:
            raise InvalidInput("degree rescaling must use ell-adic units")
        degs.append(place_degree(K, p, ell, m).value * u % mod)
    rows = []
    for p in places:
        u_inv = pow(scale.get(p, 1), -1, mod)
        rows.append(tuple(log_valuation(K, p, g, ell, m).value * u_inv % mod for g in units.generators))
    vals = [valuation(dg, ell) if dg % mod else m for dg in degs]
    vmin = min(vals)
    if vmin >= m:
        raise PrecisionExhausted("all place degrees vanish at this precision")
    pivot = vals.index(vmin)
    return LogClassData(K, ell, m, places, units, tuple(rows), tuple(degs), pivot)


def _structure_at(K, ell, m, **kw) -> tuple[tuple[int, ...], bool, LogClassData]:
    data = log_class_data(K, ell, m, **kw)
    M = data.reduced_matrix()
    n = M.shape[0]
    if n == 0:
        return (), True, data
    snf = smith_normal_form(M)
    exps = snf.cokernel_exponents()
    finite = all(a < m for a in exps)
    return tuple(sorted(a for a in exps if a > 0)), finite, data


def log_class_group(K: QuadField, ell: int = 3, m: int | None = None, *,
                    cap: int = PRECISION_CAP, fixed_precision: bool = False,
                    T: Sequence[PlaceId] | None = None,
                    degree_units: Mapping[PlaceId, int] | None = None) -> AbelianGroupStructure:
    """The ell-group of logarithmic classes of K, with a stabilization certificate."""
    check_odd_prime(ell)
    m = START_PRECISION if m is None else m
    if m < 4:
        raise InvalidInput("log_class_group needs precision m >= 4")
    if T is None:
        T = choose_T(K, ell)
    S = [PlaceId(ell, 0, "rational")] if K.is_rational else split_prime(K, ell)
    units = s_unit_system(K, list(S) + list(T), _cached_class_group(K))
    kw = dict(units=units, degree_units=degree_units)
    while True:
        exps, finite, _ = _structure_at(K, ell, m, **kw)
        # an exponent equal to the lower precision is only "at least", so the
        # comparison needs the lower run to be resolved as well
        lower, lower_finite, _ = _structure_at(K, ell, m - GUARD, **kw)
        stable = finite and lower_finite and max(exps, default=0) <= m - GUARD and lower == exps
        if stable or fixed_precision or 2 * m > cap:
            return AbelianGroupStructure(ell, exps, m, stable, finite)
        m *= 2
