"""Wild kernel quotients, reflection scans and triviality criteria at ell = 3.

Everything here sits on top of the logarithmic class groups of quadratic
fields.  The exponent-3 quotient of WK_2i(k) is read off the logarithmic
class group of k (i even) or of its mirror k* = Q(sqrt(-3d)) (i odd), and
the cyclic cubic layer uses only local data at the ramified primes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd, isqrt
from typing import Iterable, Sequence

import mpmath
from sympy import Poly, discriminant, factorint, isprime, primitive_root, symbols

from .chidecomp import CharacterId, Dispatch, component_dispatch
from .errors import InvalidInput, PrecisionExhausted, Unsupported
from .logarith import AbelianGroupStructure, log_class_group
from .padic import valuation
from .quadfield import RATIONAL, is_squarefree, make_field, squarefree_part

ELL = 3


def _require_ell3(ell: int) -> None:
    if ell != 3:
        raise Unsupported("the wild kernel layer is implemented for ell = 3 only")


def _validate_d(d: int) -> None:
    if d in (0, 1) or not is_squarefree(d):
        raise InvalidInput(f"d = {d} is not a squarefree integer different from 0 and 1")


@lru_cache(maxsize=8192)
def _clog(d: int, ell: int, m: int | None, cap: int) -> AbelianGroupStructure:
    K = RATIONAL if d == 1 else make_field(d)
    return log_class_group(K, ell, m, cap=cap)


def logarithmic_class_group(d: int, ell: int = 3, m: int | None = None, cap: int = 64) -> AbelianGroupStructure:
    """Cached logarithmic class group of Q(sqrt d) (d = 1 for Q)."""
    return _clog(d, ell, m, cap)


# ---------------------------------------------------------------------------
# wild kernel structure reports


@dataclass(frozen=True)
class WKReport:
    d: int
    i: int
    r: int
    ell: int
    source_d: int
    character: str
    quotient_structure: AbelianGroupStructure
    full_candidate: AbelianGroupStructure
    full_needs_hypotheses: bool = True
    twist: str = ""

    @property
    def stabilized(self) -> bool:
        return self.quotient_structure.stabilized


def wk_structure(d: int, i: int, r: int = 1, ell: int = 3, m: int | None = None, cap: int = 64) -> WKReport:
    """Exponent-ell^r quotient of WK_2i(Q(sqrt d)) through the canonical isomorphism.

    The full logarithmic component is carried along as the candidate for the
    whole kernel; it is that kernel only under the finiteness and injectivity
    hypotheses of the full-group statement, hence the flag.
    """
    _require_ell3(ell)
    _validate_d(d)
    if r < 1:
        raise InvalidInput("r must be at least 1")
    if r > 1:
        raise Unsupported("r > 1 needs mu_9 inside Q(sqrt d, sqrt -3), which never holds")
    disp = component_dispatch(i, d)
    full = logarithmic_class_group(disp.source_d, ell, m, cap)
    return WKReport(d, i, r, ell, disp.source_d, disp.character.name(), full.truncate(r), full,
                    True, f"mu_{ell}^(x){i} (Galois action only)")


@dataclass(frozen=True)
class ReflectionResult:
    d: int
    d_star: int
    rank_k: int
    rank_k_star: int
    delta: int
    structure_k: AbelianGroupStructure
    structure_k_star: AbelianGroupStructure

    @property
    def inequality_holds(self) -> bool:
        """0 <= rg(k) - rg(k*) <= 1 with k real, as stated for the biquadratic frame."""
        return 0 <= self.delta <= 1

    @property
    def mirror_inequality_holds(self) -> bool:
        """0 <= rg(k*) - rg(k) <= 1: the imaginary component dominates its reflection."""
        return 0 <= -self.delta <= 1

    @property
    def stabilized(self) -> bool:
        return self.structure_k.stabilized and self.structure_k_star.stabilized


def reflection_check(d: int, ell: int = 3, m: int | None = None, cap: int = 64) -> ReflectionResult:
    _require_ell3(ell)
    _validate_d(d)
    if d <= 1:
        raise InvalidInput("reflection check expects the real field, d > 1")
    if d == 3:
        raise InvalidInput("d = 3: the mirror of Q(sqrt 3) is Q(i) and the pair leaves the frame")
    ds = squarefree_part(-3 * d)
    a = logarithmic_class_group(d, ell, m, cap)
    b = logarithmic_class_group(ds, ell, m, cap)
    return ReflectionResult(d, ds, a.rank, b.rank, a.rank - b.rank, a, b)


@dataclass(frozen=True)
class TrivialityReport:
    d: int
    i: int
    wk_quotient_trivial: bool
    exponent_quotient_trivial: bool
    component_trivial: bool
    structure: AbelianGroupStructure

    def consistent(self) -> bool:
        return self.wk_quotient_trivial == self.exponent_quotient_trivial == self.component_trivial


def triviality_report(d: int, i: int, ell: int = 3, m: int | None = None) -> TrivialityReport:
    rep = wk_structure(d, i, 1, ell, m)
    q = rep.quotient_structure
    return TrivialityReport(d, i, q.is_trivial, q.truncate(1).is_trivial,
                            rep.full_candidate.is_trivial, rep.full_candidate)


# ---------------------------------------------------------------------------
# cyclic cubic fields


X = symbols("x")


@dataclass(frozen=True)
class CyclicCubicField:
    conductor: int
    coeffs: tuple[int, int, int, int]   # x^3 + a x^2 + b x + c as (1, a, b, c)
    ramified: tuple[int, ...]

    def poly(self) -> Poly:
        return Poly(list(self.coeffs), X)

    def __str__(self):
        _, a, b, c = self.coeffs
        return f"x^3 + {a}x^2 + {b}x + {c} (conductor {self.conductor})"


def conductor_ok(f: int) -> bool:
    if f < 7:
        return False
    fac = factorint(f)
    for p, e in fac.items():
        if p == 3:
            if e != 2:
                return False
        elif p % 3 != 1 or e != 1:
            return False
    return True


def _local_logs(f: int) -> list[tuple[int, int, int]]:
    """(modulus, primitive root, order) for each prime-power factor of f."""
    out = []
    for p, e in sorted(factorint(f).items()):
        q = p**e
        out.append((q, primitive_root(q), (p - 1) * p ** (e - 1)))
    return out


def _dlog_table(q: int, g: int, n: int) -> dict[int, int]:
    table, x = {}, 1
    for k in range(n):
        table[x] = k
        x = x * g % q
    return table


def _period_polynomial(f: int, exps: Sequence[int]) -> tuple[int, int, int, int]:
    """Minimal polynomial of the Gaussian periods for the cubic character
    prod chi_q^{e_q} modulo f."""
    facs = _local_logs(f)
    tables = [_dlog_table(q, g, n) for q, g, n in facs]
    sums = [mpmath.mpc(0)] * 3
    digits = 30 + 4 * len(str(f))
    with mpmath.workdps(digits):
        sums = [mpmath.mpc(0), mpmath.mpc(0), mpmath.mpc(0)]
        for a in range(1, f):
            if gcd(a, f) != 1:
                continue
            c = 0
            for (q, _, n), t, e in zip(facs, tables, exps):
                c += e * t[a % q]
            sums[c % 3] += mpmath.expjpi(2 * mpmath.mpf(a) / f)
        e0, e1, e2 = sums
        s1 = e0 + e1 + e2
        s2 = e0 * e1 + e1 * e2 + e0 * e2
        s3 = e0 * e1 * e2
        out = []
        for v in (-s1, s2, -s3):
            re = mpmath.re(v)
            n = int(mpmath.nint(re))
            if abs(re - n) > mpmath.mpf(10) ** (-8) or abs(mpmath.im(v)) > mpmath.mpf(10) ** (-8):
                raise ArithmeticError("Gaussian period polynomial is not integral")
            out.append(n)
    return (1, out[0], out[1], out[2])


def _character_exponent_vectors(f: int) -> list[tuple[int, ...]]:
    t = len(factorint(f))
    # e and 2e give conjugate characters, hence the same field
    return [(1,) + rest for rest in product((1, 2), repeat=t - 1)]


def cubic_fields(f: int) -> list[CyclicCubicField]:
    """All cyclic cubic fields of conductor f (2^(t-1) of them)."""
    if not conductor_ok(f):
        raise InvalidInput(f"{f} is not the conductor of a cyclic cubic field")
    ram = tuple(sorted(factorint(f)))
    return [CyclicCubicField(f, _period_polynomial(f, e), ram) for e in _character_exponent_vectors(f)]


def cubic_field(f: int, index: int = 0, coeffs: Sequence[int] | None = None) -> CyclicCubicField:
    if coeffs is not None:
        return validate_cubic(f, coeffs)
    fields = cubic_fields(f)
    if not 0 <= index < len(fields):
        raise InvalidInput(f"conductor {f} has {len(fields)} cyclic cubic field(s)")
    return fields[index]


def validate_cubic(f: int, coeffs: Sequence[int]) -> CyclicCubicField:
    """Accept a user-supplied monic cubic defining a cyclic field of conductor f."""
    coeffs = tuple(int(c) for c in coeffs)
    if len(coeffs) == 3:
        coeffs = (1,) + coeffs
    if len(coeffs) != 4 or coeffs[0] != 1:
        raise InvalidInput("expected a monic cubic x^3 + a x^2 + b x + c")
    if not conductor_ok(f):
        raise InvalidInput(f"{f} is not the conductor of a cyclic cubic field")
    P = Poly(list(coeffs), X)
    if not P.is_irreducible:
        raise InvalidInput("the cubic is reducible")
    disc = int(discriminant(P))
    s = isqrt(disc) if disc > 0 else -1
    if s * s != disc:
        raise InvalidInput("the discriminant is not a square: the field is not cyclic")
    if disc % (f * f):
        raise InvalidInput(f"the discriminant {disc} is not divisible by f^2 = {f * f}")
    for p in factorint(f):
        if disc % p:
            raise InvalidInput(f"{p} divides the conductor but not the discriminant")
    return CyclicCubicField(f, coeffs, tuple(sorted(factorint(f))))


# ---------------------------------------------------------------------------
# the first layer B1 of the cyclotomic Z_3-extension of Q_3
#
# B1 = Q_3(zeta_9 + zeta_9^-1).  With pi = zeta_9 + zeta_9^-1 + 1 one gets the
# Eisenstein equation pi^3 = 3 pi^2 - 3, so Z_3[pi] is the ring of integers,
# v(pi) = 1/3, and a + b pi + c pi^2 has pi-adic valuation
# min(3 v(a), 3 v(b) + 1, 3 v(c) + 2).


class _B1:
    def __init__(self, M: int):
        self.M = M
        self.mod = 3**M

    def mul(self, x, y):
        a = [0] * 5
        for i in range(3):
            for j in range(3):
                a[i + j] += x[i] * y[j]
        for k in (4, 3):
            c = a[k]
            a[k] = 0
            a[k - 1] += 3 * c
            a[k - 3] -= 3 * c
        return tuple(t % self.mod for t in a[:3])

    def add(self, x, y):
        return tuple((s + t) % self.mod for s, t in zip(x, y))

    def scal(self, n, x):
        return tuple(n * t % self.mod for t in x)

    def val(self, x) -> int:
        """pi-adic valuation, capped at 3M (element indistinguishable from 0)."""
        cap = 3 * self.M
        v = cap
        for k, t in enumerate(x):
            if t % self.mod:
                v = min(v, 3 * valuation(t % self.mod, 3) + k)
        return v

    def pi_power(self, j):
        out = (1, 0, 0)
        for _ in range(j):
            out = self.mul(out, (0, 1, 0))
        return out

    def poly(self, coeffs, x):
        acc = (0, 0, 0)
        for c in coeffs:
            acc = self.add(self.mul(acc, x), (c % self.mod, 0, 0))
        return acc


def has_root_in_B1(coeffs: Sequence[int], m: int = 8) -> bool:
    """Does the monic integer polynomial have a root in B1?

    Roots are searched pi-adic digit by digit.  A candidate x with
    v(g(x)) > 2 v(g'(x)) lifts to a true root (Hensel); an empty candidate
    set proves that no root exists.  The search depth is 3m digits.
    """
    R = _B1(m + 2)
    depth = 3 * m
    deriv = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
    cands = [(0, 0, 0)]
    for j in range(depth):
        pj = R.pi_power(j)
        nxt = []
        for x in cands:
            for t in range(3):
                y = R.add(x, R.scal(t, pj))
                gy = R.val(R.poly(coeffs, y))
                if gy >= j + 1:
                    dy = R.val(R.poly(deriv, y))
                    if gy > 2 * dy and dy < j + 1:
                        return True
                    nxt.append(y)
        if not nxt:
            return False
        cands = nxt
        if len(cands) > 3**6:
            raise PrecisionExhausted("root search in B1 does not separate candidates")
    raise PrecisionExhausted(f"root search in B1 undecided after {depth} pi-adic digits")


@dataclass(frozen=True)
class RamificationProfile:
    log_ramified: frozenset
    split_in_L: frozenset

    def sorted(self) -> list[int]:
        return sorted(self.log_ramified)


def cubic_log_ramification(N: CyclicCubicField, m: int = 8) -> RamificationProfile:
    """Primes logarithmically ramified in N/Q.

    For p != 3 this is classical ramification (the 3-parts of e and e~
    agree).  At 3 the completion of N must lie in the cyclotomic Z^-extension
    of Q_3, whose only cubic subfield is B1; so 3 is logarithmically
    unramified exactly when the defining cubic has a root in B1.  This
    applies whether or not 3 divides the conductor: an unramified cubic
    completion is not locally cyclotomic at 3.
    """
    R = {p for p in N.ramified if p != 3}
    if not has_root_in_B1(N.coeffs, m):
        R.add(3)
    return RamificationProfile(frozenset(R), frozenset(p for p in R if p % 3 == 1))


@dataclass(frozen=True)
class CubicTrivialityDecision:
    trivial: bool
    i: int
    split_log_ramified: tuple[int, ...]
    witness: int | None
    local_index: int | None
    e_ab: int | None
    base_trivial: bool
    reason: str


def cor14_triviality(N: CyclicCubicField, i: int, m: int = 8) -> CubicTrivialityDecision:
    """Triviality of WK_2i(N) (3-part) for odd i, F = Q, L = Q(zeta_3)."""
    if i % 2 == 0:
        raise InvalidInput("the criterion is stated for odd i")
    prof = cubic_log_ramification(N, m)
    split = tuple(sorted(prof.split_in_L))
    base = logarithmic_class_group(-3, 3, None).is_trivial   # WK_2i(Q) through Q(sqrt -3)
    if not base:
        return CubicTrivialityDecision(False, i, split, None, None, None, base, "WK_2i(Q) is not trivial")
    if len(split) >= 2:
        return CubicTrivialityDecision(False, i, split, None, None, None, base,
                             "two or more log-ramified primes split in Q(zeta_3)")
    if not split:
        return CubicTrivialityDecision(True, i, split, None, None, None, base,
                             "no log-ramified prime splits in Q(zeta_3)")
    p0 = split[0]
    # zeta_3 is a local norm at p0 iff it is a cube mod p0 iff p0 = 1 mod 9
    index = 1 if p0 % 9 == 1 else 3
    e_ab = 3   # p0 != 3 is tamely and totally ramified in N
    ok = index == e_ab
    reason = (f"p0 = {p0}: (mu_L : mu_L n N_loc) = {index} "
              + ("= " if ok else "!= ") + f"e~ab = {e_ab}")
    return CubicTrivialityDecision(ok, i, split, p0, index, e_ab, base, reason)


@dataclass(frozen=True)
class CorestrictionResult:
    surjective: bool
    reason: str


def corestriction_surjectivity(N: CyclicCubicField, i: int, m: int = 8) -> CorestrictionResult:
    if i % 2:
        return CorestrictionResult(True, "omega^i != 1: Galois case, LN/L has no omega^i-isotypic piece")
    prof = cubic_log_ramification(N, m)
    if prof.log_ramified:
        return CorestrictionResult(True, f"LN/L is logarithmically ramified above {sorted(prof.log_ramified)}")
    if N.conductor == 9:
        return CorestrictionResult(True, "LN lies in L^c: no subextension disjoint from L^c")
    if logarithmic_class_group(1, 3).is_trivial:
        return CorestrictionResult(True, "C~l_3(Q) = 1: no logarithmically unramified cubic extension of Q outside Q^c")
    return CorestrictionResult(False, "a logarithmically unramified cubic extension disjoint from L^c exists")


def genus_rank_lower_bound(R: Iterable[int], i: int, ell: int = 3) -> int:
    """<omega^i, sum_{p in R} chi_p - chi_inf - 1> over Delta = Gal(Q(zeta_3)/Q).

    chi_p = 1 + omega for p split in Q(zeta_3), 1 otherwise; chi_inf = 1
    since complex conjugation generates Delta.
    """
    _require_ell3(ell)
    unit = 1 if i % 2 == 0 else 0          # <omega^i, 1>
    total = 0
    for p in R:
        total += 1 if p % 3 == 1 else unit  # <omega^i, 1 + omega> = 1
    return total - unit - unit
