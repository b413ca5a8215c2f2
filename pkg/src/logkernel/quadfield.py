"""Classical arithmetic of Q and of quadratic fields Q(sqrt d).

Class groups are computed with binary quadratic forms of the field
discriminant D.  For D > 0 this is the narrow (proper equivalence) group;
its odd part agrees with the odd part of the ordinary class group, which is
all the logarithmic layer needs since ell is odd.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from typing import Iterable, Iterator, Sequence

from sympy import factorint, isprime, jacobi_symbol, nextprime
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import InvalidInput, PrecisionExhausted, ResourceLimit
from .padic import PadicInt, valuation

DEFAULT_DISC_BOUND = 10**7
DLOG_GROUP_CAP = 3**8 * 64


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorint(abs(n)).values())


def squarefree_part(n: int) -> int:
    """The squarefree integer d with n = d * square."""
    if n == 0:
        raise InvalidInput("0 has no squarefree part")
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


# ---------------------------------------------------------------------------
# fields, elements, places


@dataclass(frozen=True)
class QuadField:
    """Q(sqrt d); d = 1 stands for Q itself."""

    d: int

    @property
    def is_rational(self) -> bool:
        return self.d == 1

    @property
    def disc(self) -> int:
        if self.is_rational:
            return 1
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def is_real(self) -> bool:
        return self.d > 1

    @property
    def is_imaginary(self) -> bool:
        return self.d < 0

    @property
    def degree(self) -> int:
        return 1 if self.is_rational else 2

    def __str__(self):
        return "Q" if self.is_rational else f"Q(sqrt({self.d}))"


RATIONAL = QuadField(1)


def make_field(d: int | None) -> QuadField:
    if d is None or d == 1:
        return RATIONAL
    if d == 0 or not is_squarefree(d):
        raise InvalidInput(f"d = {d} is not a squarefree integer different from 0 and 1")
    return QuadField(d)


@dataclass(frozen=True)
class QuadElem:
    """r + s*sqrt(d) with rational r, s."""

    r: Fraction
    s: Fraction
    d: int

    @classmethod
    def make(cls, r, s, d) -> "QuadElem":
        return cls(Fraction(r), Fraction(s), d)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadElem(self.r * other, self.s * other, self.d)
        return QuadElem(self.r * other.r + self.d * self.s * other.s,
                        self.r * other.s + self.s * other.r, self.d)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadElem(self.r + other, self.s, self.d)
        return QuadElem(self.r + other.r, self.s + other.s, self.d)

    def __neg__(self):
        return QuadElem(-self.r, -self.s, self.d)

    def conj(self) -> "QuadElem":
        return QuadElem(self.r, -self.s, self.d)

    def norm(self) -> Fraction:
        return self.r * self.r - self.d * self.s * self.s

    def trace(self) -> Fraction:
        return 2 * self.r

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise InvalidInput("zero is not invertible")
        c = self.conj()
        return QuadElem(c.r / n, c.s / n, self.d)

    def __pow__(self, k: int) -> "QuadElem":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QuadElem.make(1, 0, self.d), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return self.r == 0 and self.s == 0

    def is_integral(self) -> bool:
        return self.trace().denominator == 1 and self.norm().denominator == 1

    def as_integers(self) -> tuple[int, int, int]:
        """(A, B, den) with self = (A + B sqrt d) / den."""
        den = self.r.denominator * self.s.denominator // gcd(self.r.denominator, self.s.denominator)
        return int(self.r * den), int(self.s * den), den

    def __str__(self):
        if self.s == 0:
            return str(self.r)
        return f"{self.r} + {self.s}*sqrt({self.d})"


def elem(K: QuadField, r, s=0) -> QuadElem:
    return QuadElem.make(r, s, K.d)


def zeta3() -> QuadElem:
    return QuadElem.make(Fraction(-1, 2), Fraction(1, 2), -3)


@dataclass(frozen=True, order=True)
class PlaceId:
    """A place of K: residue characteristic, index among the places over q,
    and splitting type (``split``, ``inert``, ``ramified``, or ``rational``
    for Q itself).  q = 0 marks the archimedean places."""

    q: int
    index: int = 0
    kind: str = "rational"

    def __post_init__(self):
        if self.index == 1 and self.kind != "split":
            raise InvalidInput("index 1 only exists for split primes")

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    def label(self) -> str:
        if self.is_infinite:
            return "inf"
        return f"p{self.q}" + ("'" if self.index else "")


INFINITE = PlaceId(0, 0, "infinite")


def kronecker(D: int, q: int) -> int:
    if q == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    return int(jacobi_symbol(D % q, q))


def split_prime(K: QuadField, q: int) -> list[PlaceId]:
    if not isprime(q):
        raise InvalidInput(f"{q} is not prime")
    if K.is_rational:
        return [PlaceId(q, 0, "rational")]
    k = kronecker(K.disc, q)
    if k == 1:
        return [PlaceId(q, 0, "split"), PlaceId(q, 1, "split")]
    if k == -1:
        return [PlaceId(q, 0, "inert")]
    return [PlaceId(q, 0, "ramified")]


def _prime_b_values(D: int, q: int) -> list[int]:
    """All b in [0, 2q) with b^2 = D mod 4q."""
    return [b for b in range(2 * q) if (b * b - D) % (4 * q) == 0]


def prime_ideal_b(K: QuadField, place: PlaceId) -> int:
    """b of the prime ideal (q, (b + sqrt D)/2) attached to a non-inert place."""
    if place.kind not in ("split", "ramified"):
        raise InvalidInput(f"place {place} is not a prime ideal of the form (q, (b+sqrtD)/2)")
    bs = _prime_b_values(K.disc, place.q)
    return bs[place.index]


def local_sqrt(K: QuadField, place: PlaceId, prec: int) -> int:
    """Image of sqrt(D) in Z_q under the embedding attached to a split place."""
    if place.kind != "split":
        raise InvalidInput("local square root only for split places")
    q, D = place.q, K.disc
    b = prime_ideal_b(K, place)
    mod = q**prec
    if q == 2:
        # (b + t)/2 must lie in the prime above 2, i.e. t = -b mod 4
        t = (-b) % 4
        j = 3
        while j <= prec + 1:
            if (t * t - D) % 2**(j + 1):
                t += 2**(j - 1)
            j += 1
        t %= 2 ** (prec + 1)
        if (t * t - D) % 2 ** min(prec + 2, prec + 1):
            raise ArithmeticError("Hensel lift at 2 failed")
        return t % mod
    t = (-b) % q
    if (t * t - D) % q:
        raise ArithmeticError("split prime without a square root of D")
    # Newton iteration on X^2 - D
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        m = q**k
        t = (t - (t * t - D) * pow(2 * t, -1, m)) % m
    return t % mod


def _sqrt_d_image(K: QuadField, place: PlaceId, prec: int) -> int:
    t = local_sqrt(K, place, prec + 1)
    if K.disc == K.d:
        return t % place.q**prec
    # D = 4d and q odd (q = 2 is ramified when D = 4d)
    return t * pow(2, -1, place.q**(prec + 1)) % place.q**prec


def _qval_fraction(x: Fraction, q: int) -> int:
    return valuation(x.numerator, q) - valuation(x.denominator, q)


def place_valuation(K: QuadField, place: PlaceId, x: QuadElem) -> int:
    """Classical normalized valuation v_P(x)."""
    if x.is_zero():
        raise InvalidInput("valuation of zero")
    q = place.q
    if K.is_rational:
        if x.s != 0:
            raise InvalidInput("element does not lie in Q")
        return _qval_fraction(x.r, q)
    n = x.norm()
    if place.kind == "inert":
        return _qval_fraction(n, q) // 2
    if place.kind == "ramified":
        return _qval_fraction(n, q)
    A, B, den = x.as_integers()
    nA = A * A - K.d * B * B
    prec = valuation(nA, q) + 2
    t = _sqrt_d_image(K, place, prec)
    img = (A + B * t) % q**prec
    if img == 0:
        raise ArithmeticError("embedding precision too small")
    return valuation(img, q) - valuation(den, q)


# ---------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True, order=True)
class Form:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, M: tuple[tuple[int, int], tuple[int, int]]) -> "Form":
        (p, q), (r, s) = M
        return Form(self(p, r), 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s, self(q, s))

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1


Mat = tuple[tuple[int, int], tuple[int, int]]
IDENTITY: Mat = ((1, 0), (0, 1))


def _mat_mul(A: Mat, B: Mat) -> Mat:
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def is_reduced_definite(f: Form) -> bool:
    a, b, c = f.a, f.b, f.c
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce_definite(f: Form, M: Mat = IDENTITY) -> tuple[Form, Mat]:
    """Gauss reduction of a positive definite form, tracking the SL2 transform."""
    a, b, c = f.a, f.b, f.c
    if a <= 0:
        raise InvalidInput("definite reduction expects a > 0")
    while True:
        if not (-a < b <= a):
            t = (a - b) // (2 * a)
            M = _mat_mul(M, ((1, t), (0, 1)))
            c = a * t * t + b * t + c
            b = b + 2 * a * t
        if a > c or (a == c and b < 0):
            M = _mat_mul(M, ((0, -1), (1, 0)))
            a, b, c = c, -b, a
            continue
        return Form(a, b, c), M


def is_reduced_indefinite(f: Form) -> bool:
    D = f.disc
    a, b = abs(f.a), f.b
    if not (0 < b and b * b < D):
        return False
    if (2 * a + b) ** 2 <= D:
        return False
    return 2 * a - b <= 0 or (2 * a - b) ** 2 < D


def rho(f: Form, M: Mat = IDENTITY) -> tuple[Form, Mat]:
    """One step of indefinite reduction: (a, b, c) -> (c, b', c')."""
    D = f.disc
    s = isqrt(D)
    a, b, c = f.a, f.b, f.c
    ac = abs(c)
    if ac > s:
        # b' in (-|c|, |c|], b' = -b mod 2|c|
        b2 = (-b) % (2 * ac)
        if b2 > ac:
            b2 -= 2 * ac
    else:
        # largest b' <= s with b' = -b mod 2|c|
        b2 = s - ((s + b) % (2 * ac))
    t = (b2 + b) // (2 * c)
    M = _mat_mul(M, ((0, -1), (1, t)))
    return Form(c, b2, (b2 * b2 - D) // (4 * c)), M


def reduce_indefinite(f: Form, M: Mat = IDENTITY) -> tuple[Form, Mat]:
    steps = 0
    while not is_reduced_indefinite(f):
        f, M = rho(f, M)
        steps += 1
        if steps > 10 * (abs(f.a) + abs(f.c) + 100):
            raise ArithmeticError("indefinite reduction did not terminate")
    return f, M


def reduce_form(f: Form, M: Mat = IDENTITY) -> tuple[Form, Mat]:
    if f.disc < 0:
        if f.a < 0:
            raise InvalidInput("negative definite forms are not used")
        return reduce_definite(f, M)
    return reduce_indefinite(f, M)


def cycle(f: Form) -> list[Form]:
    """The rho-cycle of a reduced indefinite form."""
    out = [f]
    g, _ = rho(f)
    while g != f:
        out.append(g)
        g, _ = rho(g)
    return out


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(u, v, g) with u*a + v*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        return -x0, -y0, -a
    return x0, y0, a


def compose(f1: Form, f2: Form) -> Form:
    """Dirichlet composition of primitive forms with positive leading
    coefficients (not reduced)."""
    if f1.disc != f2.disc:
        raise InvalidInput("forms of different discriminant")
    D = f1.disc
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1, _ = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        u, _, d = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        u, v, d1 = _xgcd(s, d)
        x2, y2 = u, -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - D) // (4 * a3)
    return Form(a3, b3, c3)


def principal_form(D: int) -> Form:
    if D < 0:
        b = D % 2
        return Form(1, b, (b * b - D) // 4)
    s = isqrt(D)
    b = s if (s - D) % 2 == 0 else s - 1
    return Form(1, b, (b * b - D) // 4)


def reduced_forms(D: int) -> list[Form]:
    """All primitive reduced forms of discriminant D (for D > 0: every form
    of every reduced cycle)."""
    out = []
    if D < 0:
        amax = isqrt(-D // 3)
        for a in range(1, amax + 1):
            for b in range(-a + 1, a + 1):
                if (b * b - D) % (4 * a):
                    continue
                c = (b * b - D) // (4 * a)
                f = Form(a, b, c)
                if c >= a and is_reduced_definite(f) and f.is_primitive():
                    out.append(f)
        return out
    s = isqrt(D)
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        n = (D - b * b) // 4
        for a in range(1, isqrt(n) * 2 + 2):
            if n % a:
                continue
            c = -n // a
            for sign in (1, -1):
                f = Form(sign * a, b, sign * c)
                if f.is_primitive() and is_reduced_indefinite(f):
                    out.append(f)
    return sorted(set(out))


# ---------------------------------------------------------------------------
# class groups


def _canonical(f: Form) -> Form:
    g, _ = reduce_form(f)
    if g.disc < 0:
        return g
    return min(h for h in cycle(g) if h.a > 0)


@dataclass(frozen=True)
class ClassGroupData:
    """Narrow form class group with a polycyclic discrete-log table."""

    disc: int
    generators: tuple[Form, ...]
    relations: tuple[tuple[int, ...], ...]   # columns of R: Cl = Z^k / R Z^k
    invariants: tuple[int, ...]              # invariant factors > 1
    table: dict = None                        # canonical form -> exponent vector

    @property
    def order(self) -> int:
        out = 1
        for n in self.invariants:
            out *= n
        return out

    def elementary_divisors(self) -> list[int]:
        out = []
        for n in self.invariants:
            out.extend(p**e for p, e in factorint(n).items())
        return sorted(out)

    def ell_exponents(self, ell: int) -> list[int]:
        return sorted(valuation(n, ell) for n in self.invariants if n % ell == 0)

    def dlog(self, f: Form) -> tuple[int, ...]:
        return self.table[_canonical(f)]

    def element(self, vec: Sequence[int]) -> Form:
        out = principal_form(self.disc)
        for g, e in zip(self.generators, vec):
            e %= self.order if self.order else 1
            for _ in range(e):
                out = _canonical(compose(out, g))
        return out

    def relation_matrix(self) -> Matrix:
        return Matrix(self.relations).T if self.relations else Matrix.zeros(0, 0)


def class_group(K: QuadField | int, bound: int = DEFAULT_DISC_BOUND) -> ClassGroupData:
    D = K.disc if isinstance(K, QuadField) else K
    if isinstance(K, QuadField) and K.is_rational:
        return ClassGroupData(1, (), (), (), {Form(1, 1, 0): ()})
    if abs(D) > bound:
        raise ResourceLimit(f"|D| = {abs(D)} exceeds the configured bound {bound}")
    reps = sorted({_canonical(f) for f in reduced_forms(D)})
    ident = _canonical(principal_form(D))
    table: dict[Form, tuple[int, ...]] = {ident: ()}
    gens: list[Form] = []
    rels: list[list[int]] = []
    for f in reps:
        if f in table:
            continue
        e, g = 1, f
        while g not in table:
            g = _canonical(compose(g, f))
            e += 1
        k = len(gens)
        rel = list(table[g]) + [0] * (k - len(table[g]))
        rel = [-x for x in rel] + [e]
        gens.append(f)
        new: dict[Form, tuple[int, ...]] = {}
        for h, vec in table.items():
            vec = tuple(vec) + (0,) * (k - len(vec))
            x = h
            for j in range(e):
                new[x] = vec + (j,)
                x = _canonical(compose(x, f))
        table = new
        rels = [r + [0] for r in rels]
        rels.append(rel)
        if len(table) > DLOG_GROUP_CAP:
            raise ResourceLimit("class group larger than the discrete-log cap")
    k = len(gens)
    table = {h: tuple(v) + (0,) * (k - len(v)) for h, v in table.items()}
    if k:
        R = Matrix(rels).T
        S, _, _ = smith_normal_decomp(R)
        inv = tuple(int(abs(S[i, i])) for i in range(k) if abs(S[i, i]) > 1)
    else:
        inv = ()
    return ClassGroupData(D, tuple(gens), tuple(tuple(r) for r in rels), inv, table)


# ---------------------------------------------------------------------------
# ideals and principality


@dataclass(frozen=True)
class QuadIdeal:
    """Primitive ideal a Z + (b + sqrt D)/2 Z with b^2 = D mod 4a."""

    a: int
    b: int
    D: int

    def __post_init__(self):
        if self.a <= 0 or (self.b * self.b - self.D) % (4 * self.a):
            raise InvalidInput(f"({self.a}, {self.b}) is not an ideal of discriminant {self.D}")

    @property
    def norm(self) -> int:
        return self.a

    def form(self) -> Form:
        return Form(self.a, self.b, (self.b * self.b - self.D) // (4 * self.a))


def _prime_power_b(D: int, q: int, b0: int, k: int) -> int:
    """b with b^2 = D mod 4 q^k lifting the prime ideal (q, (b0+sqrtD)/2)."""
    mod = 4 * q**k
    if k == 0:
        return D % 2
    # t = -b is a root of X^2 = D; lift t in Z_q then pick b = -t with b = D mod 2
    if q == 2:
        t = (-b0) % 4
        for j in range(3, k + 3):
            if (t * t - D) % 2**(j + 1):
                t += 2**(j - 1)
        b = (-t) % (2 * 2**k)
    else:
        t = (-b0) % q
        m = q
        while m < q**k:
            m = min(m * m, q**k)
            t = (t - (t * t - D) * pow(2 * t, -1, m)) % m
        b = (-t) % q**k
        if (b - D) % 2:
            b += q**k
    if (b * b - D) % mod:
        raise ArithmeticError("prime power lift failed")
    return b % (2 * q**k)


def ideal_from_prime_powers(D: int, parts: Iterable[tuple[int, int, int]]) -> QuadIdeal:
    """Product of powers P^k of primes with pairwise distinct norms q.

    ``parts`` holds (q, b0, k) with P = (q, (b0 + sqrt D)/2)."""
    a, b, mod = 1, D % 2, 2
    for q, b0, k in parts:
        if k == 0:
            continue
        bq = _prime_power_b(D, q, b0, k)
        mq = 2 * q**k
        # CRT: b = old mod (2a), b = bq mod (2 q^k); both agree mod 2
        g = gcd(mod, mq)
        if (b - bq) % g:
            raise ArithmeticError("incompatible CRT data")
        lcm = mod // g * mq
        u, _, _ = _xgcd(mod // g, mq // g)
        b = (b + (bq - b) // g * u % (mq // g) * mod) % lcm
        mod = lcm
        a *= q**k
    return QuadIdeal(a, b % (2 * a), D)


def principal_generator(ideal: QuadIdeal) -> QuadElem | None:
    """A generator of the ideal if it is narrowly principal (None otherwise)."""
    D = ideal.D
    f = ideal.form()
    g, M = reduce_form(f)
    if D < 0:
        if g.a != 1:
            return None
        x, y = M[0][0], M[1][0]
    else:
        start = g
        x = y = None
        while True:
            if abs(g.a) == 1:
                x, y = M[0][0], M[1][0]
                if g.a == 1:
                    break
            g, M = rho(g, M)
            if g == start:
                break
        if x is None:
            return None
    # x*a + y*(b + sqrtD)/2, written as r + s sqrt(d)
    r = Fraction(x * ideal.a) + Fraction(y * ideal.b, 2)
    sD = Fraction(y, 2)
    d = D if D % 4 == 1 else D // 4
    s = sD if D % 4 == 1 else 2 * sD
    return QuadElem(r, s, d)


def fundamental_unit(K: QuadField, max_bits: int = 200_000) -> QuadElem:
    """Smallest unit > 1 from the continued fraction of the ring generator."""
    if not K.is_real:
        raise InvalidInput("fundamental unit only for real quadratic fields")
    d = K.d
    s = isqrt(d)
    if d % 4 == 1:
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    p_prev, p = 1, None
    q_prev, q = 0, None
    pm2, pm1 = 0, 1
    qm2, qm1 = 1, 0
    while True:
        a = (P + s) // Q
        pk = a * pm1 + pm2
        qk = a * qm1 + qm2
        if d % 4 == 1:
            # N(p - q*omega) with omega = (1 + sqrt d)/2
            nrm = pk * pk - pk * qk + qk * qk * (1 - d) // 4
            if abs(nrm) == 1:
                return QuadElem(Fraction(pk) - Fraction(qk, 2), Fraction(qk, 2), d)
        else:
            nrm = pk * pk - d * qk * qk
            if abs(nrm) == 1:
                return QuadElem(Fraction(pk), Fraction(qk), d)
        if pk.bit_length() > max_bits:
            raise ResourceLimit("fundamental unit exceeds the big-integer budget")
        pm2, pm1 = pm1, pk
        qm2, qm1 = qm1, qk
        P = a * Q - P
        Q = (d - P * P) // Q


# ---------------------------------------------------------------------------
# S-units


def _integer_kernel(A: list[list[int]]) -> list[list[int]]:
    """Z-basis of {x in Z^N : A x = 0} by unimodular column reduction."""
    m = len(A)
    N = len(A[0]) if m else 0
    cols = [[A[i][j] for i in range(m)] + [1 if k == j else 0 for k in range(N)] for j in range(N)]
    pivot_col = 0
    for i in range(m):
        # gcd-combine entries of row i over columns pivot_col..N-1
        while True:
            nz = [j for j in range(pivot_col, N) if cols[j][i] != 0]
            if len(nz) <= 1:
                break
            jmin = min(nz, key=lambda j: abs(cols[j][i]))
            for j in nz:
                if j == jmin:
                    continue
                qt = cols[j][i] // cols[jmin][i]
                cols[j] = [x - qt * y for x, y in zip(cols[j], cols[jmin])]
        nz = [j for j in range(pivot_col, N) if cols[j][i] != 0]
        if nz:
            j = nz[0]
            cols[pivot_col], cols[j] = cols[j], cols[pivot_col]
            pivot_col += 1
    return [c[m:] for c in cols[pivot_col:]]


def relation_lattice(cl: ClassGroupData, dlogs: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of {a : sum a_j [p_j] = 0 in Cl} for places with given dlogs."""
    n = len(dlogs)
    k = len(cl.generators)
    if k == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    rels = cl.relations
    A = []
    for row in range(k):
        A.append([dlogs[j][row] for j in range(n)] + [-rels[c][row] for c in range(k)])
    ker = _integer_kernel(A)
    basis = [v[:n] for v in ker]
    # Hermite-style cleanup for deterministic output
    H = Matrix(basis).T
    from sympy.matrices.normalforms import hermite_normal_form
    Hn = hermite_normal_form(H)
    return [[int(Hn[i, j]) for i in range(n)] for j in range(Hn.shape[1])]


def place_form(K: QuadField, place: PlaceId) -> Form | None:
    """Form attached to the prime ideal of a place (None for principal inert primes)."""
    if place.kind in ("inert", "rational"):
        return None
    b = prime_ideal_b(K, place)
    q = place.q
    return Form(q, b, (b * b - K.disc) // (4 * q))


def place_dlog(K: QuadField, cl: ClassGroupData, place: PlaceId) -> tuple[int, ...]:
    f = place_form(K, place)
    k = len(cl.generators)
    if f is None:
        return (0,) * k
    return cl.dlog(f)


@dataclass(frozen=True)
class SUnitSystem:
    field: QuadField
    places: tuple[PlaceId, ...]
    generators: tuple[QuadElem, ...]
    valuations: tuple[tuple[int, ...], ...]
    torsion: str
    has_fundamental_unit: bool
    relation_basis: tuple[tuple[int, ...], ...]

    def check(self) -> bool:
        for g, vals in zip(self.generators, self.valuations):
            if tuple(place_valuation(self.field, p, g) for p in self.places) != vals:
                return False
        return True


def torsion_note(K: QuadField) -> str:
    if K.d == -3:
        return "mu_6 (contains zeta_3)"
    if K.d == -1:
        return "mu_4"
    return "mu_2"


def principal_ideal_generator(K: QuadField, places: Sequence[PlaceId], exps: Sequence[int]) -> QuadElem:
    """Generator of prod P^a over the given places (the product must be principal)."""
    if K.is_rational:
        out = Fraction(1)
        for p, a in zip(places, exps):
            out *= Fraction(p.q) ** a
        return QuadElem(out, Fraction(0), 1)
    D = K.disc
    by_q: dict[int, dict[int, int]] = {}
    kinds: dict[int, str] = {}
    for p, a in zip(places, exps):
        by_q.setdefault(p.q, {}).setdefault(p.index, 0)
        by_q[p.q][p.index] += a
        kinds[p.q] = p.kind
    scalar = Fraction(1)
    parts = []
    for q, ex in sorted(by_q.items()):
        kind = kinds[q]
        if kind == "inert":
            scalar *= Fraction(q) ** ex.get(0, 0)
        elif kind == "ramified":
            a = ex.get(0, 0)
            scalar *= Fraction(q) ** (a // 2)
            if a % 2:
                parts.append((q, prime_ideal_b(K, PlaceId(q, 0, "ramified")), 1))
        else:
            x, y = ex.get(0, 0), ex.get(1, 0)
            m = min(x, y)
            scalar *= Fraction(q) ** m
            if x > m:
                parts.append((q, prime_ideal_b(K, PlaceId(q, 0, "split")), x - m))
            if y > m:
                parts.append((q, prime_ideal_b(K, PlaceId(q, 1, "split")), y - m))
    J = ideal_from_prime_powers(D, parts)
    beta = principal_generator(J)
    if beta is None:
        raise ArithmeticError("ideal is not principal although its class vanishes")
    return beta * scalar


def s_unit_system(K: QuadField, places: Sequence[PlaceId], cl: ClassGroupData | None = None) -> SUnitSystem:
    places = tuple(places)
    if any(p.is_infinite for p in places):
        raise InvalidInput("S-unit places must be finite")
    if cl is None:
        cl = class_group(K)
    dlogs = [place_dlog(K, cl, p) for p in places]
    basis = relation_lattice(cl, dlogs)
    gens: list[QuadElem] = []
    vals: list[tuple[int, ...]] = []
    if K.is_real:
        eps = fundamental_unit(K)
        gens.append(eps)
        vals.append((0,) * len(places))
    for vec in basis:
        beta = principal_ideal_generator(K, places, vec)
        gens.append(beta)
        vals.append(tuple(place_valuation(K, p, beta) for p in places))
        if vals[-1] != tuple(vec):
            raise ArithmeticError(f"generator {beta} has valuations {vals[-1]} != {vec}")
    return SUnitSystem(K, places, tuple(gens), tuple(vals), torsion_note(K), K.is_real,
                       tuple(tuple(v) for v in basis))


# ---------------------------------------------------------------------------
# ell-adic embeddings


@dataclass(frozen=True)
class LocalNorm:
    """ell^shift * unit, the local norm of an element at a place above ell."""

    shift: int
    unit: PadicInt


def _rational_local_norm(x: Fraction, ell: int, m: int) -> LocalNorm:
    v = _qval_fraction(x, ell)
    u = x / Fraction(ell) ** v
    return LocalNorm(v, PadicInt.from_rational(u, ell, m))


def embed_at_ell(K: QuadField, x: QuadElem, ell: int, m: int) -> list[LocalNorm]:
    """Local norms of x at the places above ell (one per place)."""
    if x.is_zero():
        raise InvalidInput("cannot embed zero")
    if K.is_rational:
        return [_rational_local_norm(x.r, ell, m)]
    places = split_prime(K, ell)
    if places[0].kind != "split":
        return [_rational_local_norm(x.norm(), ell, m)]
    A, B, den = x.as_integers()
    nA = A * A - K.d * B * B
    extra = valuation(nA, ell) if nA else 0
    work = m + extra + 1
    out = []
    vden = valuation(den, ell)
    den_unit = den // ell**vden
    for p in places:
        t = _sqrt_d_image(K, p, work)
        img = (A + B * t) % ell**work
        if img == 0:
            raise PrecisionExhausted("image vanishes at working precision")
        v = valuation(img, ell)
        if work - v < m:
            raise PrecisionExhausted("not enough digits after stripping ell")
        u = img // ell**v * pow(den_unit, -1, ell**m)
        out.append(LocalNorm(v - vden, PadicInt(ell, u, m)))
    return out


def primes_from(start: int = 2) -> Iterator[int]:
    q = start if isprime(start) else nextprime(start)
    while True:
        yield q
        q = nextprime(q)
