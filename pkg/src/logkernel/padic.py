"""Finite-precision arithmetic in Z_ell and linear algebra over Z/ell^m.

Values are plain Python integers reduced modulo ``ell**prec``.  Every
operation keeps track of how many ell-adic digits are actually justified by
its inputs, so a result never claims more precision than it has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy import isprime

from .errors import InvalidInput, PrecisionExhausted


def check_odd_prime(ell: int) -> None:
    if ell == 2 or not isprime(ell):
        raise InvalidInput(f"ell must be an odd prime, got {ell}")


def valuation(n: int, ell: int) -> int:
    """ell-adic valuation of a nonzero integer."""
    if n == 0:
        raise InvalidInput("valuation of 0 is infinite")
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def rational_valuation(x: Fraction | int, ell: int) -> int:
    x = Fraction(x)
    return valuation(x.numerator, ell) - valuation(x.denominator, ell)


@dataclass(frozen=True)
class PadicInt:
    """An element of Z_ell known modulo ell**prec."""

    ell: int
    value: int
    prec: int

    def __post_init__(self):
        if self.prec < 0:
            raise InvalidInput("precision must be nonnegative")
        object.__setattr__(self, "value", self.value % self.ell**self.prec)

    @classmethod
    def from_rational(cls, x: Fraction | int, ell: int, prec: int) -> "PadicInt":
        x = Fraction(x)
        if x.denominator % ell == 0:
            raise InvalidInput(f"{x} is not an {ell}-adic integer")
        mod = ell**prec
        return cls(ell, x.numerator * pow(x.denominator, -1, mod) % mod if prec else 0, prec)

    @property
    def modulus(self) -> int:
        return self.ell**self.prec

    def valuation(self) -> int:
        """Valuation, or ``prec`` when the value is indistinguishable from 0."""
        if self.value == 0:
            return self.prec
        return valuation(self.value, self.ell)

    def is_zero(self) -> bool:
        return self.value == 0

    def is_unit(self) -> bool:
        return self.prec > 0 and self.value % self.ell != 0

    def _coerce(self, other) -> "PadicInt":
        if isinstance(other, PadicInt):
            if other.ell != self.ell:
                raise InvalidInput("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicInt.from_rational(other, self.ell, self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = min(self.prec, other.prec)
        return PadicInt(self.ell, self.value + other.value, p)

    __radd__ = __add__

    def __neg__(self):
        return PadicInt(self.ell, -self.value, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PadicInt(self.ell, self.value * other.value, min(self.prec, other.prec))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = PadicInt(self.ell, 1, self.prec)
        for _ in range(k):
            result = result * self
        return result

    def inverse(self) -> "PadicInt":
        if not self.is_unit():
            raise InvalidInput("only units are invertible; use exact_divide")
        return PadicInt(self.ell, pow(self.value, -1, self.modulus), self.prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def exact_divide(self, v: int) -> "PadicInt":
        """Divide by ell**v, losing v digits of precision."""
        if v < 0:
            raise InvalidInput("negative shift")
        if v > self.prec:
            raise PrecisionExhausted(f"cannot divide a {self.prec}-digit value by {self.ell}^{v}")
        if self.value % self.ell**v:
            raise InvalidInput(f"value is not divisible by {self.ell}^{v}")
        return PadicInt(self.ell, self.value // self.ell**v, self.prec - v)

    def reduce(self, prec: int) -> "PadicInt":
        if prec > self.prec:
            raise PrecisionExhausted(f"cannot raise precision {self.prec} -> {prec}")
        return PadicInt(self.ell, self.value, prec)

    def balanced(self) -> int:
        """Representative in (-ell^m/2, ell^m/2]."""
        mod = self.modulus
        return self.value - mod if self.value > mod // 2 else self.value

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} + O({self.ell}^{self.prec})"


def teichmuller(a: int, ell: int, m: int) -> PadicInt:
    """The (ell-1)-th root of unity congruent to ``a`` modulo ell."""
    check_odd_prime(ell)
    if a % ell == 0:
        raise InvalidInput(f"{a} is not a unit modulo {ell}")
    mod = ell**m
    x = a % mod
    # a -> a^ell contracts by one digit per step
    for _ in range(m):
        y = pow(x, ell, mod)
        if y == x:
            break
        x = y
    return PadicInt(ell, x, m)


def _log_one_plus(z: int, ell: int, m: int) -> int:
    """log(1 + z) mod ell^m for an integer z divisible by ell."""
    if z % ell:
        raise InvalidInput("log series needs z in ell*Z_ell")
    if m <= 0:
        return 0
    vz = valuation(z, ell) if z else m
    if vz >= m:
        return 0
    # number of terms: stop once k*vz - v(k) >= m for all later k
    k_max = 1
    while k_max * vz - int(math.log(k_max, ell) + 1e-9) < m:
        k_max += 1
    guard = int(math.log(k_max, ell) + 1e-9) + 2
    work = m + guard
    wmod = ell**work
    mod = ell**m
    zk = 1
    total = 0
    for k in range(1, k_max + 1):
        zk = zk * z % wmod
        vk = valuation(k, ell)
        num = zk // ell**vk
        term = num * pow(k // ell**vk, -1, mod)
        total += term if k % 2 else -term
    return total % mod


def log_unit(u: int, ell: int, m: int) -> int:
    """Iwasawa logarithm of an ell-adic unit given modulo ell^m."""
    mod = ell**m
    u %= mod
    if u % ell == 0:
        raise InvalidInput("log_unit expects a unit")
    omega = teichmuller(u, ell, m).value
    principal = u * pow(omega, -1, mod) % mod
    return _log_one_plus(principal - 1, ell, m)


def iwasawa_log(x: Fraction | int, ell: int, m: int) -> PadicInt:
    """Log_Iw of a nonzero rational: Log_Iw(ell) = 0 and torsion maps to 0."""
    check_odd_prime(ell)
    x = Fraction(x)
    if x == 0:
        raise InvalidInput("Log_Iw(0) is undefined")
    num, den = abs(x.numerator), x.denominator
    while num % ell == 0:
        num //= ell
    while den % ell == 0:
        den //= ell
    mod = ell**m
    u = num * pow(den, -1, mod) % mod
    return PadicInt(ell, log_unit(u, ell, m), m)


def iwasawa_log_padic(x: PadicInt, m: int) -> PadicInt:
    """Log_Iw of a nonzero ell-adic integer known to finite precision.

    The ell-power is stripped first, so ``x`` must carry at least
    ``v(x) + m`` digits.
    """
    v = x.valuation()
    if v >= x.prec:
        raise PrecisionExhausted("value indistinguishable from zero")
    available = x.prec - v
    if available < m:
        raise PrecisionExhausted(f"need {v + m} digits, have {x.prec}")
    u = x.value // x.ell**v
    return PadicInt(x.ell, log_unit(u % x.ell**m, x.ell, m), m)


# ---------------------------------------------------------------------------
# linear algebra over Z/ell^m


@dataclass(frozen=True)
class PMatrix:
    """Rectangular matrix over Z_ell with a common absolute precision."""

    ell: int
    prec: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        mod = self.ell**self.prec
        rows = tuple(tuple(int(a) % mod for a in r) for r in self.rows)
        if len({len(r) for r in rows}) > 1:
            raise InvalidInput("matrix rows have different lengths")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[int | Fraction | PadicInt]], ell: int, prec: int):
        rows = []
        for r in entries:
            row = []
            for a in r:
                if isinstance(a, PadicInt):
                    if a.prec < prec:
                        raise PrecisionExhausted(f"entry known to {a.prec} < {prec} digits")
                    row.append(a.value)
                else:
                    row.append(PadicInt.from_rational(a, ell, prec).value)
            rows.append(tuple(row))
        return cls(ell, prec, tuple(rows))

    @property
    def shape(self) -> tuple[int, int]:
        n = len(self.rows)
        return n, (len(self.rows[0]) if n else 0)


@dataclass(frozen=True)
class SnfResult:
    """U * M * V = diag(ell^a_i) modulo ell^prec.

    An exponent equal to ``prec`` means "at least prec": the diagonal entry
    vanished at this precision.
    """

    ell: int
    prec: int
    divisor_exponents: tuple[int, ...]
    shape: tuple[int, int]
    U: np.ndarray = field(repr=False, compare=False)
    V: np.ndarray = field(repr=False, compare=False)
    U_inv: np.ndarray = field(repr=False, compare=False)
    V_inv: np.ndarray = field(repr=False, compare=False)

    def cokernel_exponents(self) -> list[int]:
        """Exponents of Z_ell^rows / image, one per row; ``prec`` = unresolved."""
        rows = self.shape[0]
        return list(self.divisor_exponents) + [self.prec] * (rows - len(self.divisor_exponents))

    def resolved(self) -> bool:
        return all(a < self.prec for a in self.cokernel_exponents())

    def diagonal(self) -> np.ndarray:
        rows, cols = self.shape
        D = np.zeros((rows, cols), dtype=object)
        for i, a in enumerate(self.divisor_exponents):
            D[i, i] = self.ell**a % self.ell**self.prec
        return D


def _dtype_for(mod: int, n: int):
    return np.int64 if (n + 2) * mod * mod < 2**62 else object


def smith_normal_form(M: PMatrix) -> SnfResult:
    """Smith form over Z/ell^m with deterministic pivoting.

    The pivot is the entry of minimal valuation in the active block, ties
    broken by smallest (row, col).
    """
    ell, prec = M.ell, M.prec
    rows, cols = M.shape
    mod = ell**prec
    dtype = _dtype_for(mod, max(rows, cols, 1))
    A = np.array(M.rows, dtype=dtype).reshape(rows, cols) if rows and cols else np.zeros((rows, cols), dtype=dtype)
    U = np.eye(rows, dtype=dtype)
    U_inv = np.eye(rows, dtype=dtype)
    V = np.eye(cols, dtype=dtype)
    V_inv = np.eye(cols, dtype=dtype)
    powers = [ell**k for k in range(prec + 1)]
    exps: list[int] = []

    for t in range(min(rows, cols)):
        sub = A[t:, t:]
        pivot = None
        for k in range(prec):
            mask = (sub % powers[k + 1]) != 0
            if mask.any():
                idx = int(np.argmax(mask))
                r, c = divmod(idx, sub.shape[1])
                pivot = (k, r + t, c + t)
                break
        if pivot is None:
            exps.extend([prec] * (min(rows, cols) - t))
            break
        v, r, c = pivot
        if r != t:
            A[[t, r]] = A[[r, t]]
            U[[t, r]] = U[[r, t]]
            U_inv[:, [t, r]] = U_inv[:, [r, t]]
        if c != t:
            A[:, [t, c]] = A[:, [c, t]]
            V[:, [t, c]] = V[:, [c, t]]
            V_inv[[t, c]] = V_inv[[c, t]]
        unit = int(A[t, t]) // powers[v]
        inv = pow(unit, -1, mod)
        A[t] = A[t] * inv % mod
        U[t] = U[t] * inv % mod
        U_inv[:, t] = U_inv[:, t] * unit % mod

        q = A[:, t] // powers[v]
        q[t] = 0
        if q.any():
            A[:] = (A - np.outer(q, A[t]) % mod) % mod
            U[:] = (U - np.outer(q, U[t]) % mod) % mod
            U_inv[:, t] = (U_inv[:, t] + (U_inv % mod).dot(q) % mod) % mod

        qc = A[t] // powers[v]
        qc[t] = 0
        if qc.any():
            A[t, np.arange(cols) != t] = 0
            V[:] = (V - np.outer(V[:, t], qc) % mod) % mod
            V_inv[t] = (V_inv[t] + qc.dot(V_inv) % mod) % mod
        exps.append(v)

    return SnfResult(ell, prec, tuple(exps), (rows, cols), U, V, U_inv, V_inv)


def kernel_basis(row: Sequence[PadicInt]) -> list[list[int]]:
    """Basis of {x : sum x_i row_i = 0} for a single linear form.

    The pivot is the last entry of minimal valuation; the basis vectors are
    e_i - (row_i / row_pivot) e_pivot for i != pivot, so (6, 3) gives
    [(1, -2)] and (3, 3) gives [(1, -1)].
    """
    if not row:
        return []
    ell = row[0].ell
    prec = min(a.prec for a in row)
    vals = [a.reduce(prec).valuation() for a in row]
    v0 = min(vals)
    if v0 >= prec:
        raise PrecisionExhausted("every entry of the form vanishes at this precision")
    piv = len(vals) - 1 - vals[::-1].index(v0)
    rel = prec - v0
    mod = ell**rel
    unit_piv = row[piv].value // ell**v0
    inv = pow(unit_piv, -1, mod)
    basis = []
    for i, a in enumerate(row):
        if i == piv:
            continue
        ratio = (a.value // ell**v0) * inv % mod
        vec = [0] * len(row)
        vec[i] = 1
        vec[piv] = -ratio
        basis.append(vec)
    return basis
