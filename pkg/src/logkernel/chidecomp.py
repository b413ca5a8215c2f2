"""Idempotents of (Z/ell^m)[Delta] for an abelian group Delta of order prime to ell.

Delta is a product of cyclic factors.  A character is recorded by its
exponents: on the j-th generator it takes the value zeta_{n_j}^{a_j}, where
zeta_n is the Teichmueller root of unity of order n.  This needs every n_j to
divide ell - 1, which holds for the groups used here (C2 and V4 at ell = 3,
or the cyclic group Gal(Q(zeta_ell)/Q)).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Sequence

from sympy import primitive_root

from .errors import InvalidInput
from .padic import check_odd_prime, teichmuller
from .quadfield import squarefree_part


@dataclass(frozen=True)
class GroupSpec:
    orders: tuple[int, ...]
    names: tuple[str, ...]
    omega: tuple[int, ...]   # exponents of the cyclotomic character

    @property
    def order(self) -> int:
        return prod(self.orders)

    def elements(self) -> list[tuple[int, ...]]:
        return list(product(*(range(n) for n in self.orders)))

    def index(self, g: Sequence[int]) -> int:
        out = 0
        for e, n in zip(g, self.orders):
            out = out * n + e % n
        return out

    def characters(self) -> list["CharacterId"]:
        return [CharacterId(self, tuple(a)) for a in self.elements()]


# tau = complex conjugation, sigma fixes Q(zeta_3): omega is odd on tau only
V4 = GroupSpec((2, 2), ("tau", "sigma"), (1, 0))
C2 = GroupSpec((2,), ("tau",), (1,))


def cyclotomic_group(ell: int) -> GroupSpec:
    """Gal(Q(zeta_ell)/Q) generated by a -> a^g, g the least primitive root."""
    check_odd_prime(ell)
    return GroupSpec((ell - 1,), (f"s_{primitive_root(ell)}",), (1,))


@dataclass(frozen=True)
class CharacterId:
    group: GroupSpec
    exponents: tuple[int, ...]

    def __post_init__(self):
        ex = tuple(a % n for a, n in zip(self.exponents, self.group.orders))
        object.__setattr__(self, "exponents", ex)

    @property
    def is_unit(self) -> bool:
        return not any(self.exponents)

    @property
    def is_cyclotomic(self) -> bool:
        return self.exponents == self.group.omega

    @property
    def signs(self) -> tuple[int, ...]:
        """Values on the generators when they are all of order 2."""
        if any(n != 2 for n in self.group.orders):
            raise InvalidInput("sign vector only for elementary 2-groups")
        return tuple(-1 if a else 1 for a in self.exponents)

    def __mul__(self, other: "CharacterId") -> "CharacterId":
        return CharacterId(self.group, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def inverse(self) -> "CharacterId":
        return CharacterId(self.group, tuple(-a for a in self.exponents))

    def __pow__(self, k: int) -> "CharacterId":
        return CharacterId(self.group, tuple(k * a for a in self.exponents))

    def name(self) -> str:
        if self.group == V4:
            return {(0, 0): "1", (1, 0): "omega", (0, 1): "phi", (1, 1): "phi*"}[self.exponents]
        if self.is_unit:
            return "1"
        if self.is_cyclotomic:
            return "omega"
        return "chi" + "".join(str(a) for a in self.exponents)

    def is_odd(self) -> bool:
        """Odd on complex conjugation (only meaningful for V4 and C2)."""
        return bool(self.exponents[0]) if self.group in (V4, C2) else False


def omega(group: GroupSpec) -> CharacterId:
    return CharacterId(group, group.omega)


def unit_character(group: GroupSpec) -> CharacterId:
    return CharacterId(group, (0,) * len(group.orders))


def mirror(phi: CharacterId) -> CharacterId:
    """phi* = omega phi^-1."""
    return omega(phi.group) * phi.inverse()


def _roots(group: GroupSpec, ell: int, m: int) -> list[int]:
    g = primitive_root(ell)
    out = []
    for n in group.orders:
        if (ell - 1) % n:
            raise InvalidInput(f"order {n} does not divide ell - 1: character values leave Z_ell")
        out.append(teichmuller(pow(g, (ell - 1) // n, ell), ell, m).value)
    return out


def character_value(phi: CharacterId, g: Sequence[int], ell: int, m: int) -> int:
    mod = ell**m
    roots = _roots(phi.group, ell, m)
    v = 1
    for z, a, e in zip(roots, phi.exponents, g):
        v = v * pow(z, a * e, mod) % mod
    return v


@dataclass(frozen=True)
class IdempotentTable:
    group: GroupSpec
    ell: int
    prec: int
    table: dict

    def __getitem__(self, phi: CharacterId) -> tuple[int, ...]:
        return self.table[phi.exponents]

    def multiply(self, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
        G = self.group
        mod = self.ell**self.prec
        out = [0] * G.order
        elems = G.elements()
        for g in elems:
            a = x[G.index(g)]
            if not a:
                continue
            for h in elems:
                b = y[G.index(h)]
                if b:
                    k = G.index(tuple(s + t for s, t in zip(g, h)))
                    out[k] = (out[k] + a * b) % mod
        return tuple(out)

    def one(self) -> tuple[int, ...]:
        return tuple(1 if i == 0 else 0 for i in range(self.group.order))

    def verify(self) -> bool:
        """Idempotence, orthogonality and partition of unity mod ell^prec."""
        mod = self.ell**self.prec
        zero = (0,) * self.group.order
        keys = list(self.table)
        total = [0] * self.group.order
        for a in keys:
            ea = self.table[a]
            total = [(s + t) % mod for s, t in zip(total, ea)]
            if self.multiply(ea, ea) != ea:
                return False
            for b in keys:
                if a != b and self.multiply(ea, self.table[b]) != zero:
                    return False
        return tuple(total) == self.one()


def idempotents(group: GroupSpec, ell: int, m: int) -> IdempotentTable:
    """e_phi = (1/d) sum_g phi(g^-1) g for every character phi."""
    check_odd_prime(ell)
    d = group.order
    if d % ell == 0:
        raise InvalidInput(f"ell = {ell} divides the group order {d}")
    mod = ell**m
    inv_d = pow(d, -1, mod)
    table = {}
    for phi in group.characters():
        coeffs = [0] * d
        for g in group.elements():
            ginv = tuple(-e for e in g)
            coeffs[group.index(g)] = character_value(phi, ginv, ell, m) * inv_d % mod
        table[phi.exponents] = tuple(coeffs)
    return IdempotentTable(group, ell, m, table)


def _rank_mod(rows: list[list[int]], p: int) -> int:
    A = [[x % p for x in r] for r in rows]
    rank, ncols = 0, len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank


def isotypic_ranks(generator_actions: Sequence[Sequence[Sequence[int]]], group: GroupSpec,
                   ell: int) -> dict[str, int]:
    """F_ell-dimensions of the components e_phi M for M/ell M given by the
    action matrices of the generators of Delta."""
    n = len(generator_actions[0])
    tab = idempotents(group, ell, 1)
    out = {}
    for phi in group.characters():
        coeffs = tab[phi]
        E = [[0] * n for _ in range(n)]
        for g in group.elements():
            c = coeffs[group.index(g)]
            if not c:
                continue
            G = [[int(i == j) for j in range(n)] for i in range(n)]
            for A, e in zip(generator_actions, g):
                for _ in range(e):
                    G = [[sum(G[i][k] * A[k][j] for k in range(n)) % ell for j in range(n)] for i in range(n)]
            E = [[(E[i][j] + c * G[i][j]) % ell for j in range(n)] for i in range(n)]
        out[phi.name()] = _rank_mod(E, ell)
    return out


@dataclass(frozen=True)
class Dispatch:
    i: int
    character: CharacterId
    source_d: int
    special: bool = False


def field_character(d: int) -> CharacterId:
    """Character of V4 cutting out Q(sqrt d) inside Q(sqrt d, sqrt -3)."""
    if d == -3:
        return omega(V4)
    return CharacterId(V4, (0, 1)) if d > 0 else CharacterId(V4, (1, 1))


def component_dispatch(i: int, d: int) -> Dispatch:
    """Which logarithmic class group carries the exponent-3 quotient of WK_2i(k).

    For i even the component is that of k itself, for i odd that of its
    mirror k* = Q(sqrt(-3d)).  Q(sqrt -3) is its own special case: the
    source is k and its logarithmic class group is trivial.
    """
    if d == 1 or d == 0:
        raise InvalidInput("component dispatch needs a quadratic field")
    chi = field_character(d)
    if d == -3:
        return Dispatch(i, chi, d, special=True)
    if i % 2 == 0:
        return Dispatch(i, chi, d)
    return Dispatch(i, mirror(chi), squarefree_part(-3 * d))
