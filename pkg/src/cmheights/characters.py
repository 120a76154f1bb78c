"""Exact arithmetic of the unit group (Z/nZ)^x and its characters.

Characters are stored as exact exponent vectors over a fixed cyclic-factor
decomposition of the group, so all parity / conductor / orthogonality logic
is integer arithmetic; conversion to floating complex values happens only at
L-evaluation time.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import mpmath as mp

from .arith import PrecisionContext
from .errors import ConsistencyError, DomainError


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as (p, exponent) pairs, ascending primes."""
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            a = 0
            while m % p == 0:
                m //= p
                a += 1
            out.append((p, a))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


def euler_phi(n: int) -> int:
    phi = 1
    for p, a in factorize(n):
        phi *= (p - 1) * p ** (a - 1)
    return phi


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _primitive_root(p: int, a: int) -> int:
    """Smallest primitive root mod p^a for an odd prime p."""
    order = p - 1
    prime_divs = [q for q, _ in factorize(order)]
    g = 2
    while True:
        if all(pow(g, order // q, p) != 1 for q in prime_divs):
            break
        g += 1
    if a > 1 and pow(g, p - 1, p * p) == 1:
        g += p  # g + p is then a primitive root mod every p^a
    return g


def _crt_lift(r: int, m: int, n: int) -> int:
    """x with x = r (mod m) and x = 1 (mod n/m), for coprime m, n/m."""
    other = n // m
    if other == 1:
        return r % n
    inv = pow(m % other, -1, other)
    return (r + m * ((1 - r) * inv % other)) % n


class UnitGroup:
    """(Z/nZ)^x with a fixed cyclic-factor decomposition and dlog table."""

    def __init__(self, n: int):
        self.modulus = n
        gens: list[tuple[int, int]] = []
        factors: list[tuple[int, int, tuple[int, ...]]] = []
        for p, a in factorize(n):
            q = p**a
            start = len(gens)
            if p == 2:
                if a == 2:
                    gens.append((_crt_lift(3, q, n), 2))
                elif a >= 3:
                    gens.append((_crt_lift(q - 1, q, n), 2))
                    gens.append((_crt_lift(5, q, n), 2 ** (a - 2)))
            else:
                g = _primitive_root(p, a)
                gens.append((_crt_lift(g, q, n), (p - 1) * p ** (a - 1)))
            factors.append((p, a, tuple(range(start, len(gens)))))
        self.generators = tuple(gens)
        self.factors = tuple(factors)

        table: dict[int, tuple[int, ...]] = {1 % n: ()}
        for g, order in self.generators:
            new: dict[int, tuple[int, ...]] = {}
            for res, vec in table.items():
                cur = res
                for e in range(order):
                    new[cur] = vec + (e,)
                    cur = cur * g % n
            table = new
        if len(table) != euler_phi(n):
            raise ConsistencyError(f"generator decomposition failed for n={n}")
        self._dlog = table
        self.elements = tuple(sorted(table))
        self.position = {a: i for i, a in enumerate(self.elements)}
        self.iota = (n - 1) % n
        self.order = len(self.elements)

    def dlog(self, a: int) -> tuple[int, ...]:
        try:
            return self._dlog[a % self.modulus]
        except KeyError:
            raise DomainError(f"{a} is not a unit mod {self.modulus}") from None

    def contains_unit(self, a: int) -> bool:
        return a % self.modulus in self._dlog

    def __eq__(self, other):
        return isinstance(other, UnitGroup) and other.modulus == self.modulus

    def __hash__(self):
        return hash(("UnitGroup", self.modulus))

    def __repr__(self):
        return f"UnitGroup({self.modulus})"


@functools.lru_cache(maxsize=None)
def _unit_group_any(n: int) -> UnitGroup:
    if n < 1:
        raise DomainError(f"modulus must be positive, got {n}")
    return UnitGroup(n)


def unit_group(n: int) -> UnitGroup:
    """The unit group (Z/nZ)^x for n >= 3, with deterministic structure."""
    if n < 3:
        raise DomainError(f"unit_group requires n >= 3, got {n}")
    return _unit_group_any(n)


def subgroup_closure(n: int, generators) -> frozenset[int]:
    """Subgroup of (Z/nZ)^x generated by the given residues."""
    group = _unit_group_any(n)
    for g in generators:
        if not group.contains_unit(g):
            raise DomainError(f"{g} is not a unit mod {n}")
    closed = {1 % n}
    frontier = [1 % n]
    gens = [g % n for g in generators]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = x * g % n
            if y not in closed:
                closed.add(y)
                frontier.append(y)
    return frozenset(closed)


def minimal_generators(n: int, subgroup: frozenset[int]) -> tuple[int, ...]:
    """Deterministic small generating set of a subgroup (greedy by residue)."""
    chosen: list[int] = []
    span = subgroup_closure(n, ())
    for a in sorted(subgroup):
        if a in span:
            continue
        chosen.append(a)
        span = subgroup_closure(n, chosen)
        if span == subgroup:
            break
    return tuple(chosen)


@dataclass(frozen=True)
class ResidueCharacter:
    """Character of (Z/nZ)^x given by exponents on the fixed generators.

    chi(g_i) = e(exponents[i] / order(g_i)); all values are exact roots of
    unity represented by their exponent as a Fraction in [0, 1).
    """

    group: UnitGroup
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.group.modulus

    @property
    def order(self) -> int:
        o = 1
        for (_, d), c in zip(self.group.generators, self.exponents):
            o = lcm(o, d // gcd(c, d))
        return o

    @property
    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.exponents)

    def value_exponent(self, a: int) -> Fraction:
        """t in [0,1) with chi(a) = e^(2 pi i t), exact."""
        vec = self.group.dlog(a)
        t = Fraction(0)
        for (_, d), c, e in zip(self.group.generators, self.exponents, vec):
            t += Fraction(c * e, d)
        return t % 1

    def value(self, a: int, ctx: PrecisionContext):
        return root_of_unity(self.value_exponent(a), ctx)

    def conjugate(self) -> "ResidueCharacter":
        exps = tuple(
            (-c) % d for (_, d), c in zip(self.group.generators, self.exponents)
        )
        return ResidueCharacter(self.group, exps)

    def key(self) -> tuple:
        return (self.modulus, self.exponents)

    def label(self) -> str:
        return f"chi[{self.modulus};{','.join(map(str, self.exponents))}]"


def root_of_unity(t: Fraction, ctx: PrecisionContext):
    """e^(2 pi i t) as an mpc, with exact values at quarter turns."""
    t = t % 1
    with ctx.workprec():
        if t == 0:
            return mp.mpc(1)
        if t == Fraction(1, 2):
            return mp.mpc(-1)
        if t == Fraction(1, 4):
            return mp.mpc(0, 1)
        if t == Fraction(3, 4):
            return mp.mpc(0, -1)
        arg = 2 * mp.mpf(t.numerator) / t.denominator
        return mp.expjpi(arg)


def characters(group: UnitGroup) -> list[ResidueCharacter]:
    """All characters, lexicographically ordered by exponent vector.

    The trivial character comes first and the list is closed under
    conjugation.
    """
    ranges = [range(d) for _, d in group.generators]
    return [ResidueCharacter(group, exps) for exps in itertools.product(*ranges)]


@functools.lru_cache(maxsize=None)
def character_values(chi: ResidueCharacter, bits: int):
    """chi(a) for each unit a (aligned with group.elements), cached."""
    ctx = PrecisionContext(bits)
    return tuple(chi.value(a, ctx) for a in chi.group.elements)


def conductor(chi: ResidueCharacter) -> int:
    """Smallest f | n such that chi factors through (Z/fZ)^x."""
    cond = 1
    for p, a, idx in chi.group.factors:
        if p == 2:
            if a == 1:
                continue
            if a == 2:
                if chi.exponents[idx[0]] % 2 == 1:
                    cond *= 4
                continue
            c_minus = chi.exponents[idx[0]]
            c_five = chi.exponents[idx[1]]
            d_five = chi.group.generators[idx[1]][1]
            o_five = d_five // gcd(c_five, d_five)
            if o_five > 1:
                cond *= 4 * o_five
            elif c_minus % 2 == 1:
                cond *= 4
        else:
            c = chi.exponents[idx[0]]
            d = chi.group.generators[idx[0]][1]
            o = d // gcd(c, d)
            if o > 1:
                cond *= p ** (_valuation(o, p) + 1)
    return cond


def primitive_of(chi: ResidueCharacter) -> ResidueCharacter:
    """The primitive character mod conductor(chi) inducing chi."""
    f = conductor(chi)
    n = chi.modulus
    target = _unit_group_any(f)
    exps = []
    for h, d in target.generators:
        a = h
        while gcd(a, n) != 1:
            a += f
        t = chi.value_exponent(a) * d
        if t.denominator != 1:
            raise ConsistencyError(
                f"character does not descend to modulus {f}: {chi.key()}"
            )
        exps.append(int(t) % d)
    return ResidueCharacter(target, tuple(exps))


def is_odd(chi: ResidueCharacter) -> bool:
    """True iff chi(-1) = -1."""
    if chi.modulus <= 2:
        return False
    return chi.value_exponent(chi.group.iota) == Fraction(1, 2)


def characters_trivial_on(group: UnitGroup, subgroup_gens) -> list[ResidueCharacter]:
    """Characters vanishing on the subgroup generated by subgroup_gens."""
    gens = [g % group.modulus for g in subgroup_gens]
    vecs = [group.dlog(g) for g in gens]
    orders = [d for _, d in group.generators]
    out = []
    for exps in itertools.product(*[range(d) for d in orders]):
        ok = True
        for vec in vecs:
            t = Fraction(0)
            for d, c, e in zip(orders, exps, vec):
                t += Fraction(c * e, d)
            if t % 1 != 0:
                ok = False
                break
        if ok:
            out.append(ResidueCharacter(group, exps))
    return out


# ---------------------------------------------------------------------------
# Exact sums of roots of unity (used for exact L-values at s = 0).
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (ascending) of the n-th cyclotomic polynomial."""
    if n == 1:
        return (-1, 1)
    # (x^n - 1) divided by the product of Phi_d for proper divisors d.
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_div_exact(poly, cyclotomic_polynomial(d))
    return tuple(poly)


def _poly_div_exact(num: list[int], den) -> list[int]:
    num = list(num)
    den = list(den)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], den[-1])
        if r != 0:
            raise ConsistencyError("non-exact polynomial division")
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    if any(c != 0 for c in num[: len(den) - 1]):
        raise ConsistencyError("non-exact polynomial division")
    return out


class RootOfUnitySum:
    """An exact finite sum  sum_t coeff(t) * e^(2 pi i t)  with rational data."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Fraction, Fraction] | None = None):
        self.terms: dict[Fraction, Fraction] = {}
        if terms:
            for t, c in terms.items():
                self.add(t, c)

    def add(self, t: Fraction, coeff) -> None:
        c = Fraction(coeff)
        if c == 0:
            return
        t = t % 1
        cur = self.terms.get(t, Fraction(0)) + c
        if cur == 0:
            self.terms.pop(t, None)
        else:
            self.terms[t] = cur

    def scaled(self, factor) -> "RootOfUnitySum":
        out = RootOfUnitySum()
        for t, c in self.terms.items():
            out.add(t, c * Fraction(factor))
        return out

    def conjugate(self) -> "RootOfUnitySum":
        out = RootOfUnitySum()
        for t, c in self.terms.items():
            out.add(-t % 1, c)
        return out

    def to_mpc(self, ctx: PrecisionContext):
        with ctx.workprec():
            total = mp.mpc(0)
            for t, c in sorted(self.terms.items()):
                total += (mp.mpf(c.numerator) / c.denominator) * root_of_unity(t, ctx)
            return total

    def is_zero(self) -> bool:
        """Exact vanishing test via reduction mod a cyclotomic polynomial."""
        if not self.terms:
            return True
        level = 1
        for t in self.terms:
            level = lcm(level, t.denominator)
        denom = 1
        for c in self.terms.values():
            denom = lcm(denom, c.denominator)
        # Integer polynomial in x = e^(2 pi i / level).
        poly = [0] * level
        for t, c in self.terms.items():
            poly[int(t * level)] += int(c * denom)
        phi = cyclotomic_polynomial(level)
        deg = len(phi) - 1
        for i in range(level - 1, deg - 1, -1):
            q = poly[i]  # phi is monic
            if q == 0:
                continue
            for j, coeff in enumerate(phi):
                poly[i - deg + j] -= q * coeff
        return all(c == 0 for c in poly)

    def as_gaussian_rational(self):
        """(re, im) as exact Fractions when every term is a quarter turn."""
        re = Fraction(0)
        im = Fraction(0)
        for t, c in self.terms.items():
            q = t * 4
            if q.denominator != 1:
                return None
            re += c * (1, 0, -1, 0)[int(q) % 4]
            im += c * (0, 1, 0, -1)[int(q) % 4]
        return re, im

    def __repr__(self):
        inner = " + ".join(f"{c}*e({t})" for t, c in sorted(self.terms.items()))
        return f"RootOfUnitySum({inner or '0'})"
