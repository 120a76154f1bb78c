"""Height pipeline for abelian CM fields.

From a CM field and CM type: the intersection-count class function on the
reflex Galois group, its character multiplicities, the conductor-log and
L-log-derivative aggregates, and the stable Faltings height.  The averaged
right-hand side and the classical quadratic closed form provide two
independent cross-check paths.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .arith import PrecisionContext, log_gamma
from .characters import (
    ResidueCharacter,
    character_values,
    characters_trivial_on,
    conductor,
    is_odd,
    minimal_generators,
    primitive_of,
)
from .cmfields import AbelianField, CMType, cm_types, stabilizer
from .errors import ConsistencyError, DomainError
from .lfun import l_log_deriv_at_zero
from .report import decimal_str


@functools.lru_cache(maxsize=None)
def a0_profile(field: AbelianField, cm_type: CMType) -> dict[int, Fraction]:
    """Average intersection counts |nu Phi ^ sigma nu Phi| over the group.

    Returns an exact rational value per coset representative of the
    stabilizer (the reflex Galois group); averaging over the full group
    instead of coset representatives is equivalent because the summand is
    constant on stabilizer cosets.
    """
    n = field.modulus
    group = field.group
    lifted = sorted(cm_type.lifted())
    masks = {
        nu: sum(1 << (nu * r % n) for r in lifted) for nu in group.elements
    }
    stab = stabilizer(field, cm_type)
    reps = sorted({min(s * a % n for s in stab) for a in group.elements})
    denom = group.order * len(field.subgroup)
    out: dict[int, Fraction] = {}
    for sigma in reps:
        total = sum(
            (masks[nu] & masks[sigma * nu % n]).bit_count() for nu in group.elements
        )
        out[sigma] = Fraction(total, denom)
    if out[min(stab)] != field.g:
        raise ConsistencyError("profile value at the identity is not g")
    return out


@functools.lru_cache(maxsize=None)
def reflex_characters(field: AbelianField, cm_type: CMType) -> tuple[ResidueCharacter, ...]:
    """Characters of the ambient group trivial on the stabilizer of the type."""
    stab = stabilizer(field, cm_type)
    gens = minimal_generators(field.modulus, stab)
    return tuple(characters_trivial_on(field.group, gens))


@functools.lru_cache(maxsize=None)
def multiplicities(field: AbelianField, cm_type: CMType, ctx: PrecisionContext):
    """Character multiplicities of the profile, with consistency assertions.

    The trivial multiplicity is checked to equal g/2 in exact rational
    arithmetic; all multiplicities are checked real, non-negative, zero on
    even nontrivial characters, and conjugation-symmetric within ctx.eps.
    """
    profile = a0_profile(field, cm_type)
    reps = sorted(profile)
    g = field.g
    r = len(reps)

    trivial_exact = sum(profile[s] for s in reps) / r
    if trivial_exact != Fraction(g, 2):
        raise ConsistencyError(f"trivial multiplicity {trivial_exact} != g/2")

    with ctx.workprec():
        eps = ctx.eps
        position = field.group.position
        a0_vals = {s: mp.mpf(v.numerator) / v.denominator for s, v in profile.items()}
        out: dict[ResidueCharacter, object] = {}
        computed: dict[tuple, object] = {}
        for chi in reflex_characters(field, cm_type):
            values = character_values(chi, ctx.bits)
            total = mp.fsum(
                a0_vals[sigma] * mp.conj(values[position[sigma]]) for sigma in reps
            )
            m = total / r
            if abs(m.imag) > eps:
                raise ConsistencyError(f"multiplicity has imaginary part {m.imag}")
            if m.real < -eps:
                raise ConsistencyError(f"negative multiplicity {m.real}")
            if not chi.is_trivial and not is_odd(chi) and abs(m) > eps:
                raise ConsistencyError("nonzero multiplicity on an even character")
            computed[chi.key()] = m.real
            out[chi] = m.real
        for chi in out:
            if abs(computed[chi.key()] - computed[chi.conjugate().key()]) > eps:
                raise ConsistencyError("multiplicities not conjugation-symmetric")
        return out


def mu(field: AbelianField, cm_type: CMType, ctx: PrecisionContext):
    """Conductor-log aggregate: sum over odd nontrivial chi of m(chi) log f(chi)."""
    mult = multiplicities(field, cm_type, ctx)
    with ctx.workprec():
        return mp.fsum(
            m * mp.log(conductor(chi))
            for chi, m in mult.items()
            if not chi.is_trivial and is_odd(chi)
        )


def z_value(field: AbelianField, cm_type: CMType, ctx: PrecisionContext):
    """L-log-derivative aggregate over odd nontrivial characters."""
    mult = multiplicities(field, cm_type, ctx)
    with ctx.workprec():
        total = mp.mpc(0)
        for chi, m in mult.items():
            if chi.is_trivial or not is_odd(chi):
                continue
            total += m * l_log_deriv_at_zero(primitive_of(chi), ctx)
        if abs(total.imag) > ctx.eps * (1 + abs(total)):
            raise ConsistencyError(f"z has imaginary residue {total.imag}")
        return total.real


def faltings_height(field: AbelianField, cm_type: CMType, ctx: PrecisionContext):
    """Stable Faltings height of any CM abelian variety of this type."""
    if not field.is_cm:
        raise DomainError("height requires a CM field")
    with ctx.workprec():
        return -z_value(field, cm_type, ctx) - mu(field, cm_type, ctx) / 2


def averaged_rhs(field: AbelianField, ctx: PrecisionContext):
    """-(1/2) L'/L(0, chi_{E/F}) - (1/4) log(|disc E|/|disc F|).

    Both ingredients come from the factorization over the odd characters of
    the field: the L-ratio is the sum of the primitive log-derivatives, the
    discriminant ratio is the sum of the odd conductor logs.
    """
    if not field.is_cm:
        raise DomainError("averaged_rhs requires a CM field")
    odd_chars = [chi for chi in field.character_group() if is_odd(chi)]
    with ctx.workprec():
        lsum = mp.mpc(0)
        dlog = mp.mpf(0)
        for chi in odd_chars:
            lsum += l_log_deriv_at_zero(primitive_of(chi), ctx)
            dlog += mp.log(conductor(chi))
        if abs(lsum.imag) > ctx.eps * (1 + abs(lsum)):
            raise ConsistencyError("averaged rhs has imaginary residue")
        return -lsum.real / 2 - dlog / 4


def averaged_lhs(field: AbelianField, ctx: PrecisionContext):
    """2^(-g) sum of the heights over all CM types (independent path)."""
    types = cm_types(field)
    with ctx.workprec():
        total = mp.fsum(faltings_height(field, t, ctx) for t in types)
        return total / len(types)


@dataclass
class ColmezProfile:
    """All per-(field, CM type) pipeline values, for reports."""

    field: AbelianField
    cm_type: CMType
    a0: dict[int, Fraction]
    multiplicities: dict[ResidueCharacter, object]
    mu: object
    z: object
    height: object

    def to_json_dict(self, ctx: PrecisionContext) -> dict:
        return {
            "field": self.field.descriptor(),
            "cm_type": self.cm_type.index,
            "a0": {str(k): str(v) for k, v in sorted(self.a0.items())},
            "multiplicities": {
                chi.label(): decimal_str(m, ctx) for chi, m in self.multiplicities.items()
            },
            "mu": decimal_str(self.mu, ctx),
            "z": decimal_str(self.z, ctx),
            "height": decimal_str(self.height, ctx),
        }


def colmez_profile(field: AbelianField, cm_type: CMType, ctx: PrecisionContext) -> ColmezProfile:
    return ColmezProfile(
        field=field,
        cm_type=cm_type,
        a0=a0_profile(field, cm_type),
        multiplicities=multiplicities(field, cm_type, ctx),
        mu=mu(field, cm_type, ctx),
        z=z_value(field, cm_type, ctx),
        height=faltings_height(field, cm_type, ctx),
    )


# ---------------------------------------------------------------------------
# Classical quadratic closed form: an independent oracle for g = 1.
# ---------------------------------------------------------------------------


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n), standard extension of the Jacobi symbol."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -sign
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            sign = -sign
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def _squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def is_fundamental_discriminant(disc: int) -> bool:
    if disc == 1:
        return True
    if disc % 4 == 1:
        return _squarefree(abs(disc))
    if disc % 4 == 0:
        q = disc // 4
        return q % 4 in (2, 3) and _squarefree(abs(q))
    return False


def chowla_selberg_oracle(d: int, ctx: PrecisionContext):
    """Height of a CM elliptic curve with CM by the order of discriminant -d.

    Direct evaluation of h = -(1/2) L'(0, chi_d)/L(0, chi_d) - (1/4) log d
    with chi_d given by Kronecker symbols and L'(0, chi_d) by the log-Gamma
    finite sum; shares no code with the character/profile pipeline.
    """
    if d < 3 or not is_fundamental_discriminant(-d):
        raise DomainError(f"-{d} is not a fundamental discriminant with d >= 3")
    values = {a: kronecker_symbol(-d, a) for a in range(1, d)}
    l0 = Fraction(-sum(a * v for a, v in values.items()), d)
    if l0 == 0:
        raise ConsistencyError("quadratic L(0) vanished")
    with ctx.workprec():
        gamma_sum = mp.fsum(
            v * log_gamma(Fraction(a, d), ctx) for a, v in values.items() if v != 0
        )
        l0_val = mp.mpf(l0.numerator) / l0.denominator
        log_ratio = gamma_sum / l0_val - mp.log(d)
        return -log_ratio / 2 - mp.log(d) / 4
