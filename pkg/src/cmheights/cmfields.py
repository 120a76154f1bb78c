"""Abelian CM fields as fixed fields of subgroups of (Z/nZ)^x.

A field is stored by a presentation (modulus n, subgroup H); on construction
the modulus is reduced to the conductor of the field, so equality is a
structural comparison.  CM types, stabilizers, reflex fields, discriminants,
compositums and root-of-unity counts are all derived from this data.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import lcm

import mpmath as mp

from .arith import PrecisionContext
from .characters import (
    ResidueCharacter,
    _unit_group_any,
    characters_trivial_on,
    conductor,
    euler_phi,
    factorize,
    is_odd,
    minimal_generators,
    subgroup_closure,
)
from .errors import ConsistencyError, DomainError, TotallyRealError


@dataclass(frozen=True, eq=False)
class AbelianField:
    """Fixed field of `subgroup` inside the cyclotomic field of `modulus`."""

    modulus: int
    subgroup: tuple[int, ...]
    conductor: int
    canonical_subgroup: tuple[int, ...]

    @property
    def group(self):
        return _unit_group_any(self.modulus)

    @property
    def degree(self) -> int:
        return euler_phi(self.modulus) // len(self.subgroup)

    @property
    def is_cm(self) -> bool:
        if self.modulus <= 2:
            return False
        return (self.modulus - 1) not in self.subgroup

    @property
    def g(self) -> int:
        if not self.is_cm:
            raise DomainError("g is defined for CM fields only")
        return self.degree // 2

    def character_group(self) -> list[ResidueCharacter]:
        return _character_group(self.modulus, self.subgroup)

    def lift(self, new_modulus: int) -> "AbelianField":
        """Same field presented inside a larger cyclotomic ambient group."""
        if new_modulus % self.modulus != 0:
            raise DomainError(
                f"cannot lift modulus {self.modulus} into {new_modulus}"
            )
        group = _unit_group_any(new_modulus)
        sub = frozenset(self.subgroup)
        lifted = tuple(
            sorted(a for a in group.elements if a % self.modulus in sub or self.modulus == 1)
        )
        return AbelianField(new_modulus, lifted, self.conductor, self.canonical_subgroup)

    def descriptor(self) -> dict:
        return {
            "modulus": self.conductor,
            "subgroup_generators": list(
                minimal_generators(self.conductor, frozenset(self.canonical_subgroup))
            ),
        }

    def label(self) -> str:
        gens = ",".join(map(str, self.descriptor()["subgroup_generators"]))
        return f"m{self.conductor}[{gens}]"

    def __eq__(self, other):
        return (
            isinstance(other, AbelianField)
            and self.conductor == other.conductor
            and self.canonical_subgroup == other.canonical_subgroup
        )

    def __hash__(self):
        return hash((self.conductor, self.canonical_subgroup))

    def __repr__(self):
        return f"AbelianField({self.label()}, degree={self.degree})"


@functools.lru_cache(maxsize=None)
def _character_group(modulus: int, subgroup: tuple[int, ...]) -> list[ResidueCharacter]:
    group = _unit_group_any(modulus)
    gens = minimal_generators(modulus, frozenset(subgroup))
    chars = characters_trivial_on(group, gens)
    if len(chars) * len(subgroup) != group.order:
        raise ConsistencyError("Galois correspondence count failed")
    return chars


@functools.lru_cache(maxsize=None)
def _field_from_subgroup(n: int, subgroup: frozenset[int]) -> AbelianField:
    """Canonicalize (n, H): reduce the modulus to the field conductor."""
    chars = _character_group(n, tuple(sorted(subgroup)))
    f0 = 1
    for chi in chars:
        f0 = lcm(f0, conductor(chi))
    canonical = frozenset(a % f0 for a in subgroup) if f0 > 1 else frozenset({0})
    canonical_t = tuple(sorted(canonical))
    field = AbelianField(f0, canonical_t, f0, canonical_t)
    if field.degree != euler_phi(n) // len(subgroup):
        raise ConsistencyError(f"degree changed under canonicalization of ({n}, H)")
    return field


def make_field(n: int, generators, require_cm: bool = True) -> AbelianField:
    """Field fixed by the subgroup generated by `generators` inside Q(mu_n)."""
    if n < 3:
        raise DomainError(f"make_field requires n >= 3, got {n}")
    sub = subgroup_closure(n, tuple(generators))
    if require_cm and (n - 1) in sub:
        raise TotallyRealError(
            f"subgroup contains -1 mod {n}: the fixed field is totally real"
        )
    return _field_from_subgroup(n, sub)


def max_real_subfield(field: AbelianField) -> AbelianField:
    """Maximal totally real subfield: fixed field of <H, -1>."""
    if not field.is_cm:
        raise DomainError("max_real_subfield requires a CM field")
    n = field.modulus
    sub = subgroup_closure(n, tuple(field.subgroup) + (n - 1,))
    return _field_from_subgroup(n, sub)


@dataclass(frozen=True, eq=False)
class CMType:
    """Half system of embeddings: one coset of H per complex-conjugate pair."""

    field: AbelianField
    cosets: tuple[tuple[int, ...], ...]
    index: int

    def lifted(self) -> frozenset[int]:
        return frozenset(a for coset in self.cosets for a in coset)

    def conjugate(self) -> "CMType":
        types = cm_types(self.field)
        return types[self.index ^ (2 ** self.field.g - 1)]

    def intersection_size(self, other: "CMType") -> int:
        if self.field != other.field:
            raise DomainError("CM types belong to different fields")
        return len(set(self.cosets) & set(other.cosets))

    def __eq__(self, other):
        return (
            isinstance(other, CMType)
            and self.field == other.field
            and self.cosets == other.cosets
        )

    def __hash__(self):
        return hash((self.field, self.cosets))

    def __repr__(self):
        return f"CMType({self.field.label()}, index={self.index})"


def _cosets(field: AbelianField) -> list[tuple[int, ...]]:
    n = field.modulus
    group = field.group
    sub = field.subgroup
    seen: set[int] = set()
    cosets = []
    for a in group.elements:
        if a in seen:
            continue
        coset = tuple(sorted(a * h % n for h in sub))
        seen.update(coset)
        cosets.append(coset)
    return cosets


@functools.lru_cache(maxsize=None)
def _cm_type_list(field: AbelianField) -> tuple[CMType, ...]:
    n = field.modulus
    iota = field.group.iota
    cosets = {c[0]: c for c in _cosets(field)}
    paired: set[int] = set()
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    for rep in sorted(cosets):
        if rep in paired:
            continue
        coset = cosets[rep]
        conj = tuple(sorted(iota * a % n for a in coset))
        if conj == coset:
            raise ConsistencyError("conjugation fixes an embedding pair")
        paired.update({coset[0], conj[0]})
        pairs.append((coset, conj))
    g = len(pairs)
    out = []
    for index in range(2**g):
        chosen = tuple(
            pairs[i][1] if (index >> i) & 1 else pairs[i][0] for i in range(g)
        )
        out.append(CMType(field, tuple(sorted(chosen)), index))
    return tuple(out)


def cm_types(field: AbelianField) -> list[CMType]:
    """All 2^g CM types, deterministically ordered by pair bitmask."""
    if not field.is_cm:
        raise DomainError("cm_types requires a CM field")
    return list(_cm_type_list(field))


@functools.lru_cache(maxsize=None)
def stabilizer(field: AbelianField, cm_type: CMType) -> frozenset[int]:
    """{sigma : sigma Phi = Phi} acting on the lifted embedding set."""
    if cm_type.field != field:
        raise DomainError("CM type does not belong to the field")
    n = field.modulus
    lifted = cm_type.lifted()
    out = set()
    for sigma in field.group.elements:
        if frozenset(sigma * a % n for a in lifted) == lifted:
            out.add(sigma)
    return frozenset(out)


def reflex_field(field: AbelianField, cm_type: CMType) -> AbelianField:
    """Fixed field of the stabilizer of the CM type."""
    return _field_from_subgroup(field.modulus, stabilizer(field, cm_type))


# ---------------------------------------------------------------------------
# Discriminants (conductor-discriminant product) and compositums.
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def discriminant_factored(field: AbelianField) -> tuple[tuple[int, int], ...]:
    """|disc| as sorted (prime, exponent) pairs: product of character conductors."""
    exps: dict[int, int] = {}
    for chi in _character_group(field.conductor, field.canonical_subgroup):
        for p, a in factorize(conductor(chi)):
            exps[p] = exps.get(p, 0) + a
    return tuple(sorted(exps.items()))


def discriminant_sign(field: AbelianField) -> int:
    """(-1)^(number of complex places)."""
    if field.modulus <= 2 or (field.modulus - 1) in field.subgroup:
        return 1  # totally real
    return -1 if (field.degree // 2) % 2 else 1


def discriminant_exact(field: AbelianField) -> int:
    """disc as a signed integer."""
    mag = 1
    for p, a in discriminant_factored(field):
        mag *= p**a
    return discriminant_sign(field) * mag


def discriminant_log(field: AbelianField, ctx: PrecisionContext):
    """log |disc|, evaluated from the exact prime factorization."""
    with ctx.workprec():
        return mp.fsum(a * mp.log(p) for p, a in discriminant_factored(field))


def compositum(field1: AbelianField, field2: AbelianField) -> AbelianField:
    """Lift both fields to lcm of their conductors and intersect subgroups."""
    n = lcm(field1.conductor, field2.conductor)
    if n == 1:
        return field1
    lifted1 = frozenset(field1.lift(n).subgroup)
    lifted2 = frozenset(field2.lift(n).subgroup)
    return _field_from_subgroup(n, lifted1 & lifted2)


def cyclotomic_field(k: int) -> AbelianField:
    if k < 1:
        raise DomainError(f"cyclotomic level must be positive, got {k}")
    if k <= 2:
        return _field_from_subgroup(1, frozenset({0}))
    return _field_from_subgroup(k, frozenset({1}))


def cyclotomic_discriminant(k: int) -> int:
    """Classical closed form (-1)^(phi/2) * k^phi / prod_p p^(phi/(p-1)) for k >= 3."""
    if k < 3:
        raise DomainError(f"closed form requires k >= 3, got {k}")
    phi = euler_phi(k)
    num = k**phi
    for p, _ in factorize(k):
        q, r = divmod(phi, p - 1)
        if r != 0:
            raise ConsistencyError("phi(k) not divisible by p - 1 for p | k")
        num //= p**q
    return (-1) ** (phi // 2) * num


def field_contains(field: AbelianField, other: AbelianField) -> bool:
    """True iff `other` is a subfield of `field`."""
    n = lcm(field.conductor, other.conductor)
    sub_field = frozenset(field.lift(n).subgroup) if n > 1 else frozenset({0})
    sub_other = frozenset(other.lift(n).subgroup) if n > 1 else frozenset({0})
    return sub_field <= sub_other


def roots_of_unity_order(field: AbelianField) -> int:
    """Order of the group of roots of unity: largest even k with Q(mu_k) inside."""
    n = field.conductor
    best = 2
    for k in range(4, 2 * n + 1, 2):
        if (2 * n) % k == 0 and field_contains(field, cyclotomic_field(k)):
            best = max(best, k)
    return best


def contains_imag_quadratic(field: AbelianField) -> bool:
    """True iff some real (order-2) odd character lies in the character group."""
    return any(
        chi.order == 2 and is_odd(chi)
        for chi in _character_group(field.conductor, field.canonical_subgroup)
    )
