"""Unit group and character tests: exact identities, brute-force oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cmheights.characters import (
    ResidueCharacter,
    characters,
    conductor,
    euler_phi,
    is_odd,
    primitive_of,
    unit_group,
)
from cmheights.errors import DomainError

from oracles import character_sum_fibers_uniform, conductor_bruteforce


def chi_minus4():
    return next(c for c in characters(unit_group(4)) if not c.is_trivial)


class TestUnitGroup:
    def test_mod4(self):
        g = unit_group(4)
        assert g.elements == (1, 3)
        assert g.iota == 3
        assert [order for _, order in g.generators] == [2]

    def test_mod5(self):
        g = unit_group(5)
        assert g.elements == (1, 2, 3, 4)
        assert g.iota == 4
        assert g.generators == ((2, 4),)

    def test_mod8_klein(self):
        g = unit_group(8)
        assert g.elements == (1, 3, 5, 7)
        assert g.iota == 7
        assert sorted(order for _, order in g.generators) == [2, 2]

    def test_small_modulus_rejected(self):
        for n in (0, 1, 2):
            with pytest.raises(DomainError):
                unit_group(n)

    @pytest.mark.parametrize("n", [7, 12, 40, 45])
    def test_order_and_generators(self, n):
        g = unit_group(n)
        assert len(g.elements) == euler_phi(n)
        prod = 1
        for _, order in g.generators:
            prod *= order
        assert prod == euler_phi(n)
        assert g.iota == n - 1
        assert (g.iota * g.iota) % n == 1


class TestCharacters:
    def test_mod4(self):
        chars = characters(unit_group(4))
        assert len(chars) == 2
        assert chars[0].is_trivial
        assert chars[1].value_exponent(3) == Fraction(1, 2)

    def test_mod5_powers_of_i(self):
        chars = characters(unit_group(5))
        assert len(chars) == 4
        exps = sorted(c.value_exponent(2) for c in chars)
        assert exps == [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]

    @pytest.mark.parametrize("n", [7, 12, 40])
    def test_duality_count(self, n):
        assert len(characters(unit_group(n))) == euler_phi(n)

    @pytest.mark.parametrize("n", [5, 8, 12, 15, 16, 21])
    def test_conjugation_closure(self, n):
        chars = characters(unit_group(n))
        keys = {c.key() for c in chars}
        for c in chars:
            conj = c.conjugate()
            assert conj.key() in keys
            assert conductor(conj) == conductor(c)
            assert is_odd(conj) == is_odd(c)

    @pytest.mark.parametrize("n", [5, 8, 9, 12, 15, 16, 21, 24, 36, 40])
    def test_orthogonality_exact(self, n):
        # sum_G chi conj(chi') is |G| for equal pairs and vanishes otherwise:
        # the product character's value fibers are uniform over the full set
        # of order-th roots of unity, an exact integer-counting argument.
        group = unit_group(n)
        chars = characters(group)
        for c1 in chars:
            for c2 in chars:
                prod = ResidueCharacter(
                    group,
                    tuple(
                        (a - b) % d
                        for (a, b, (_, d)) in zip(
                            c1.exponents, c2.exponents, group.generators
                        )
                    ),
                )
                if c1.key() == c2.key():
                    assert prod.is_trivial
                else:
                    assert character_sum_fibers_uniform(prod)

    @pytest.mark.parametrize("n", [4, 5, 8, 12, 15, 16, 21, 40])
    def test_half_odd(self, n):
        chars = characters(unit_group(n))
        assert sum(1 for c in chars if is_odd(c)) == len(chars) // 2

    @given(
        n=st.integers(min_value=3, max_value=60),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=80, deadline=None)
    def test_homomorphism(self, n, seed):
        import random

        rng = random.Random(seed)
        group = unit_group(n)
        chi = rng.choice(characters(group))
        a = rng.choice(group.elements)
        b = rng.choice(group.elements)
        lhs = chi.value_exponent(a * b % n)
        assert lhs == (chi.value_exponent(a) + chi.value_exponent(b)) % 1


class TestConductor:
    def test_trivial_mod12(self):
        assert conductor(characters(unit_group(12))[0]) == 1

    def test_chi_minus4(self):
        assert conductor(chi_minus4()) == 4

    def test_quadratic_mod5_and_lift(self):
        quad5 = next(c for c in characters(unit_group(5)) if c.order == 2)
        assert conductor(quad5) == 5
        lift = next(
            c
            for c in characters(unit_group(15))
            if c.order == 2 and conductor(c) == 5
        )
        assert conductor_bruteforce(lift) == 5

    @pytest.mark.parametrize("n", [5, 8, 9, 12, 15, 16, 21, 24, 36, 40])
    def test_against_bruteforce(self, n):
        for c in characters(unit_group(n)):
            assert conductor(c) == conductor_bruteforce(c)


class TestPrimitive:
    def test_trivial_descends_to_one(self):
        prim = primitive_of(characters(unit_group(12))[0])
        assert prim.modulus == 1
        assert prim.is_trivial

    def test_quadratic_mod15(self):
        lift = next(
            c
            for c in characters(unit_group(15))
            if c.order == 2 and conductor(c) == 5
        )
        prim = primitive_of(lift)
        assert prim.modulus == 5
        for a in (1, 2, 3, 4):
            assert prim.value_exponent(a) == lift.value_exponent([x for x in range(1, 15) if x % 5 == a and x % 3 != 0][0])

    @pytest.mark.parametrize("n", [5, 12, 16, 21, 40])
    def test_idempotent(self, n):
        for c in characters(unit_group(n)):
            prim = primitive_of(c)
            assert primitive_of(prim).key() == prim.key()
            assert conductor(prim) == conductor(c)


class TestParity:
    def test_trivial_even(self):
        assert not is_odd(characters(unit_group(4))[0])

    def test_chi_minus4_odd(self):
        assert is_odd(chi_minus4())

    def test_mod5(self):
        for c in characters(unit_group(5)):
            j = c.value_exponent(2) * 4
            assert is_odd(c) == (int(j) % 2 == 1)

    @pytest.mark.parametrize("n", [5, 8, 12, 15, 16, 40])
    def test_iota_value_squares_to_one(self, n):
        group = unit_group(n)
        for c in characters(group):
            assert (2 * c.value_exponent(group.iota)) % 1 == 0
