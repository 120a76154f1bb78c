"""Height pipeline tests: profiles, multiplicities, heights, cross-checks."""

from fractions import Fraction

import mpmath as mp
import pytest

from cmheights.arith import PrecisionContext, hurwitz_zeta
from cmheights.characters import character_values, is_odd
from cmheights.cmfields import cm_types, discriminant_exact, make_field, max_real_subfield
from cmheights.colmez import (
    a0_profile,
    averaged_lhs,
    averaged_rhs,
    chowla_selberg_oracle,
    colmez_profile,
    faltings_height,
    is_fundamental_discriminant,
    kronecker_symbol,
    mu,
    multiplicities,
    reflex_characters,
    z_value,
)
from cmheights.errors import DomainError

from oracles import a0_by_definition, central_difference

CTX = PrecisionContext(128)

# log(2 pi) - 2 log Gamma(1/4), frozen at 300 bits
HEIGHT_QI = "-0.738167982986809431180561407628199312128"
Z_QI = "0.3915943927068367764719453468991110280902"

QUADRATIC_FIELDS = {
    3: (3, ()),
    4: (4, ()),
    7: (7, (2,)),
    8: (8, (3,)),
    11: (11, (3,)),
    15: (15, (2,)),
    19: (19, (4,)),
    20: (20, (3,)),
    24: (24, (5, 7)),
}


def quadratic_field(d):
    n, gens = QUADRATIC_FIELDS[d]
    field = make_field(n, gens)
    assert field.degree == 2 and abs(discriminant_exact(field)) == d
    return field


class TestProfile:
    def test_gaussian(self):
        field = make_field(4, ())
        profile = a0_profile(field, cm_types(field)[0])
        assert profile == {1: Fraction(1), 3: Fraction(0)}

    def test_mu5_hand_values(self):
        field = make_field(5, ())
        profile = a0_profile(field, cm_types(field)[0])
        assert [profile[s] for s in (1, 2, 4, 3)] == [
            Fraction(2),
            Fraction(1),
            Fraction(0),
            Fraction(1),
        ]

    @pytest.mark.parametrize(
        "spec", [(4, ()), (5, ()), (7, (2,)), (15, (4,)), (16, ()), (20, (3,))]
    )
    def test_definition_oracle(self, spec):
        field = make_field(*spec)
        for cm_type in cm_types(field):
            assert dict(a0_profile(field, cm_type)) == a0_by_definition(field, cm_type)

    @pytest.mark.parametrize("spec", [(5, ()), (12, ()), (16, ()), (21, (2,))])
    def test_g_only_at_identity(self, spec):
        field = make_field(*spec)
        for cm_type in cm_types(field):
            profile = a0_profile(field, cm_type)
            for sigma, value in profile.items():
                assert (value == field.g) == (sigma == 1)

    def test_conjugate_pair_sum(self):
        field = make_field(12, ())
        n = field.modulus
        for cm_type in cm_types(field):
            profile = a0_profile(field, cm_type)
            for sigma in profile:
                partner = min(
                    (field.group.iota * sigma * s) % n for s in (1,)
                )
                if partner in profile:
                    assert profile[sigma] + profile[partner] == field.g


class TestMultiplicities:
    def test_gaussian(self):
        field = make_field(4, ())
        mult = multiplicities(field, cm_types(field)[0], CTX)
        values = {chi.key(): m for chi, m in mult.items()}
        with CTX.workprec():
            assert abs(values[(4, (0,))] - mp.mpf(0.5)) < CTX.eps
            assert abs(values[(4, (1,))] - mp.mpf(0.5)) < CTX.eps

    def test_mu5(self):
        field = make_field(5, ())
        cm_type = next(t for t in cm_types(field) if t.lifted() == {1, 2})
        mult = multiplicities(field, cm_type, CTX)
        expected = {(0,): 1, (1,): 0.5, (2,): 0, (3,): 0.5}
        with CTX.workprec():
            for chi, m in mult.items():
                assert abs(m - mp.mpf(expected[chi.exponents])) < CTX.eps

    @pytest.mark.parametrize("spec", [(5, ()), (8, ()), (16, ()), (20, (3,))])
    def test_odd_mass_is_half_g(self, spec):
        field = make_field(*spec)
        for cm_type in cm_types(field):
            mult = multiplicities(field, cm_type, CTX)
            odd_mass = sum(
                m for chi, m in mult.items() if not chi.is_trivial and is_odd(chi)
            )
            with CTX.workprec():
                assert abs(odd_mass - mp.mpf(field.g) / 2) < len(mult) * CTX.eps

    @pytest.mark.parametrize("spec", [(5, ()), (12, ()), (16, ())])
    def test_fourier_reconstruction(self, spec):
        field = make_field(*spec)
        position = field.group.position
        for cm_type in cm_types(field):
            profile = a0_profile(field, cm_type)
            mult = multiplicities(field, cm_type, CTX)
            with CTX.workprec():
                for sigma, expected in profile.items():
                    total = mp.fsum(
                        m * character_values(chi, CTX.bits)[position[sigma]]
                        for chi, m in mult.items()
                    )
                    target = mp.mpf(expected.numerator) / expected.denominator
                    assert abs(total - target) < len(mult) * CTX.eps


class TestAggregates:
    def test_mu_gaussian(self):
        field = make_field(4, ())
        with CTX.workprec():
            assert abs(mu(field, cm_types(field)[0], CTX) - mp.log(2)) < CTX.eps

    def test_mu_mu5(self):
        field = make_field(5, ())
        for cm_type in cm_types(field):
            with CTX.workprec():
                assert abs(mu(field, cm_type, CTX) - mp.log(5)) < CTX.eps

    @pytest.mark.parametrize("spec", [(3, ()), (4, ()), (5, ()), (12, ()), (16, ())])
    def test_mu_positive(self, spec):
        field = make_field(*spec)
        for cm_type in cm_types(field):
            assert mu(field, cm_type, CTX) > 0

    def test_z_gaussian_frozen(self):
        field = make_field(4, ())
        z = z_value(field, cm_types(field)[0], CTX)
        with CTX.workprec():
            assert abs(z - mp.mpf(Z_QI)) < CTX.eps

    def test_z_precision_refinement(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        z128 = z_value(field, cm_type, PrecisionContext(128))
        z256 = z_value(field, cm_type, PrecisionContext(256))
        with mp.workprec(300):
            assert abs(z128 - z256) < mp.mpf(2) ** (16 - 128)

    def test_riemann_log_deriv_at_zero_is_log_2pi(self):
        # the zeta normalization identity behind dropping the trivial term
        h = mp.mpf(2) ** (-CTX.bits // 3)
        deriv = central_difference(
            lambda s: hurwitz_zeta(s, 1, CTX), mp.mpf(0), h, CTX
        )
        with CTX.workprec():
            ratio = deriv / hurwitz_zeta(0, 1, CTX)
            assert abs(ratio - mp.log(2 * mp.pi)) < mp.sqrt(CTX.eps)


class TestHeights:
    def test_gaussian_pinned(self):
        field = make_field(4, ())
        h = faltings_height(field, cm_types(field)[0], CTX)
        with CTX.workprec():
            assert abs(h - mp.mpf(HEIGHT_QI)) < CTX.eps
            closed = mp.log(2 * mp.pi) - 2 * mp.loggamma(mp.mpf(1) / 4)
            assert abs(h - closed) < CTX.eps

    def test_mu5_all_types_equal(self):
        field = make_field(5, ())
        heights = [faltings_height(field, t, CTX) for t in cm_types(field)]
        with CTX.workprec():
            for h in heights[1:]:
                assert abs(h - heights[0]) < CTX.eps

    def test_conjugation_symmetry(self):
        for spec in [(5, ()), (12, ()), (15, (4,))]:
            field = make_field(*spec)
            for cm_type in cm_types(field):
                with CTX.workprec():
                    assert (
                        abs(
                            faltings_height(field, cm_type, CTX)
                            - faltings_height(field, cm_type.conjugate(), CTX)
                        )
                        < CTX.eps
                    )

    def test_ambient_modulus_independence(self):
        field = make_field(5, ())
        lifted = field.lift(15)
        assert lifted == field
        h_small = faltings_height(field, cm_types(field)[0], CTX)
        h_big = faltings_height(lifted, cm_types(lifted)[0], CTX)
        with CTX.workprec():
            assert abs(h_small - h_big) < CTX.eps


class TestAveraged:
    def test_gaussian_rhs_equals_height(self):
        field = make_field(4, ())
        with CTX.workprec():
            rhs = averaged_rhs(field, CTX)
            h = faltings_height(field, cm_types(field)[0], CTX)
            assert abs(rhs - h) < CTX.eps

    @pytest.mark.parametrize(
        "spec", [(5, ()), (8, ()), (12, ()), (15, (4,)), (16, ()), (20, (3,)), (21, (2,))]
    )
    def test_identity(self, spec):
        field = make_field(*spec)
        with CTX.workprec():
            assert abs(averaged_lhs(field, CTX) - averaged_rhs(field, CTX)) < 64 * CTX.eps

    def test_mu5_disc_ratio(self):
        field = make_field(5, ())
        real = max_real_subfield(field)
        assert abs(discriminant_exact(field)) // abs(discriminant_exact(real)) == 25


class TestQuadraticOracle:
    def test_pinned_gaussian(self):
        with CTX.workprec():
            assert abs(chowla_selberg_oracle(4, CTX) - mp.mpf(HEIGHT_QI)) < CTX.eps

    @pytest.mark.parametrize("d", sorted(QUADRATIC_FIELDS))
    def test_pipeline_agreement(self, d):
        field = quadratic_field(d)
        oracle = chowla_selberg_oracle(d, CTX)
        for cm_type in cm_types(field):
            with CTX.workprec():
                assert abs(faltings_height(field, cm_type, CTX) - oracle) < CTX.eps

    @pytest.mark.parametrize("d", [5, 6, 9, 12, 16, 27])
    def test_non_fundamental_rejected(self, d):
        with pytest.raises(DomainError):
            chowla_selberg_oracle(d, CTX)

    def test_kronecker_matches_character_tables(self):
        for d, (n, gens) in QUADRATIC_FIELDS.items():
            field = quadratic_field(d)
            chi = next(c for c in field.character_group() if not c.is_trivial)
            for a in field.group.elements:
                t = chi.value_exponent(a)
                expected = 1 if t == 0 else -1
                assert kronecker_symbol(-d, a) == expected

    def test_fundamental_discriminant_predicate(self):
        assert is_fundamental_discriminant(-4)
        assert is_fundamental_discriminant(-15)
        assert not is_fundamental_discriminant(-9)
        assert not is_fundamental_discriminant(-12)


class TestProfileSerialization:
    def test_json_shape(self):
        field = make_field(4, ())
        profile = colmez_profile(field, cm_types(field)[0], CTX)
        payload = profile.to_json_dict(CTX)
        assert payload["field"] == {"modulus": 4, "subgroup_generators": []}
        assert payload["cm_type"] == 0
        assert payload["a0"] == {"1": "1", "3": "0"}
        assert set(payload["multiplicities"]) == {"chi[4;0]", "chi[4;1]"}
        assert payload["height"].startswith("-0.738167982986809431180561407628")
