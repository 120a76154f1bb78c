"""Inequality checker tests, including synthetic code-path exercises."""

from fractions import Fraction

import mpmath as mp
import pytest

from cmheights.arith import PrecisionContext, digamma_half
from cmheights.bounds import (
    check_cyclotomic_disc_bound,
    check_disc_compositum,
    check_log_deriv_window,
    check_height_bound,
    check_mu_roots_of_unity,
    check_nearby_reflex,
    bost_report,
    make_report,
)
from cmheights.characters import is_odd
from cmheights.cmfields import cm_types, compositum, discriminant_log, make_field
from cmheights.colmez import reflex_characters
from cmheights.errors import DomainError
from cmheights.lfun import ZeroScanReport, stark_zero_scan

CTX = PrecisionContext(128)


def field_scan(field, step_fraction=1e-3):
    odd = [chi for chi in field.character_group() if is_odd(chi)]
    return stark_zero_scan(
        odd, discriminant_log(field, CTX), Fraction(1, 4), step_fraction, CTX
    )


def fake_dirty_scan(field, beta_str):
    clean = field_scan(field)
    with CTX.workprec():
        beta = 1 - mp.mpf(beta_str)
    return ZeroScanReport(
        region_left=clean.region_left,
        region_right=clean.region_right,
        step=clean.step,
        min_abs=mp.mpf(0),
        sign_changes=1,
        delta_flag=True,
        beta_estimate=beta,
    )


def odd_reflex_chars(field, cm_type):
    return [
        chi
        for chi in reflex_characters(field, cm_type)
        if not chi.is_trivial and is_odd(chi)
    ]


class TestReportHelper:
    def test_antisymmetry(self):
        a = make_report("t", 1.25, 2.0, "<=", CTX)
        b = make_report("t", 2.0, 1.25, "<=", CTX)
        assert a.margin == -b.margin
        assert a.holds is True
        assert b.holds is False

    def test_strict_inconclusive_band(self):
        with CTX.workprec():
            tiny = mp.mpf(2) ** (-120)
            report = make_report("t", mp.mpf(1), mp.mpf(1) + tiny, "<", CTX)
            assert report.holds == "inconclusive"

    def test_exact_equality_resolution(self):
        report = make_report("t", 1.0, 1.0, "<=", CTX, exact_sign=0)
        assert report.holds is True
        assert report.exact_equality
        strict = make_report("t", 1.0, 1.0, "<", CTX, exact_sign=0)
        assert strict.holds is False


class TestLogDerivWindow:
    def test_gaussian_two_sided(self):
        field = make_field(4, ())
        cm_type = cm_types(field)[0]
        chi = odd_reflex_chars(field, cm_type)[0]
        scan = field_scan(field)
        lower, upper = check_log_deriv_window(field, cm_type, chi, scan, CTX)
        assert lower.holds is True and upper.holds is True
        with CTX.workprec():
            # value = -2 L'/L(0, chi_-4) ~ -1.566; bounds ~ -+75 log 4 + base
            assert abs(lower.lhs - upper.lhs) == 0
            assert abs(lower.lhs + 2 * mp.mpf("0.78318878541367355")) < 1e-12
            base = mp.log(4 / mp.pi) + digamma_half(CTX)
            assert abs(upper.rhs - (75 * mp.log(4) + base)) < 1e-20
            assert lower.margin > 100 and upper.margin > 100

    def test_mu5_margins(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        scan = field_scan(field)
        for chi in odd_reflex_chars(field, cm_type):
            lower, upper = check_log_deriv_window(field, cm_type, chi, scan, CTX)
            assert lower.holds is True and upper.holds is True
            assert lower.margin > 100 and upper.margin > 100

    def test_synthetic_delta_shifts_by_2000(self):
        # a fabricated zero at 1 - 1e-3 moves the value by exactly -2000;
        # the upper bound still holds while the lower bound correctly fails
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        chi = odd_reflex_chars(field, cm_type)[0]
        clean = field_scan(field)
        dirty = fake_dirty_scan(field, "1e-3")
        clean_lower, clean_upper = check_log_deriv_window(field, cm_type, chi, clean, CTX)
        dirty_lower, dirty_upper = check_log_deriv_window(field, cm_type, chi, dirty, CTX)
        with CTX.workprec():
            assert abs((clean_lower.lhs - dirty_lower.lhs) - 2000) < mp.mpf(2) ** (-100)
        assert dirty_upper.holds is True
        assert dirty_lower.holds is False

    def test_even_character_rejected(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        even = next(
            chi
            for chi in reflex_characters(field, cm_type)
            if not chi.is_trivial and not is_odd(chi)
        )
        with pytest.raises(DomainError):
            check_log_deriv_window(field, cm_type, even, field_scan(field), CTX)


class TestHeightBound:
    def test_gaussian(self):
        field = make_field(4, ())
        cm_type = cm_types(field)[0]
        report = check_height_bound(field, cm_type, Fraction(1, 4), field_scan(field), CTX)
        assert report.holds is True
        with CTX.workprec():
            expected_rhs = mp.mpf(75) / 4 * 2 * mp.log(4) + (
                digamma_half(CTX) - mp.log(mp.pi)
            ) / 4
            assert abs(report.rhs - expected_rhs) < 1e-20
            assert abs(report.rhs - mp.mpf("51.209")) < 0.001

    def test_mu5_large_margin(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        report = check_height_bound(field, cm_type, Fraction(1, 4), field_scan(field), CTX)
        assert report.holds is True
        assert report.margin > 1000

    def test_c_monotonicity(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        scan = field_scan(field)
        quarter = check_height_bound(field, cm_type, Fraction(1, 4), scan, CTX)
        eighth = check_height_bound(field, cm_type, Fraction(1, 8), scan, CTX)
        assert eighth.rhs > quarter.rhs

    def test_hypothesis_failed_state(self):
        field = make_field(5, ())
        cm_type = cm_types(field)[0]
        dirty = fake_dirty_scan(field, 1 - mp.mpf("1e-3"))
        report = check_height_bound(field, cm_type, Fraction(1, 4), dirty, CTX)
        assert report.holds == "hypothesis-failed"


class TestDiscCompositum:
    def test_coprime_conductors_exact_equality(self):
        real = make_field(5, (4,), require_cm=False)
        gauss = make_field(4, ())
        r15, r16, r17, r18 = check_disc_compositum(real, gauss, CTX)
        assert r15.holds is True and r15.exact_equality
        assert r16.holds is True and r16.exact_equality
        assert r17.holds is True and r18.holds is True

    def test_self_compositum(self):
        gauss = make_field(4, ())
        r15, r16, _, _ = check_disc_compositum(gauss, gauss, CTX)
        assert r15.holds is True and r16.holds is True
        with CTX.workprec():
            # (1/2) log 4 <= (1/2) log 4 + (1/2) log 4
            assert abs(r15.margin - mp.log(2)) < CTX.eps

    def test_two_cyclotomics(self):
        a, b = make_field(5, ()), make_field(3, ())
        for report in check_disc_compositum(a, b, CTX):
            assert report.holds is True

    @pytest.mark.parametrize(
        "spec1,spec2",
        [((4, ()), (3, ())), ((8, (3,)), (5, ())), ((7, (2,)), (16, ())), ((12, ()), (20, (3,)))],
    )
    def test_never_fails_on_samples(self, spec1, spec2):
        for report in check_disc_compositum(make_field(*spec1), make_field(*spec2), CTX):
            assert report.holds is True


class TestNearbyReflex:
    def test_mu5_pair(self):
        field = make_field(5, ())
        types = cm_types(field)
        t1 = next(t for t in types if t.lifted() == {1, 2})
        t2 = next(t for t in types if t.lifted() == {1, 3})
        report = check_nearby_reflex(field, t1, t2, CTX)
        assert report.holds is True
        with CTX.workprec():
            assert abs(report.lhs - 2 * mp.log(125) / 4) < 1e-25
            assert abs(report.rhs - mp.log(125) / 4) < 1e-25

    def test_g1_conjugate_pair(self):
        field = make_field(4, ())
        t1, t2 = cm_types(field)
        report = check_nearby_reflex(field, t1, t2, CTX)
        assert report.holds is True
        with CTX.workprec():
            assert abs(report.lhs - mp.log(4)) < 1e-25

    def test_small_reflex_pair(self):
        # type fixing sqrt(-3) against a one-place flip: one reflex collapses
        field = compositum(make_field(5, (4,), require_cm=False), make_field(3, ()))
        fixing = next(
            t for t in cm_types(field) if all(a % 3 == 1 for a in t.lifted())
        )
        partner = next(
            t for t in cm_types(field) if t.intersection_size(fixing) == field.g - 1
        )
        report = check_nearby_reflex(field, fixing, partner, CTX)
        assert report.holds is True

    def test_rejects_non_nearby(self):
        field = make_field(5, ())
        types = cm_types(field)
        t1 = next(t for t in types if t.lifted() == {1, 2})
        with pytest.raises(DomainError):
            check_nearby_reflex(field, t1, t1, CTX)


class TestRootsOfUnityBound:
    @pytest.mark.parametrize(
        "spec,m,bound",
        [((4, ()), 4, 16), ((5, ()), 10, 64), ((24, ()), 24, 256)],
    )
    def test_examples(self, spec, m, bound):
        field = make_field(*spec)
        report = check_mu_roots_of_unity(field, CTX)
        assert report.holds is True
        assert report.inputs["m"] == m
        assert report.inputs["bound"] == bound


class TestCyclotomicDiscBound:
    def test_gaussian(self):
        report = check_cyclotomic_disc_bound(make_field(4, ()), CTX)
        assert report.holds is True
        assert report.inputs["level"] == 8
        with CTX.workprec():
            assert abs(report.lhs - mp.log(256)) < CTX.eps

    def test_eisenstein(self):
        report = check_cyclotomic_disc_bound(make_field(3, ()), CTX)
        assert report.holds is True
        assert report.inputs["m"] == 6
        assert report.inputs["level"] == 36

    def test_rhs_monotone_in_degree(self):
        def rhs(n):
            with CTX.workprec():
                big = mp.mpf((2 * n) ** 4)
                return big * n * mp.log(big)

        values = [rhs(n) for n in range(2, 18, 2)]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestBostReport:
    def test_records_small_fields(self):
        for spec in [(3, ()), (4, ())]:
            field = make_field(*spec)
            report = bost_report(field, cm_types(field)[0], CTX)
            assert report.holds is True
            assert report.inputs["pinned_floor"]

    def test_json_shape(self):
        field = make_field(4, ())
        report = bost_report(field, cm_types(field)[0], CTX)
        payload = report.to_json_dict(CTX)
        assert set(payload) == {"name", "lhs", "rhs", "holds", "margin", "inputs"}
