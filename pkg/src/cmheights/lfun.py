"""Dirichlet L-function analytics.

Values at arbitrary s via the Hurwitz-zeta decomposition, exact values and
logarithmic derivatives at s = 0, the completed function and its functional
equation, and real-axis zero scans over Stark intervals.  The scan grid is
evaluated with an incremental fixed-point scheme that reproduces the
Euler-Maclaurin formula term by term (same depth as `arith.hurwitz_zeta`)
while avoiding a fresh power computation per grid point.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .arith import (
    EM_FRACTIONS,
    EULER_MACLAURIN_J,
    PrecisionContext,
    euler_maclaurin_shift,
    hurwitz_zeta,
    log_gamma,
    to_mpf,
)
from .characters import (
    ResidueCharacter,
    RootOfUnitySum,
    character_values,
    conductor,
    is_odd,
    primitive_of,
)
from .errors import ConsistencyError, DegenerateSampleError, DomainError

# Fractional bits of fixed-point guard used by the scan engine; absorbs the
# rounding drift of ~10^5 incremental multiplications.
SCAN_GUARD_BITS = 48


def _require_primitive(chi: ResidueCharacter) -> None:
    if conductor(chi) != chi.modulus:
        raise DomainError(
            f"character mod {chi.modulus} is imprimitive (conductor {conductor(chi)})"
        )


def _scalar_key(s):
    if isinstance(s, int):
        return ("q", s, 1)
    if isinstance(s, Fraction):
        return ("q", s.numerator, s.denominator)
    if isinstance(s, mp.mpc):
        return ("c", s.real._mpf_, s.imag._mpf_)
    if isinstance(s, mp.mpf):
        return ("r", s._mpf_)
    return None


@functools.lru_cache(maxsize=4096)
def _hurwitz_row_cached(f: int, s_key, bits: int):
    ctx = PrecisionContext(bits)
    if s_key[0] == "q":
        s = Fraction(s_key[1], s_key[2])
    elif s_key[0] == "r":
        s = mp.mpf(s_key[1])
    else:
        s = mp.mpc(mp.mpf(s_key[1]), mp.mpf(s_key[2]))
    group = _units_of(f)
    return tuple(hurwitz_zeta(s, Fraction(a, f), ctx) for a in group)


def _units_of(f: int):
    from .characters import _unit_group_any

    return _unit_group_any(f).elements


def l_value(chi: ResidueCharacter, s, ctx: PrecisionContext):
    """L(s, chi) for primitive chi, via L = f^(-s) sum_a chi(a) zeta(s, a/f)."""
    _require_primitive(chi)
    f = chi.modulus
    with ctx.workprec():
        if f == 1:
            return hurwitz_zeta(s, 1, ctx)
        if s == 1:
            # limit formula: L(1, chi) = -(1/f) sum_a chi(a) psi(a/f)
            vals = character_values(chi, ctx.bits)
            total = mp.fsum(
                v * mp.digamma(mp.mpf(a) / f) for a, v in zip(_units_of(f), vals)
            )
            return -total / f
        key = _scalar_key(s)
        if key is not None:
            row = _hurwitz_row_cached(f, key, ctx.bits)
        else:
            row = tuple(hurwitz_zeta(s, Fraction(a, f), ctx) for a in _units_of(f))
        vals = character_values(chi, ctx.bits)
        total = mp.fsum(v * z for v, z in zip(vals, row))
        return mp.power(f, -mp.mpmathify(s)) * total


def l_at_zero(chi: ResidueCharacter) -> RootOfUnitySum:
    """L(0, chi) = -(1/f) sum_a a chi(a) for odd primitive chi, exact."""
    _require_primitive(chi)
    if not is_odd(chi):
        raise DomainError("l_at_zero requires an odd character (value vanishes otherwise)")
    f = chi.modulus
    out = RootOfUnitySum()
    for a in _units_of(f):
        out.add(chi.value_exponent(a), Fraction(-a, f))
    if out.is_zero():
        raise ConsistencyError(f"L(0, chi) vanished for odd chi mod {f}")
    return out


@functools.lru_cache(maxsize=None)
def _log_gamma_fraction(a: int, f: int, bits: int):
    return log_gamma(Fraction(a, f), PrecisionContext(bits))


@functools.lru_cache(maxsize=None)
def l_log_deriv_at_zero(chi: ResidueCharacter, ctx: PrecisionContext):
    """L'(0, chi)/L(0, chi) for odd primitive chi.

    Uses L'(0, chi) = -L(0, chi) log f + sum_a chi(a) log Gamma(a/f); the
    central-difference agreement with `l_value` near 0 is covered by tests.
    """
    _require_primitive(chi)
    if not is_odd(chi):
        raise DomainError("l_log_deriv_at_zero requires an odd character")
    f = chi.modulus
    with ctx.workprec():
        vals = character_values(chi, ctx.bits)
        gamma_sum = mp.fsum(
            v * _log_gamma_fraction(a, f, ctx.bits)
            for a, v in zip(_units_of(f), vals)
        )
        l0 = l_at_zero(chi).to_mpc(ctx)
        return gamma_sum / l0 - mp.log(f)


def completed_lambda(chi: ResidueCharacter, s, ctx: PrecisionContext):
    """f^(s/2) (pi^(-(s+1)/2) Gamma((s+1)/2)) L(s, chi) for odd primitive chi."""
    _require_primitive(chi)
    if not is_odd(chi):
        raise DomainError("completed_lambda is implemented for odd characters")
    with ctx.workprec():
        sv = mp.mpmathify(s) if not isinstance(s, Fraction) else to_mpf(s, ctx)
        f = chi.modulus
        gamma_factor = mp.power(mp.pi, -(sv + 1) / 2) * mp.gamma((sv + 1) / 2)
        return mp.power(f, sv / 2) * gamma_factor * l_value(chi, s, ctx)


ROOT_NUMBER_SAMPLES = (
    Fraction(1, 5),
    Fraction(7, 20),
    Fraction(1, 2),
    Fraction(13, 20),
    Fraction(4, 5),
)


def root_number(chi: ResidueCharacter, ctx: PrecisionContext):
    """W(chi) reported as Lambda(s, chi)/Lambda(1-s, conj chi) at s = 1/2."""
    with ctx.workprec():
        s = Fraction(1, 2)
        denom = completed_lambda(chi.conjugate(), 1 - s, ctx)
        if abs(denom) < ctx.eps:
            raise DegenerateSampleError("Lambda(1/2) is numerically degenerate")
        return completed_lambda(chi, s, ctx) / denom


def root_number_check(chi: ResidueCharacter, ctx: PrecisionContext):
    """max_s | |Lambda(s,chi)/Lambda(1-s,conj chi)| - 1 | over the fixed samples."""
    _require_primitive(chi)
    with ctx.workprec():
        worst = mp.mpf(0)
        for s in ROOT_NUMBER_SAMPLES:
            denom = completed_lambda(chi.conjugate(), 1 - s, ctx)
            if abs(denom) < ctx.eps:
                raise DegenerateSampleError(f"degenerate sample at s = {s}")
            ratio = completed_lambda(chi, s, ctx) / denom
            worst = max(worst, abs(abs(ratio) - 1))
        return worst


# ---------------------------------------------------------------------------
# Real-axis zero scans.
# ---------------------------------------------------------------------------


@dataclass
class ZeroScanReport:
    """Grid evidence about zeros of the odd-character product on a Stark interval.

    A clean report (delta_flag False) is evidence at grid resolution, never a
    proof; serialized reports carry an explicit evidence_only marker.
    """

    region_left: object
    region_right: object
    step: object
    min_abs: object
    sign_changes: int
    delta_flag: bool
    beta_estimate: object | None
    evidence_only: bool = True

    def to_json_dict(self, ctx: PrecisionContext) -> dict:
        from .report import decimal_str

        return {
            "region": [decimal_str(self.region_left, ctx), decimal_str(self.region_right, ctx)],
            "step": decimal_str(self.step, ctx),
            "min_abs": decimal_str(self.min_abs, ctx),
            "sign_changes": self.sign_changes,
            "delta": self.delta_flag,
            "beta": None if self.beta_estimate is None else decimal_str(self.beta_estimate, ctx),
            "evidence_only": self.evidence_only,
        }


def _validated_odd_primitives(characters) -> list[ResidueCharacter]:
    chars = list(characters)
    if not chars:
        raise DomainError("zero scan requires a nonempty character set")
    prims = []
    for chi in chars:
        if not is_odd(chi):
            raise DomainError("zero scan requires odd characters")
        prims.append(primitive_of(chi))
    keys = sorted(p.key() for p in prims)
    conj_keys = sorted(p.conjugate().key() for p in prims)
    if keys != conj_keys:
        raise DomainError("character set is not closed under conjugation")
    return prims


def product_value(characters, s, ctx: PrecisionContext):
    """prod_chi L(s, chi) over primitivized characters (slow reference path)."""
    with ctx.workprec():
        total = mp.mpc(1)
        for chi in characters:
            total *= l_value(chi, s, ctx)
        return total


def _fix(x, p: int) -> int:
    return mp.libmp.to_fixed(x._mpf_, p)


class _GridEngine:
    """Incremental Euler-Maclaurin evaluation of prod L(s, chi) on a grid.

    State per Hurwitz argument x = a/f: the N direct powers (x+k)^(-s), the
    tail power (x+N)^(-s) and their per-step multipliers (x+k)^(-h).  All grid
    arithmetic is integer fixed-point with SCAN_GUARD_BITS guard bits, so runs
    are bit-for-bit deterministic.
    """

    def __init__(self, prims, left_fix: int, step_fix: int, ctx: PrecisionContext):
        self.ctx = ctx
        self.p = ctx.bits + SCAN_GUARD_BITS
        p = self.p
        self.one = 1 << p
        self.n_shift = euler_maclaurin_shift(ctx.bits)
        self.jmax = EULER_MACLAURIN_J
        self.left_fix = left_fix
        self.step_fix = step_fix

        with mp.workprec(p + 40):
            s0 = mp.mpf(left_fix) / self.one
            h = mp.mpf(step_fix) / self.one
            self.coeff_fix = [
                _fix(mp.mpf(c.numerator) / c.denominator, p) for c in EM_FRACTIONS
            ]
            by_cond: dict[int, list[ResidueCharacter]] = {}
            for chi in prims:
                by_cond.setdefault(chi.modulus, []).append(chi)
            self.blocks = []
            for f in sorted(by_cond):
                units = _units_of(f)
                xs = []
                for a in units:
                    x = mp.mpf(a) / f
                    terms = [_fix((x + k) ** (-s0), p) for k in range(self.n_shift)]
                    mults = [_fix((x + k) ** (-h), p) for k in range(self.n_shift)]
                    w = x + self.n_shift
                    u = _fix(w ** (-s0), p)
                    du = _fix(w ** (-h), p)
                    wint = [_fix(w ** (1 - 2 * j), p) for j in range(1, self.jmax + 1)]
                    xs.append(
                        {"terms": terms, "mults": mults, "u": u, "du": du,
                         "wint": wint, "w_fix": _fix(w, p)}
                    )
                chars = []
                for chi in sorted(by_cond[f], key=lambda c: c.key()):
                    vals = character_values(chi, ctx.bits)
                    chars.append(
                        [( _fix(v.real, p), _fix(v.imag, p)) for v in vals]
                    )
                self.blocks.append(
                    {
                        "f": f,
                        "xs": xs,
                        "chars": chars,
                        "fpow": _fix(mp.mpf(f) ** (-s0), p),
                        "fmult": _fix(mp.mpf(f) ** (-h), p),
                    }
                )

    def values(self, count: int):
        """Yield (s_fix, re_fix, im_fix) for each of `count` grid points."""
        p = self.p
        one = self.one
        jmax = self.jmax
        coeff = self.coeff_fix
        for i in range(count):
            s_fix = self.left_fix + i * self.step_fix
            # shared per-point data: rising factorials and 1/(s-1)
            rises = []
            rise = s_fix
            for j in range(1, jmax + 1):
                if j > 1:
                    rise = (rise * (s_fix + ((2 * j - 3) << p))) >> p
                    rise = (rise * (s_fix + ((2 * j - 2) << p))) >> p
                rises.append((coeff[j - 1] * rise) >> p)
            inv_sm1 = -((one * one) // (one - s_fix))

            pre, pim = one, 0
            for block in self.blocks:
                zvals = []
                for xdata in block["xs"]:
                    terms = xdata["terms"]
                    total = sum(terms)
                    u = xdata["u"]
                    total += ((((u * xdata["w_fix"]) >> p) * inv_sm1) >> p) + (u >> 1)
                    wint = xdata["wint"]
                    for j in range(jmax):
                        total += (rises[j] * ((u * wint[j]) >> p)) >> p
                    zvals.append(total)
                    # advance state to the next grid point
                    mults = xdata["mults"]
                    xdata["terms"] = [(t * d) >> p for t, d in zip(terms, mults)]
                    xdata["u"] = (u * xdata["du"]) >> p
                fpow = block["fpow"]
                for chvals in block["chars"]:
                    sre = sim = 0
                    for (cre, cim), z in zip(chvals, zvals):
                        sre += cre * z
                        sim += cim * z
                    lre = (fpow * (sre >> p)) >> p
                    lim = (fpow * (sim >> p)) >> p
                    pre, pim = (pre * lre - pim * lim) >> p, (pre * lim + pim * lre) >> p
                block["fpow"] = (fpow * block["fmult"]) >> p
            yield s_fix, pre, pim


def per_character_zero_scans(
    characters,
    disc_log,
    c,
    step_fraction,
    ctx: PrecisionContext,
) -> dict:
    """One scan per character, pairing each complex chi with its conjugate.

    The scanned product for a complex character is |L|^2, which is real on
    the real axis; real characters are scanned alone.  Keyed by character.
    """
    done = set()
    out = {}
    for chi in _validated_odd_primitives(characters):
        if chi.key() in done:
            continue
        conj = chi.conjugate()
        pair = [chi] if conj.key() == chi.key() else [chi, conj]
        done.update(p.key() for p in pair)
        out[chi] = stark_zero_scan(pair, disc_log, c, step_fraction, ctx)
    return out


def stark_zero_scan(
    characters,
    disc_log,
    c,
    step_fraction,
    ctx: PrecisionContext,
) -> ZeroScanReport:
    """Scan prod_chi L(s, chi) for real zeros on [1 - c/disc_log, 1).

    Zero detection is a sign change or |P| below 2^(-bits/2) at a grid point;
    a detected zero is refined to width 2^(-bits/4) and reported as
    beta_estimate.  The report is evidence at grid resolution only.
    """
    prims = _validated_odd_primitives(characters)
    with ctx.workprec():
        dlog = to_mpf(disc_log, ctx)
        if not dlog > 0:
            raise DomainError("disc_log must be positive")
        c_val = to_mpf(c, ctx)
        if not (0 < c_val <= mp.mpf(1) / 4):
            raise DomainError("c must lie in (0, 1/4]")
        sf = to_mpf(step_fraction, ctx)
        if not (0 < sf < 1):
            raise DomainError("step_fraction must lie in (0, 1)")

        length = c_val / dlog
        left = 1 - length
        step = sf * length

        p = ctx.bits + SCAN_GUARD_BITS
        one = 1 << p
        left_fix = _fix(left, p)
        step_fix = max(1, _fix(step, p))
        count = (one - left_fix + step_fix - 1) // step_fix

        engine = _GridEngine(prims, left_fix, step_fix, ctx)
        threshold_fix = 1 << (p - (ctx.bits // 2))

        min_abs_fix = None
        max_im_fix = 0
        sign_changes = 0
        prev_sign = 0
        first_hit_fix = None  # s with a small |P| (threshold detector)
        bracket = None  # (s_lo, s_hi) around a sign change
        prev_s_fix = None
        for s_fix, re, im in engine.values(count):
            mag = math.isqrt(re * re + im * im)
            if min_abs_fix is None or mag < min_abs_fix:
                min_abs_fix = mag
                if mag < threshold_fix and first_hit_fix is None:
                    first_hit_fix = s_fix
            max_im_fix = max(max_im_fix, abs(im))
            sign = (re > 0) - (re < 0)
            if prev_sign != 0 and sign != 0 and sign != prev_sign:
                sign_changes += 1
                if bracket is None:
                    bracket = (prev_s_fix, s_fix)
            if sign != 0:
                prev_sign = sign
            prev_s_fix = s_fix

        if not mp.mpf(max_im_fix) / one <= ctx.eps:
            raise ConsistencyError("scan product has a non-negligible imaginary part")

        min_abs = mp.mpf(min_abs_fix) / one
        delta = sign_changes > 0 or min_abs < mp.mpf(2) ** (-(ctx.bits // 2))
        beta = None
        if delta:
            width = mp.mpf(2) ** (-(ctx.bits // 4))
            if bracket is not None:
                lo = mp.mpf(bracket[0]) / one
                hi = mp.mpf(bracket[1]) / one
                beta = _bisect_real_zero(prims, lo, hi, width, ctx)
            else:
                lo = mp.mpf(max(left_fix, first_hit_fix - step_fix)) / one
                hi = mp.mpf(min(left_fix + count * step_fix, first_hit_fix + step_fix)) / one
                beta = _ternary_min(prims, lo, hi, width, ctx)

        return ZeroScanReport(
            region_left=left,
            region_right=mp.mpf(1),
            step=step,
            min_abs=min_abs,
            sign_changes=sign_changes,
            delta_flag=bool(delta),
            beta_estimate=beta,
        )


def _bisect_real_zero(prims, lo, hi, width, ctx: PrecisionContext):
    f_lo = product_value(prims, lo, ctx).real
    while hi - lo > width:
        mid = (lo + hi) / 2
        f_mid = product_value(prims, mid, ctx).real
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2


def _ternary_min(prims, lo, hi, width, ctx: PrecisionContext):
    while hi - lo > width:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if abs(product_value(prims, m1, ctx)) < abs(product_value(prims, m2, ctx)):
            hi = m2
        else:
            lo = m1
    return (lo + hi) / 2
