"""Serialization helpers: numbers as decimal strings at full working precision.

Reports never carry binary floats; decimal strings make golden-file diffing
and byte-identical regression runs possible.
"""

from __future__ import annotations

import mpmath as mp

from .arith import PrecisionContext


def decimal_str(value, ctx: PrecisionContext) -> str:
    """Deterministic decimal rendering of a real value at context precision."""
    with ctx.workprec():
        v = value if isinstance(value, mp.mpf) else mp.mpf(value)
        return mp.nstr(v, ctx.dps, strip_zeros=False)


def complex_str(value, ctx: PrecisionContext) -> str:
    with ctx.workprec():
        v = mp.mpc(value)
        return f"{decimal_str(v.real, ctx)}{'+' if v.imag >= 0 else '-'}{decimal_str(abs(v.imag), ctx)}j"
