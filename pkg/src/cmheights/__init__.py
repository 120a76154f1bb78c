"""Stable Faltings heights of CM abelian varieties with abelian CM field.

Heights are computed from the character-theoretic formula valid for abelian
CM fields, cross-checked against the averaged formula and the classical
quadratic closed form, together with grid-evidence zero scans and numerical
audits of the explicit inequalities surrounding them.
"""

from .arith import PrecisionContext

__all__ = ["PrecisionContext"]
__version__ = "0.1.0"
