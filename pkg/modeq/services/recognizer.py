"""
Series Recognizer
Turns an invariant q-series into gamma2^a gamma3^b times an integer
polynomial in j, by twisting to integral exponents and peeling j powers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Tuple

from modeq.core.errors import ModEqError
from modeq.services.modular_forms import gamma2_series, gamma3_series, j_series
from modeq.services.normal_form import NormalPoly
from modeq.services.series import FracSeries, PrecisionExceeded, make_series

logger = logging.getLogger(__name__)


class NonIntegerCoefficient(ModEqError):
    """A recognized coefficient is not an integer."""
    pass


class ResidualNotPositiveOrder(ModEqError):
    """Terms of order below 1 survive after peeling every power of j."""
    pass


class UnsupportedDenominator(ModEqError):
    """The exponent class of the series has a denominator not dividing 6."""
    pass


class NoIntegralTwist(ModEqError):
    """No gamma2^i gamma3^j twist makes every exponent integral."""
    pass


@dataclass(frozen=True)
class GammaPoly:
    """gamma2^g2exp * gamma3^g3exp * sum_d poly_j[d] j^d (poly_j ascending)."""

    g2exp: int
    g3exp: int
    poly_j: Tuple = ()

    def __post_init__(self):
        if not 0 <= self.g2exp <= 2 or not 0 <= self.g3exp <= 1:
            raise ValueError(f"Exponents out of normal form: G2^{self.g2exp} G3^{self.g3exp}")
        coeffs = list(self.poly_j)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "poly_j", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.poly_j) - 1

    def is_zero(self) -> bool:
        return not self.poly_j

    def to_terms(self) -> Dict[Tuple[int, int, int], int]:
        """Monomials {(jdeg, g2, g3): coeff} of the normal form."""
        return {
            (d, self.g2exp, self.g3exp): c
            for d, c in enumerate(self.poly_j)
            if c
        }

    def to_normal_poly(self, modulus: Optional[int] = None) -> NormalPoly:
        return NormalPoly(self.to_terms(), modulus)

    def to_series(self, terms: int, modulus: Optional[int] = None) -> FracSeries:
        """Evaluate the form as a q-series with relative precision `terms`."""
        j = j_series(terms, modulus)
        total = make_series((), terms + 1, 1, terms, modulus)
        power = make_series((1,), 0, 1, terms, modulus)
        for c in self.poly_j:
            if c:
                total = total + power * c
            power = power * j
        twist = make_series((1,), 0, 1, terms, modulus)
        if self.g2exp:
            twist = twist * gamma2_series(terms, modulus) ** self.g2exp
        if self.g3exp:
            twist = twist * gamma3_series(terms, modulus)
        return total * twist

    def __str__(self) -> str:
        prefix = "*".join(
            part for part in (
                "G3" if self.g3exp else "",
                {0: "", 1: "G2", 2: "G2^2"}[self.g2exp],
            ) if part
        )
        body = " + ".join(
            f"{c}*J^{d}" if d else str(c)
            for d, c in reversed(list(enumerate(self.poly_j))) if c
        ) or "0"
        return f"{prefix}*({body})" if prefix else body


class RecognitionContext:
    """
    Per-run cache of j powers and inverse gamma twists.

    Args:
        terms: relative precision (in powers of q) of every cached series
        modulus: optional prime for residue pipelines
    """

    def __init__(self, terms: int, modulus: Optional[int] = None):
        self.terms = terms
        self.modulus = modulus
        self._j_powers: List[FracSeries] = [make_series((1,), 0, 1, terms, modulus)]
        self._twists: Dict[Tuple[int, int], FracSeries] = {}

    def j_power(self, degree: int) -> FracSeries:
        if len(self._j_powers) <= degree:
            j = j_series(self.terms, self.modulus)
            while len(self._j_powers) <= degree:
                self._j_powers.append(self._j_powers[-1] * j)
        return self._j_powers[degree]

    def inverse_twist(self, g2exp: int, g3exp: int) -> FracSeries:
        """gamma2^(-g2exp) gamma3^(-g3exp)."""
        key = (g2exp, g3exp)
        if key not in self._twists:
            twist = make_series((1,), 0, 1, self.terms, self.modulus)
            if g2exp:
                twist = twist * gamma2_series(self.terms, self.modulus).inverse() ** g2exp
            if g3exp:
                twist = twist * gamma3_series(self.terms, self.modulus).inverse()
            self._twists[key] = twist
        return self._twists[key]

    @classmethod
    def for_series(cls, series: FracSeries) -> "RecognitionContext":
        """Context large enough to recognize `series` alone."""
        rel = Fraction(series.trunc - series.val + 1, series.denom)
        depth = max(0, ceil(-series.valuation))
        return cls(max(1, ceil(rel) + depth + 1), series.modulus)


def _exponent_class(series: FracSeries) -> Fraction:
    n = next(series.support())[0]
    return Fraction(n, series.denom) % 1


def recognize_poly_in_j(
    series: FracSeries,
    allow_positive_tail: bool = False,
    context: Optional[RecognitionContext] = None,
) -> List:
    """
    Find P with P(j) - series = O(q).

    Peels r * j^(-v) at each valuation v <= 0 of the running residual.

    Returns:
        Coefficients of P in ascending order (empty for the zero polynomial)

    Raises:
        UnsupportedDenominator: allow_positive_tail with non-integral exponents
        ResidualNotPositiveOrder: terms of order below 1 survive the peeling
    """
    if series.trunc < 0:
        raise PrecisionExceeded(
            f"Series known only modulo q^{series.precision}; need the q^0 coefficient"
        )
    residual = series.normalize()
    if residual.is_zero():
        return []
    if allow_positive_tail and residual.denom != 1:
        raise UnsupportedDenominator(
            f"A positive tail must have integral exponents, got denominator {residual.denom}"
        )
    if context is None:
        context = RecognitionContext.for_series(residual)

    degree = max(0, -int(residual.valuation // 1))
    coeffs: List = [0] * (degree + 1)
    for d in range(degree, -1, -1):
        c = residual.coeff_at(-d)
        if not c:
            continue
        if residual.modulus is None and isinstance(c, Fraction):
            raise NonIntegerCoefficient(f"Coefficient {c} of J^{d} is not an integer")
        coeffs[d] = c
        residual = residual - context.j_power(d) * c

    if not allow_positive_tail and not residual.is_zero() and residual.valuation < 1:
        raise ResidualNotPositiveOrder(
            f"Residual has valuation {residual.valuation} after peeling powers of j"
        )
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def split_gamma_factors(
    series: FracSeries,
    context: Optional[RecognitionContext] = None,
) -> Tuple[int, int, FracSeries]:
    """
    Select the unique gamma2^i gamma3^j making the exponents integral.

    The twist is read off the exponent class of the series (any nonzero
    exponent mod 1), so a leading coefficient that vanished in a sieve does
    not matter.

    Returns:
        (i, j, series / (gamma2^i gamma3^j))
    """
    if series.is_zero():
        return 0, 0, series
    cls = _exponent_class(series)
    if 6 % cls.denominator:
        raise UnsupportedDenominator(f"Exponent class {cls} has denominator not dividing 6")
    for n, _ in series.support():
        if Fraction(n, series.denom) % 1 != cls:
            raise NoIntegralTwist(
                f"Exponent {Fraction(n, series.denom)} is not congruent to {cls} mod 1"
            )

    choice = next(
        ((i, j) for j in (0, 1) for i in (0, 1, 2)
         if (cls + Fraction(i, 3) + Fraction(j, 2)).denominator == 1),
        None,
    )
    if choice is None:
        raise NoIntegralTwist(f"No gamma twist clears exponent class {cls}")
    g2exp, g3exp = choice
    if not g2exp and not g3exp:
        return 0, 0, series.normalize()
    if context is None:
        context = RecognitionContext.for_series(series)
    quotient = (series * context.inverse_twist(g2exp, g3exp)).normalize()
    return g2exp, g3exp, quotient


def recognize(
    series: FracSeries,
    allow_positive_tail: bool = False,
    context: Optional[RecognitionContext] = None,
) -> GammaPoly:
    """Recognize an invariant series as gamma2^a gamma3^b P(j) with integer P."""
    if series.is_zero():
        return GammaPoly(0, 0, ())
    if context is None:
        context = RecognitionContext.for_series(series)
    g2exp, g3exp, quotient = split_gamma_factors(series, context)
    poly = recognize_poly_in_j(quotient, allow_positive_tail=allow_positive_tail, context=context)
    return GammaPoly(g2exp, g3exp, tuple(poly))
