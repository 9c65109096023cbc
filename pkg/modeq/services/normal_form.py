"""
Normal-Form Ring and Newton Identities
Arithmetic in Z[J, G2, G3]/(G2^3 - J, G3^2 - (J - 1728)), conversion of
power sums to a monic polynomial, and reversal of reciprocal-root
polynomials.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from modeq.core.errors import ModEqError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
Monomial = Tuple[int, int, int]  # (J degree, G2 exponent, G3 exponent)


class NonIntegralCoefficient(ModEqError):
    """Newton's identities produced a non-integral coefficient."""
    pass


class InconsistentScaling(ModEqError):
    """Removing the root scale did not give an integral polynomial with the expected constant."""
    pass


def _reduce(value: Number, modulus: Optional[int]) -> Number:
    if modulus is None:
        if isinstance(value, Fraction) and value.denominator == 1:
            return value.numerator
        return value
    if isinstance(value, Fraction):
        return value.numerator * pow(value.denominator % modulus, -1, modulus) % modulus
    return value % modulus


def _accumulate(out: Dict[Monomial, Number], key: Monomial, value: Number) -> None:
    total = out.get(key, 0) + value
    if total:
        out[key] = total
    else:
        out.pop(key, None)


class NormalPoly:
    """
    Element of the normal-form ring: G2 exponent below 3, G3 exponent below 2.

    Coefficients are exact integers or rationals, or residues when a modulus
    is set.
    """

    __slots__ = ("terms", "modulus")

    def __init__(self, terms: Optional[Mapping[Monomial, Number]] = None, modulus: Optional[int] = None):
        cleaned: Dict[Monomial, Number] = {}
        for (d, a, b), c in (terms or {}).items():
            if d < 0 or not 0 <= a <= 2 or not 0 <= b <= 1:
                raise ValueError(f"Monomial J^{d} G2^{a} G3^{b} is not in normal form")
            c = _reduce(c, modulus)
            if c:
                cleaned[(d, a, b)] = c
        self.terms = cleaned
        self.modulus = modulus

    @classmethod
    def constant(cls, value: Number, modulus: Optional[int] = None) -> "NormalPoly":
        return cls({(0, 0, 0): value}, modulus)

    @classmethod
    def monomial(cls, jdeg: int, g2: int, g3: int, coeff: Number = 1,
                 modulus: Optional[int] = None) -> "NormalPoly":
        """coeff * J^jdeg G2^g2 G3^g3 for arbitrary exponents, reduced to normal form."""
        jdeg += g2 // 3
        result = cls({(jdeg, g2 % 3, g3 % 2): coeff}, modulus)
        if g3 >= 2:
            j_minus_1728 = cls({(1, 0, 0): 1, (0, 0, 0): -1728}, modulus)
            for _ in range(g3 // 2):
                result = normal_mul(result, j_minus_1728)
        return result

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(key == (0, 0, 0) for key in self.terms)

    def constant_value(self) -> Number:
        return self.terms.get((0, 0, 0), 0)

    def is_integral(self) -> bool:
        return all(not isinstance(c, Fraction) for c in self.terms.values())

    @property
    def j_degree(self) -> int:
        return max((d for d, _, _ in self.terms), default=0)

    def valuation(self) -> Optional[Fraction]:
        """-max(d + a/3 + b/2): the q-order of the polynomial in (j, gamma2, gamma3)."""
        if not self.terms:
            return None
        return -max(d + Fraction(a, 3) + Fraction(b, 2) for d, a, b in self.terms)

    def items(self) -> Iterator[Tuple[Monomial, Number]]:
        """Monomials ordered by decreasing weight d + a/3 + b/2."""
        return iter(sorted(
            self.terms.items(),
            key=lambda item: -(item[0][0] + Fraction(item[0][1], 3) + Fraction(item[0][2], 2)),
        ))

    def _check_modulus(self, other: "NormalPoly") -> None:
        if self.modulus != other.modulus:
            raise TypeError(f"Moduli differ: {self.modulus} vs {other.modulus}")

    def __add__(self, other: "NormalPoly") -> "NormalPoly":
        if isinstance(other, (int, Fraction)):
            other = NormalPoly.constant(other, self.modulus)
        self._check_modulus(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            _accumulate(out, key, c)
        return NormalPoly(out, self.modulus)

    def __neg__(self) -> "NormalPoly":
        return NormalPoly({k: -c for k, c in self.terms.items()}, self.modulus)

    def __sub__(self, other: "NormalPoly") -> "NormalPoly":
        return self + (-other)

    def scale(self, factor: Number) -> "NormalPoly":
        return NormalPoly({k: c * factor for k, c in self.terms.items()}, self.modulus)

    def divide_scalar(self, divisor: Number) -> "NormalPoly":
        """Exact division by a nonzero scalar (modular inverse in residue mode)."""
        if self.modulus is not None:
            inv = pow(_reduce(divisor, self.modulus), -1, self.modulus)
            return self.scale(inv)
        out: Dict[Monomial, Number] = {}
        for key, c in self.terms.items():
            if isinstance(c, int) and isinstance(divisor, int) and c % divisor == 0:
                out[key] = c // divisor
            else:
                out[key] = Fraction(c) / divisor
        return NormalPoly(out, None)

    def __mul__(self, other) -> "NormalPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return normal_mul(self, other)

    __rmul__ = __mul__

    def reduce(self, modulus: int) -> "NormalPoly":
        """Image of an exact polynomial modulo a prime."""
        return NormalPoly(self.terms, modulus)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = NormalPoly.constant(other, self.modulus)
        if not isinstance(other, NormalPoly):
            return NotImplemented
        return self.modulus == other.modulus and self.terms == other.terms

    __hash__ = None

    def __repr__(self) -> str:
        return f"NormalPoly({dict(self.items())!r})"


def normal_mul(a: NormalPoly, b: NormalPoly) -> NormalPoly:
    """Product reduced with G2^3 -> J and G3^2 -> J - 1728."""
    a._check_modulus(b)
    out: Dict[Monomial, Number] = {}
    for (d1, a1, b1), c1 in a.terms.items():
        for (d2, a2, b2), c2 in b.terms.items():
            c = c1 * c2
            d = d1 + d2
            g2 = a1 + a2
            if g2 >= 3:
                g2 -= 3
                d += 1
            if b1 + b2 == 2:
                _accumulate(out, (d + 1, g2, 0), c)
                _accumulate(out, (d, g2, 0), -1728 * c)
            else:
                _accumulate(out, (d, g2, b1 + b2), c)
    return NormalPoly(out, a.modulus)


@dataclass(eq=False)
class ModEqPoly:
    """
    Polynomial in F over the normal-form ring; coeffs[d] multiplies F^d.

    `label` records which function (and sign variant) the equation is for.
    """

    fdeg: int
    coeffs: List[NormalPoly]
    label: str = ""
    variable: str = "F"
    modulus: Optional[int] = None
    sign: int = 1
    predicted_sign: int = 1
    verification: Optional[object] = field(default=None)
    primes: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.coeffs) != self.fdeg + 1:
            raise ValueError(f"Expected {self.fdeg + 1} coefficients, got {len(self.coeffs)}")

    def coefficient(self, d: int) -> NormalPoly:
        return self.coeffs[d]

    def is_monic(self) -> bool:
        lead = self.coeffs[self.fdeg]
        return lead.is_constant() and lead.constant_value() == 1

    def monomials(self) -> Iterator[Tuple[int, Monomial, Number]]:
        """(F degree, (jdeg, g2, g3), coeff) for every nonzero term, highest F first."""
        for d in range(self.fdeg, -1, -1):
            for key, c in self.coeffs[d].items():
                yield d, key, c

    def reduce(self, modulus: int) -> "ModEqPoly":
        return ModEqPoly(self.fdeg, [c.reduce(modulus) for c in self.coeffs],
                         self.label, self.variable, modulus, self.sign, self.predicted_sign)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModEqPoly):
            return NotImplemented
        return (self.fdeg, self.modulus, self.coeffs) == (other.fdeg, other.modulus, other.coeffs)

    __hash__ = None


def power_sums_to_monic(
    powsums: Sequence[NormalPoly],
    n: int,
    modulus: Optional[int] = None,
    variable: str = "F",
) -> ModEqPoly:
    """
    Newton's identities: e_k = (1/k) sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i.

    Returns:
        Monic polynomial whose F^(n-k) coefficient is (-1)^k e_k

    Raises:
        NonIntegralCoefficient: if an exact coefficient is not integral
    """
    if len(powsums) < n:
        raise ValueError(f"Need {n} power sums, got {len(powsums)}")
    elementary: List[NormalPoly] = [NormalPoly.constant(1, modulus)]
    for k in range(1, n + 1):
        acc = NormalPoly(None, modulus)
        for i in range(1, k + 1):
            term = normal_mul(elementary[k - i], powsums[i - 1])
            acc = acc + term if i % 2 else acc - term
        elementary.append(acc.divide_scalar(k))

    coeffs: List[NormalPoly] = [NormalPoly(None, modulus)] * (n + 1)
    for k, e_k in enumerate(elementary):
        coeffs[n - k] = e_k if k % 2 == 0 else -e_k
    if modulus is None:
        for d, c in enumerate(coeffs):
            if not c.is_integral():
                raise NonIntegralCoefficient(f"Coefficient of F^{d} is not integral: {c!r}")
    return ModEqPoly(n, coeffs, variable=variable, modulus=modulus)


def reverse_and_descale(
    poly: ModEqPoly,
    scale: int,
    target_constant: Optional[Number] = None,
) -> ModEqPoly:
    """
    Polynomial of the roots x_i from the monic polynomial of the roots scale/x_i.

    With poly = sum a_i Y^(n-i), the coefficient of x^i is a_i scale^(n-i) / a_n;
    a_n must be a nonzero constant.

    Raises:
        InconsistentScaling: non-integral result or unexpected constant term
    """
    n = poly.fdeg
    lead = poly.coeffs[0]
    if lead.is_zero() or not lead.is_constant():
        raise InconsistentScaling(f"Constant coefficient {lead!r} is not a nonzero constant")
    a_n = lead.constant_value()
    coeffs: List[NormalPoly] = []
    for i in range(n + 1):
        c = poly.coeffs[n - i].scale(scale ** (n - i)).divide_scalar(a_n)
        if poly.modulus is None and not c.is_integral():
            raise InconsistentScaling(f"Coefficient of F^{i} is not integral after descaling: {c!r}")
        coeffs.append(c)
    if target_constant is not None and coeffs[0] != NormalPoly.constant(target_constant, poly.modulus):
        raise InconsistentScaling(
            f"Constant term {coeffs[0]!r} differs from the expected {target_constant}"
        )
    return ModEqPoly(n, coeffs, poly.label, poly.variable, poly.modulus)
