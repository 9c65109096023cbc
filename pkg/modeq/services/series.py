"""
Truncated Puiseux Series
Exact arithmetic on series  sum_n c_n q^(n/D)  known modulo q^((T+1)/D).

FracSeries carries integer or rational coefficients. ResidueSeries carries
coefficients modulo a prime and backs the multi-modular engine; every
operation behaves identically on both.
"""

from __future__ import annotations

import logging
import numbers
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from modeq.core.errors import ModEqError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]


class ZeroLeadingCoefficient(ModEqError):
    """Raised when inverting a series with no known nonzero coefficient."""
    pass


class PrecisionExceeded(ModEqError):
    """Raised when a coefficient past the known truncation is requested."""
    pass


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _as_number(value) -> Number:
    """Collapse integral fractions to int so the common path stays on ints."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Rational):
        return _as_number(Fraction(int(value.numerator), int(value.denominator)))
    if isinstance(value, str):
        return _as_number(Fraction(value))
    raise TypeError(f"Unsupported coefficient type: {type(value).__name__}")


class FracSeries:
    """
    Truncated series sum_{n=val}^{trunc} c_n q^(n/denom).

    The valuation is canonical: coeffs[0] is nonzero unless the series is
    zero to the known precision, in which case coeffs is empty and
    val = trunc + 1. Instances are never mutated after construction.
    """

    __slots__ = ("denom", "val", "coeffs", "trunc")

    def __init__(
        self,
        coeffs: Sequence = (),
        val: int = 0,
        denom: int = 1,
        trunc: Optional[int] = None,
    ):
        if denom < 1:
            raise ValueError(f"Exponent denominator must be positive, got {denom}")
        values = [self._coerce(c) for c in coeffs]
        if trunc is None:
            trunc = val + len(values) - 1
        width = trunc - val + 1
        if width <= 0:
            values = []
        elif len(values) < width:
            values.extend([0] * (width - len(values)))
        else:
            del values[width:]

        start = 0
        while start < len(values) and values[start] == 0:
            start += 1
        if start == len(values):
            values = []
            val = trunc + 1
        elif start:
            values = values[start:]
            val += start

        self.denom = denom
        self.val = val
        self.coeffs = tuple(values)
        self.trunc = trunc

    # ------------------------------------------------------------------
    # Coefficient ring hooks (overridden by ResidueSeries)
    # ------------------------------------------------------------------

    def _coerce(self, value) -> Number:
        return _as_number(value)

    def _divide(self, numerator: Number, denominator: Number) -> Number:
        if isinstance(numerator, int) and isinstance(denominator, int) and numerator % denominator == 0:
            return numerator // denominator
        return _as_number(Fraction(numerator) / denominator)

    def _like(self, coeffs: Sequence, val: int, denom: int, trunc: int) -> "FracSeries":
        return FracSeries(coeffs, val, denom, trunc)

    def _check_compatible(self, other: "FracSeries") -> None:
        if type(other) is not type(self):
            raise TypeError(
                f"Cannot combine {type(self).__name__} with {type(other).__name__}"
            )

    @property
    def modulus(self) -> Optional[int]:
        return None

    # ------------------------------------------------------------------
    # Inspection
    # ------------------------------------------------------------------

    @property
    def valuation(self) -> Fraction:
        """Lowest exponent with a nonzero coefficient (precision bound if zero)."""
        return Fraction(self.val, self.denom)

    @property
    def precision(self) -> Fraction:
        """The series is known modulo q^precision."""
        return Fraction(self.trunc + 1, self.denom)

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading_coefficient(self) -> Number:
        if not self.coeffs:
            raise ZeroLeadingCoefficient("Series is zero to the known precision")
        return self.coeffs[0]

    def support(self) -> Iterator[Tuple[int, Number]]:
        """Yield (exponent numerator, coefficient) for every nonzero term."""
        for offset, c in enumerate(self.coeffs):
            if c:
                yield self.val + offset, c

    def terms(self) -> Iterator[Tuple[Fraction, Number]]:
        """Yield (exponent, coefficient) for every nonzero term."""
        for n, c in self.support():
            yield Fraction(n, self.denom), c

    def coeff_at(self, exponent) -> Number:
        """
        Coefficient of q^exponent.

        Raises:
            PrecisionExceeded: if the exponent lies beyond the truncation
        """
        e = Fraction(exponent)
        if e > Fraction(self.trunc, self.denom):
            raise PrecisionExceeded(
                f"Exponent {e} beyond truncation {Fraction(self.trunc, self.denom)}"
            )
        n = e * self.denom
        if n.denominator != 1:
            return 0
        n = int(n)
        if n < self.val:
            return 0
        return self.coeffs[n - self.val]

    # ------------------------------------------------------------------
    # Re-indexing
    # ------------------------------------------------------------------

    def _spread(self, step: int, denom: int) -> "FracSeries":
        trunc = (self.trunc + 1) * step - 1
        if not self.coeffs:
            return self._like((), trunc + 1, denom, trunc)
        val = self.val * step
        spread = [0] * (trunc - val + 1)
        for offset, c in enumerate(self.coeffs):
            spread[offset * step] = c
        return self._like(spread, val, denom, trunc)

    def reindex(self, denom: int) -> "FracSeries":
        """Same series written over a larger exponent denominator."""
        if denom % self.denom:
            raise ValueError(f"Cannot re-index denominator {self.denom} to {denom}")
        if denom == self.denom:
            return self
        return self._spread(denom // self.denom, denom)

    def scale_exponents(self, factor) -> "FracSeries":
        """Substitute q -> q^factor (factor a positive rational)."""
        f = Fraction(factor)
        if f <= 0:
            raise ValueError(f"Exponent scale must be positive, got {f}")
        return self._spread(f.numerator, self.denom * f.denominator)

    def compose_power(self, k: int) -> "FracSeries":
        """Substitute q -> q^k."""
        return self.scale_exponents(k)

    def normalize(self) -> "FracSeries":
        """Reduce the exponent denominator to the coarsest one the support allows."""
        g = self.denom
        for n, _ in self.support():
            g = gcd(g, n)
            if g == 1:
                return self
        if g == 1:
            return self
        trunc = self.trunc // g
        return self._like(self.coeffs[::g], self.val // g if self.coeffs else trunc + 1,
                          self.denom // g, trunc)

    def truncate(self, trunc: int) -> "FracSeries":
        """Forget every coefficient past exponent numerator trunc."""
        if trunc >= self.trunc:
            return self
        keep = max(0, trunc - self.val + 1)
        return self._like(self.coeffs[:keep], self.val, self.denom, trunc)

    def shift(self, exponent) -> "FracSeries":
        """Multiply by q^exponent."""
        e = Fraction(exponent)
        base = self.reindex(_lcm(self.denom, e.denominator))
        n = int(e * base.denom)
        return self._like(base.coeffs, base.val + n, base.denom, base.trunc + n)

    def _unify(self, other: "FracSeries") -> Tuple["FracSeries", "FracSeries"]:
        self._check_compatible(other)
        denom = _lcm(self.denom, other.denom)
        return self.reindex(denom), other.reindex(denom)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _constant(self, value) -> "FracSeries":
        return self._like((value,), 0, self.denom, self.trunc)

    def __add__(self, other) -> "FracSeries":
        if isinstance(other, numbers.Rational):
            other = self._constant(other)
        elif not isinstance(other, FracSeries):
            return NotImplemented
        a, b = self._unify(other)
        trunc = min(a.trunc, b.trunc)
        val = min(a.val, b.val)
        if val > trunc:
            return a._like((), trunc + 1, a.denom, trunc)
        out: List[Number] = [0] * (trunc - val + 1)
        for series in (a, b):
            base = series.val - val
            for offset, c in enumerate(series.coeffs):
                idx = base + offset
                if idx >= len(out):
                    break
                out[idx] += c
        return a._like(out, val, a.denom, trunc)

    __radd__ = __add__

    def __neg__(self) -> "FracSeries":
        return self._like([-c for c in self.coeffs], self.val, self.denom, self.trunc)

    def __sub__(self, other) -> "FracSeries":
        if isinstance(other, numbers.Rational):
            return self + (-other)
        if not isinstance(other, FracSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "FracSeries":
        return (-self) + other

    def scale(self, factor) -> "FracSeries":
        """Multiply every coefficient by a scalar."""
        factor = self._coerce(factor)
        return self._like([c * factor for c in self.coeffs], self.val, self.denom, self.trunc)

    def __mul__(self, other) -> "FracSeries":
        if isinstance(other, numbers.Rational):
            return self.scale(other)
        if not isinstance(other, FracSeries):
            return NotImplemented
        a, b = self._unify(other)
        trunc = min(a.val + b.trunc, b.val + a.trunc)
        val = a.val + b.val
        if a.is_zero() or b.is_zero() or val > trunc:
            return a._like((), trunc + 1, a.denom, trunc)
        size = trunc - val + 1
        out: List[Number] = [0] * size
        bc = b.coeffs
        for i, ai in enumerate(a.coeffs):
            if i >= size:
                break
            if not ai:
                continue
            for j in range(min(len(bc), size - i)):
                bj = bc[j]
                if bj:
                    out[i + j] += ai * bj
        return a._like(out, val, a.denom, trunc)

    __rmul__ = __mul__

    def inverse(self) -> "FracSeries":
        """
        Multiplicative inverse by the standard recurrence against the leading term.

        Raises:
            ZeroLeadingCoefficient: if the series is zero to the known precision
        """
        if self.is_zero():
            raise ZeroLeadingCoefficient("Cannot invert a series with no nonzero coefficient")
        rel = self.trunc - self.val
        a = self.coeffs
        a0 = a[0]
        inv: List[Number] = [self._divide(1, a0)]
        for n in range(1, rel + 1):
            acc = 0
            for i in range(1, n + 1):
                ai = a[i]
                if ai:
                    acc += ai * inv[n - i]
            inv.append(self._divide(-acc, a0))
        return self._like(inv, -self.val, self.denom, -self.val + rel)

    def __truediv__(self, other) -> "FracSeries":
        if isinstance(other, numbers.Rational):
            return self._like([self._divide(c, self._coerce(other)) for c in self.coeffs],
                              self.val, self.denom, self.trunc)
        if not isinstance(other, FracSeries):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k: int) -> "FracSeries":
        """Integer power by binary powering; negative powers go through inverse()."""
        if not isinstance(k, int):
            raise TypeError(f"Only integer powers are supported, got {type(k).__name__}")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return self._like((1,), 0, self.denom, max(self.trunc - self.val, 0))
        result: Optional[FracSeries] = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def sieve(self, modulus: int, residue: int) -> "FracSeries":
        """Keep only the terms whose exponent numerator is congruent to residue mod modulus."""
        if modulus < 1:
            raise ValueError(f"Sieve modulus must be positive, got {modulus}")
        kept = [
            c if (self.val + offset - residue) % modulus == 0 else 0
            for offset, c in enumerate(self.coeffs)
        ]
        return self._like(kept, self.val, self.denom, self.trunc)

    def weighted(self, weight: Callable[[int], Number]) -> "FracSeries":
        """Multiply the coefficient at exponent numerator n by weight(n)."""
        return self._like(
            [c * weight(self.val + offset) if c else 0 for offset, c in enumerate(self.coeffs)],
            self.val, self.denom, self.trunc,
        )

    # ------------------------------------------------------------------
    # Comparison and display
    # ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracSeries) or type(other) is not type(self):
            return NotImplemented
        if self.modulus != other.modulus:
            return False
        a, b = self.normalize(), other.normalize()
        return (a.denom, a.val, a.trunc, a.coeffs) == (b.denom, b.val, b.trunc, b.coeffs)

    __hash__ = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.format(6)})"

    def format(self, max_terms: int = 12, variable: str = "q") -> str:
        """Human readable rendering, e.g. q^(-5/6) - 2*q^(1/6) + O(q^(19/6))."""
        pieces: List[str] = []
        for count, (e, c) in enumerate(self.terms()):
            if count >= max_terms:
                pieces.append("+ ...")
                break
            if e == 0:
                mono = ""
            elif e == 1:
                mono = variable
            elif e.denominator == 1 and e > 0:
                mono = f"{variable}^{e}"
            else:
                mono = f"{variable}^({e})"
            negative = c < 0 if self.modulus is None else False
            magnitude = -c if negative else c
            if not mono:
                body = str(magnitude)
            elif magnitude == 1:
                body = mono
            else:
                body = f"{magnitude}*{mono}"
            if not pieces:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f"- {body}" if negative else f"+ {body}")
        bound = self.precision
        order = f"O({variable}^({bound}))" if bound.denominator != 1 or bound < 0 else f"O({variable}^{bound})"
        pieces.append(f"+ {order}" if pieces else order)
        return " ".join(pieces)

    def to_dict(self) -> Dict:
        """JSON form {denom, val, trunc, coeffs: [decimal strings]}."""
        return {
            "denom": self.denom,
            "val": self.val,
            "trunc": self.trunc,
            "coeffs": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "FracSeries":
        return make_series(
            [Fraction(c) for c in payload["coeffs"]],
            payload["val"],
            payload["denom"],
            payload["trunc"],
            payload.get("modulus"),
        )


class ResidueSeries(FracSeries):
    """Truncated series with coefficients in Z/mZ, m prime."""

    __slots__ = ("_modulus",)

    def __init__(
        self,
        coeffs: Sequence = (),
        val: int = 0,
        denom: int = 1,
        trunc: Optional[int] = None,
        *,
        modulus: int,
    ):
        if modulus < 2:
            raise ValueError(f"Residue modulus must be at least 2, got {modulus}")
        self._modulus = modulus
        super().__init__(coeffs, val, denom, trunc)

    @property
    def modulus(self) -> int:
        return self._modulus

    def _coerce(self, value) -> int:
        m = self._modulus
        if isinstance(value, str):
            value = Fraction(value)
        elif isinstance(value, numbers.Rational) and not isinstance(value, numbers.Integral):
            value = Fraction(int(value.numerator), int(value.denominator))
        if isinstance(value, Fraction):
            den = value.denominator % m
            if den == 0:
                raise ZeroDivisionError(f"Denominator {value.denominator} is not invertible mod {m}")
            return value.numerator * pow(den, -1, m) % m
        return int(value) % m

    def _divide(self, numerator: Number, denominator: Number) -> int:
        m = self._modulus
        den = self._coerce(denominator)
        if den == 0:
            raise ZeroDivisionError(f"Division by a multiple of {m}")
        return self._coerce(numerator) * pow(den, -1, m) % m

    def _like(self, coeffs: Sequence, val: int, denom: int, trunc: int) -> "ResidueSeries":
        return ResidueSeries(coeffs, val, denom, trunc, modulus=self._modulus)

    def _check_compatible(self, other: FracSeries) -> None:
        super()._check_compatible(other)
        if other.modulus != self._modulus:
            raise TypeError(f"Moduli differ: {self._modulus} vs {other.modulus}")

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        payload["modulus"] = self._modulus
        return payload

    @classmethod
    def from_frac(cls, series: FracSeries, modulus: int) -> "ResidueSeries":
        """Reduce an exact series modulo a prime."""
        return cls(series.coeffs, series.val, series.denom, series.trunc, modulus=modulus)


def make_series(
    coeffs: Sequence = (),
    val: int = 0,
    denom: int = 1,
    trunc: Optional[int] = None,
    modulus: Optional[int] = None,
) -> FracSeries:
    """Build a FracSeries, or a ResidueSeries when a modulus is given."""
    if modulus is None:
        return FracSeries(coeffs, val, denom, trunc)
    return ResidueSeries(coeffs, val, denom, trunc, modulus=modulus)


def sparse_series(
    terms: Dict[int, Number],
    denom: int,
    trunc: int,
    modulus: Optional[int] = None,
) -> FracSeries:
    """Sparse constructor for eta-type inputs: {exponent numerator: coefficient}."""
    nonzero = {n: c for n, c in terms.items() if c and n <= trunc}
    if not nonzero:
        return make_series((), trunc + 1, denom, trunc, modulus)
    val = min(nonzero)
    coeffs: List[Number] = [0] * (trunc - val + 1)
    for n, c in nonzero.items():
        coeffs[n - val] = c
    return make_series(coeffs, val, denom, trunc, modulus)
