"""
Modular Form Generators
q-expansions of eta, E4, E6, Delta, j, gamma2, gamma3 and the eta-quotients
used by the modular equation pipelines.

Every generator takes a relative precision `terms` (counted in powers of q
past the leading term) and an optional prime modulus; with a modulus the
result is a ResidueSeries.
"""

from __future__ import annotations

import logging
import threading
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from modeq.models.schemas import SeriesKind
from modeq.services.series import FracSeries, make_series, sparse_series

logger = logging.getLogger(__name__)

_cache: Dict[Tuple, FracSeries] = {}
_cache_lock = threading.Lock()


def _memoized(key: Tuple, build: Callable[[], FracSeries]) -> FracSeries:
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    value = build()
    with _cache_lock:
        return _cache.setdefault(key, value)


def clear_cache(modulus: Optional[int] = None) -> None:
    """Drop every memoized expansion, or only those reduced mod `modulus`."""
    with _cache_lock:
        if modulus is None:
            _cache.clear()
        else:
            for key in [key for key in _cache if key[-1] == modulus]:
                del _cache[key]


def _check_terms(terms: int) -> None:
    if terms < 1:
        raise ValueError(f"terms must be at least 1, got {terms}")


# ============================================================================
# Integer building blocks
# ============================================================================


def pentagonal_product(terms: int) -> List[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) up to q^terms (Euler's pentagonal theorem)."""
    coeffs = [0] * (terms + 1)
    coeffs[0] = 1
    k = 1
    while True:
        first = k * (3 * k - 1) // 2
        if first > terms:
            break
        sign = -1 if k % 2 else 1
        coeffs[first] = sign
        second = k * (3 * k + 1) // 2
        if second <= terms:
            coeffs[second] = sign
        k += 1
    return coeffs


def _divisor_power_sums(power: int, terms: int) -> List[int]:
    sums = [0] * (terms + 1)
    for d in range(1, terms + 1):
        dp = d ** power
        for multiple in range(d, terms + 1, d):
            sums[multiple] += dp
    return sums


def euler_product(step: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """prod_{n>=1} (1 - q^(step*n)) known through q^terms."""
    _check_terms(terms)

    def build() -> FracSeries:
        base = pentagonal_product(terms // step)
        sparse = {i * step: c for i, c in enumerate(base) if c}
        return sparse_series(sparse, 1, terms, modulus)

    return _memoized(("euler", step, terms, modulus), build)


def euler_partition_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """C(q) = 1/prod(1 - q^n), the partition generating function."""
    return _memoized(
        ("partition", terms, modulus),
        lambda: euler_product(1, terms, modulus).inverse(),
    )


# ============================================================================
# Eta and Eisenstein series
# ============================================================================


def eta_series(scale, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """
    eta(m z) = q^(m/24) prod (1 - q^(m n)) via the pentagonal theorem.

    Args:
        scale: m, a positive rational
        terms: relative precision in powers of q

    Returns:
        FracSeries over the denominator 24 * den(m) with valuation m/24
    """
    _check_terms(terms)
    m = Fraction(scale)
    if m <= 0:
        raise ValueError(f"eta scale must be positive, got {m}")
    a, b = m.numerator, m.denominator
    denom = 24 * b

    def build() -> FracSeries:
        # q^(m/24 + m n) has numerator a + 24 a n over 24 b
        trunc = a + denom * terms
        base = pentagonal_product(terms * b // a)
        sparse = {a + 24 * a * n: c for n, c in enumerate(base) if c}
        return sparse_series(sparse, denom, trunc, modulus)

    return _memoized(("eta", m, terms, modulus), build)


def e4_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """E4 = 1 + 240 sum sigma_3(n) q^n."""
    _check_terms(terms)

    def build() -> FracSeries:
        sums = _divisor_power_sums(3, terms)
        return make_series([1] + [240 * s for s in sums[1:]], 0, 1, terms, modulus)

    return _memoized(("e4", terms, modulus), build)


def e6_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """E6 = 1 - 504 sum sigma_5(n) q^n."""
    _check_terms(terms)

    def build() -> FracSeries:
        sums = _divisor_power_sums(5, terms)
        return make_series([1] + [-504 * s for s in sums[1:]], 0, 1, terms, modulus)

    return _memoized(("e6", terms, modulus), build)


def _inverse_euler_power(power: int, terms: int, modulus: Optional[int]) -> FracSeries:
    return _memoized(
        ("inverse_euler_power", power, terms, modulus),
        lambda: euler_partition_series(terms, modulus) ** power,
    )


def delta_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """Delta = eta^24 = q prod (1 - q^n)^24."""
    _check_terms(terms)
    return _memoized(
        ("delta", terms, modulus),
        lambda: (euler_product(1, terms, modulus) ** 24).shift(1),
    )


def j_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """j = E4^3 / eta^24 = 1/q + 744 + 196884 q + ..."""
    _check_terms(terms)
    return _memoized(
        ("j", terms, modulus),
        lambda: (e4_series(terms, modulus) ** 3 * _inverse_euler_power(24, terms, modulus)).shift(-1),
    )


def gamma2_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """gamma2 = E4 / eta^8, the cube root of j with leading term q^(-1/3)."""
    _check_terms(terms)
    return _memoized(
        ("gamma2", terms, modulus),
        lambda: (e4_series(terms, modulus) * _inverse_euler_power(8, terms, modulus)).shift(Fraction(-1, 3)),
    )


def gamma3_series(terms: int, modulus: Optional[int] = None) -> FracSeries:
    """gamma3 = E6 / eta^12, the square root of j - 1728 with leading term q^(-1/2)."""
    _check_terms(terms)
    return _memoized(
        ("gamma3", terms, modulus),
        lambda: (e6_series(terms, modulus) * _inverse_euler_power(12, terms, modulus)).shift(Fraction(-1, 2)),
    )


# ============================================================================
# Eta quotients
# ============================================================================


def c12_prefactor_exponent(p1: int, p2: int) -> Fraction:
    """Exponent of w collected from the four eta prefactors of C12; equals r."""
    return Fraction(p1 * p2 + 1 - p1 - p2, 24)


def c12_series(p1: int, p2: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """
    Integer series C12(w) in 1 + wZ[[w]].

    eta(p1 z) eta(z/p2) / (eta(z) eta(p1 z/p2)) = w^r C12(w) with w = q^(1/p2).
    The same power series results with p1 and p2 exchanged.
    """
    _check_terms(terms)
    lo, hi = sorted((p1, p2))

    def build() -> FracSeries:
        numerator = euler_product(lo * hi, terms, modulus) * euler_product(1, terms, modulus)
        denominator = euler_product(lo, terms, modulus) * euler_product(hi, terms, modulus)
        return numerator * denominator.inverse()

    return _memoized(("c12", lo, hi, terms, modulus), build)


def weber_series(p: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """w_p = eta(z/p)/eta(z) as a series in q^(1/p); terms counts powers of q^(1/p)."""
    _check_terms(terms)

    def build() -> FracSeries:
        quotient = euler_product(1, terms, modulus) * euler_product(p, terms, modulus).inverse()
        return quotient.shift(Fraction(1 - p, 24)).scale_exponents(Fraction(1, p))

    return _memoized(("weber", p, terms, modulus), build)


def w_quotient_series(p1: int, p2: int, e: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """
    (eta(z/p1) eta(z/p2) / (eta(z/p1p2) eta(z)))^e for p1 != p2, or
    (eta(z/p)^2 / (eta(z/p^2) eta(z)))^e for p1 = p2 = p.

    The result is a series in q^(1/(p1 p2)) with valuation -r e/(p1 p2);
    terms counts powers of u = q^(1/(p1 p2)).
    """
    _check_terms(terms)
    n = p1 * p2

    def build() -> FracSeries:
        # in u, eta(z/d) = u^(n/(24 d)) P(u^(n/d))
        numerator = euler_product(n // p1, terms, modulus) * euler_product(n // p2, terms, modulus)
        denominator = euler_product(1, terms, modulus) * euler_product(n, terms, modulus)
        lead = Fraction(n // p1 + n // p2 - 1 - n, 24)
        quotient = (numerator * denominator.inverse()) ** e
        return quotient.shift(lead * e).scale_exponents(Fraction(1, n))

    return _memoized(("w", p1, p2, e, terms, modulus), build)


def form_series(
    kind: SeriesKind,
    terms: int,
    *,
    scale=1,
    p1: Optional[int] = None,
    p2: Optional[int] = None,
    e: int = 1,
    modulus: Optional[int] = None,
) -> FracSeries:
    """Dispatch a SeriesKind to its generator."""
    kind = SeriesKind(kind)
    if kind == SeriesKind.ETA:
        return eta_series(scale, terms, modulus)
    if kind == SeriesKind.E4:
        return e4_series(terms, modulus)
    if kind == SeriesKind.E6:
        return e6_series(terms, modulus)
    if kind == SeriesKind.DELTA:
        return delta_series(terms, modulus)
    if kind == SeriesKind.J:
        return j_series(terms, modulus)
    if kind == SeriesKind.GAMMA2:
        return gamma2_series(terms, modulus)
    if kind == SeriesKind.GAMMA3:
        return gamma3_series(terms, modulus)
    if p1 is None:
        raise ValueError(f"Series kind {kind.value} needs a prime")
    if kind == SeriesKind.WEBER:
        return weber_series(p1, terms, modulus)
    if p2 is None:
        raise ValueError(f"Series kind {kind.value} needs two primes")
    if kind == SeriesKind.C12:
        return c12_series(p1, p2, terms, modulus)
    return w_quotient_series(p1, p2, e, terms, modulus)
