"""
Double Eta-Quotient Modular Equations
Computes Phi[(-1)^(delta+1) w_{p1,p2}^e](F, G2, G3, J) from the power sums
of the reciprocal negative-order conjugates, written as integer sieves of
C12(w)^(ek) (distinct primes) or of C(q)^(ek) (equal primes).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, gcd, pi
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from sympy import isprime, legendre_symbol, primerange

from modeq.core.config import settings
from modeq.core.errors import ModEqError
from modeq.models.schemas import EngineKind
from modeq.services.crt_engine import CrtEngine
from modeq.services.modular_forms import c12_series, euler_product
from modeq.services.normal_form import ModEqPoly, NormalPoly, power_sums_to_monic, reverse_and_descale
from modeq.services.numeric_verify import FunctionSpec, check_equation, eval_eta
from modeq.services.recognizer import RecognitionContext, recognize
from modeq.services.series import FracSeries

logger = logging.getLogger(__name__)


class UnsupportedPair(ModEqError):
    """The prime pair has no row in the parameter table."""
    pass


class InvariantViolation(ModEqError):
    """Derived parameters break a relation the table guarantees."""
    pass


class PrefactorNotRational(ModEqError):
    """A root-of-unity prefactor did not collapse to a sign."""
    pass


class PropertyCheckFailed(ModEqError):
    """A produced equation misses a structural property (valuations, constant term)."""
    pass


# Rows keyed by the classes of (p1, p2): the primes 2 and 3 stand for
# themselves, any other prime by its residue mod 12. Values are (s, e, delta).
_CLASS_ORDER = ("2", "3", "5", "7", "11")
_TABLE: Dict[Tuple[str, str], Tuple[int, int, int]] = {
    ("2", "2"): (24, 8, 3),
    ("2", "5"): (6, 2, 3),
    ("2", "11"): (12, 4, 3),
    ("3", "3"): (6, 3, 2),
    ("3", "7"): (2, 1, 2),
    ("3", "11"): (6, 3, 2),
    ("5", "5"): (3, 1, 3),
    ("5", "11"): (3, 1, 3),
    ("7", "7"): (2, 1, 2),
    ("7", "11"): (2, 1, 2),
    ("11", "11"): (6, 1, 6),
}


def _prime_class(p: int) -> str:
    return str(p) if p in (2, 3) else str(p % 12)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) as a plain int, so it mixes with series coefficients."""
    return int(legendre_symbol(a, p))


@dataclass(frozen=True)
class ParamSet:
    """Parameters of w_{p1,p2}: s, e, delta and r e = t/delta."""

    p1: int
    p2: int
    s: int
    e: int
    delta: int
    r: Fraction
    t: int
    sign: int
    degree: int

    @property
    def n(self) -> int:
        return self.p1 * self.p2

    @property
    def equal(self) -> bool:
        return self.p1 == self.p2

    @property
    def re(self) -> Fraction:
        return self.r * self.e

    @property
    def scale(self) -> int:
        """Root scale making the recognized power sums integral."""
        return self.p1 ** ((self.e + 1) // 2) if self.equal else 1

    @property
    def label(self) -> str:
        return double_eta_label(self, self.sign)

    def as_dict(self) -> Dict:
        return {
            "p1": self.p1, "p2": self.p2, "s": self.s, "e": self.e, "delta": self.delta,
            "r": str(self.r), "t": self.t, "sign": self.sign, "degree": self.degree,
        }

    def __str__(self) -> str:
        return (
            f"p1={self.p1} p2={self.p2} s={self.s} e={self.e} delta={self.delta} "
            f"r={self.r} t={self.t} sign={self.sign:+d} degree={self.degree}"
        )


def double_eta_label(params: ParamSet, sign: int) -> str:
    return f"{'-' if sign < 0 else ''}w_{{{params.p1},{params.p2}}}^{params.e}"


def derive_params(p1: int, p2: int, e: Optional[int] = None) -> ParamSet:
    """
    Look up (s, e, delta) for a prime pair and derive r, t, the sign and the degree.

    For distinct primes the odd one is placed first.

    Raises:
        UnsupportedPair: not both prime, or no table row, or e differs from the row
        InvariantViolation: a derived relation fails
    """
    if not (isprime(p1) and isprime(p2)):
        raise UnsupportedPair(f"({p1}, {p2}) is not a pair of primes")
    if p1 == 2 and p2 != 2:
        p1, p2 = p2, p1
    classes = (_prime_class(p1), _prime_class(p2))
    row = None
    if all(c in _CLASS_ORDER for c in classes):
        row = _TABLE.get(tuple(sorted(classes, key=_CLASS_ORDER.index)))
    if row is None:
        raise UnsupportedPair(f"No parameter row for ({p1}, {p2})")
    s_row, e_row, delta = row
    if e is not None and e != e_row:
        raise UnsupportedPair(f"e={e} is not available for ({p1}, {p2}); the table gives e={e_row}")

    s = 24 // gcd(24, (p1 - 1) * (p2 - 1))
    if s != s_row:
        raise InvariantViolation(f"s={s} computed but the table gives {s_row}")
    if s % e_row or e_row == s:
        raise InvariantViolation(f"e={e_row} must be a proper divisor of s={s}")
    r = Fraction((p1 - 1) * (p2 - 1), 24)
    re = r * e_row
    if re.denominator != delta:
        raise InvariantViolation(f"r e = {re} does not have denominator delta={delta}")
    n = p1 * p2
    if n % delta != 1 % delta or any((p + 1) % delta for p in (p1, p2)):
        raise InvariantViolation(f"({p1}, {p2}) not congruent to -1 mod delta={delta}")

    degree = (p1 + 1) * (p2 + 1) if p1 != p2 else p1 * (p1 + 1)
    return ParamSet(
        p1=p1, p2=p2, s=s, e=e_row, delta=delta, r=r, t=re.numerator,
        sign=1 if delta % 2 else -1, degree=degree,
    )


def supported_pairs(bound: int) -> List[ParamSet]:
    """Every prime pair up to bound accepted by derive_params (p1 odd, p1 <= p2 when both odd)."""
    found: List[ParamSet] = []
    primes = list(primerange(2, bound + 1))
    for i, a in enumerate(primes):
        for b in primes[i:]:
            try:
                found.append(derive_params(a, b))
            except UnsupportedPair:
                continue
    return found


def required_terms(params: ParamSet, guard: Optional[int] = None) -> int:
    """ceil(max(r e, e (p - 1)/12 for equal primes) * degree) + guard."""
    span = params.re
    if params.equal:
        span = max(span, Fraction(params.e * (params.p1 - 1), 12))
    return ceil(span * params.degree) + (settings.TERMS_GUARD if guard is None else guard)


# ============================================================================
# Power sums as sieves
# ============================================================================


def _conjugate_sieve(powered: FracSeries, k: int, pa: int, pb: int, params: ParamSet) -> FracSeries:
    """
    S_k over the pb conjugates with w = q^(1/pb):
    pb eps^(ke) sum_{i = -k t pb' (mod pb)} c_{k,i} w^(k r e + i), pb' = (pb + 1)/delta.
    """
    pb_prime = (pb + 1) // params.delta
    eps = 1 if pb == 2 else legendre(pa % pb, pb)
    sieved = powered.sieve(pb, (-k * params.t * pb_prime) % pb)
    series = sieved.shift(Fraction(k * params.t, params.delta)).scale_exponents(Fraction(1, pb))
    sign = eps if (k * params.e) % 2 else 1
    return (series * (pb * sign)).normalize()


def sigma_c2_k(params: ParamSet, k: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """Sum of the k-th powers of the p2 conjugates C'_{2,nu}; terms counts powers of w = q^(1/p2)."""
    if params.equal:
        raise ValueError("sigma_c2_k applies to distinct primes")
    if k == 0:
        raise ValueError("k must be nonzero")
    powered = c12_series(params.p1, params.p2, terms, modulus) ** (params.e * k)
    return _conjugate_sieve(powered, k, params.p1, params.p2, params)


def sigma_c1_k(params: ParamSet, k: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """The p1 conjugates C'_{1,nu}: sigma_c2_k with the roles of the primes exchanged."""
    if params.equal:
        raise ValueError("sigma_c1_k applies to distinct primes")
    if k == 0:
        raise ValueError("k must be nonzero")
    powered = c12_series(params.p1, params.p2, terms, modulus) ** (params.e * k)
    return _conjugate_sieve(powered, k, params.p2, params.p1, params)


def _collapse_prefactor(zeta24: int, rational: Fraction) -> Fraction:
    z = zeta24 % 24
    if z == 0:
        return rational
    if z == 12:
        return -rational
    raise PrefactorNotRational(f"Prefactor zeta24^{z} * {rational} is not rational")


def _equal_prime_base(p: int, terms: int, modulus: Optional[int]) -> FracSeries:
    """q^(-1/24) eta(pz)^2 / eta(z) = q^((p-1)/12) P(q^p)^2 / P(q)."""
    ratio = euler_product(p, terms, modulus) ** 2 * euler_product(1, terms, modulus).inverse()
    return ratio.shift(Fraction(p - 1, 12))


def _equal_prime_sum(params: ParamSet, k: int, x_power: FracSeries, c_power: FracSeries) -> FracSeries:
    p = params.p1
    ek = params.e * k
    if p == 2:
        inner = c_power.weighted(lambda i: -1 if i % 2 else 1)
        factor = Fraction(-16) ** k
    elif p == 3:
        if k % 2 == 0:
            inner = c_power.sieve(3, (-k) % 3) * 3 - c_power
            factor = Fraction(-3) ** (3 * k // 2)
        else:
            inner = c_power.weighted(lambda i: (0, -1, 1)[(i + k) % 3])
            factor = Fraction(-3) ** ((3 * k + 1) // 2)
    else:
        shift = ek * (p * p - 1) // 24
        zeta = 3 * ek * (p - 1)
        if k % 2 == 0:
            inner = c_power.sieve(p, (-shift) % p) * p - c_power
            rational = Fraction(p) ** (ek // 2)
        else:
            minus_one = legendre(p - 1, p)
            inner = c_power.weighted(lambda i: legendre((i + shift) % p, p) if (i + shift) % p else 0)
            rational = minus_one * Fraction(p) ** ((ek + 1) // 2)
            if minus_one < 0:
                zeta += 6
        factor = _collapse_prefactor(zeta, rational)
    return (x_power * inner * factor).normalize()


def sigma_c_k(params: ParamSet, k: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """Sum of the k-th powers of the p - 1 conjugates C'_nu for p1 = p2 = p; terms counts powers of q."""
    if not params.equal:
        raise ValueError("sigma_c_k applies to equal primes")
    if k == 0:
        raise ValueError("k must be nonzero")
    ek = params.e * k
    x_power = _equal_prime_base(params.p1, terms, modulus) ** ek
    c_power = euler_product(1, terms, modulus) ** (-ek)
    return _equal_prime_sum(params, k, x_power, c_power)


def reciprocal_power_sums(params: ParamSet, terms: int, modulus: Optional[int] = None) -> Iterator[FracSeries]:
    """Sigma_{-k} for k = 1..degree, reusing the running power of the base series."""
    e = params.e
    if params.equal:
        x_step = _equal_prime_base(params.p1, terms, modulus) ** (-e)
        c_step = euler_product(1, terms, modulus) ** e
        x_power, c_power = x_step, c_step
        for k in range(1, params.degree + 1):
            if k > 1:
                x_power, c_power = x_power * x_step, c_power * c_step
            yield _equal_prime_sum(params, -k, x_power, c_power)
    else:
        step = c12_series(params.p1, params.p2, terms, modulus) ** (-e)
        powered = step
        for k in range(1, params.degree + 1):
            if k > 1:
                powered = powered * step
            yield (_conjugate_sieve(powered, -k, params.p1, params.p2, params)
                   + _conjugate_sieve(powered, -k, params.p2, params.p1, params))


# ============================================================================
# Pipeline
# ============================================================================


@dataclass(frozen=True)
class DoubleEtaTask:
    """One double eta-quotient computation; picklable for the CRT workers."""

    params: ParamSet
    terms: int

    @property
    def degree(self) -> int:
        return self.params.degree

    @property
    def excluded_primes(self) -> Tuple[int, ...]:
        return (self.params.p1, self.params.p2)

    def run(self, modulus: Optional[int] = None) -> ModEqPoly:
        return double_eta_equation(self, modulus)


def double_eta_equation(task: DoubleEtaTask, modulus: Optional[int] = None) -> ModEqPoly:
    """Recognize the scaled Sigma_{-k}, run Newton's identities, reverse and remove the scale."""
    params = task.params
    context = RecognitionContext(task.terms, modulus)
    power_sums: List[NormalPoly] = []
    for k, sigma in enumerate(reciprocal_power_sums(params, task.terms, modulus), start=1):
        form = recognize(sigma.scale(params.scale ** k), allow_positive_tail=True, context=context)
        logger.debug(f"{params.label} k={k}: {form}")
        power_sums.append(form.to_normal_poly(modulus))

    reciprocal = power_sums_to_monic(power_sums, params.degree, modulus=modulus)
    equation = reverse_and_descale(reciprocal, params.scale)
    equation.label = params.label
    equation.sign = equation.predicted_sign = params.sign
    return equation


def phi_at_zero(params: ParamSet) -> int:
    """Constant term: 1 for distinct primes, 16 for p = 2, (-p)^(e(p-1)/2) for odd p."""
    if not params.equal:
        return 1
    p = params.p1
    if p == 2:
        return 16
    return (-p) ** (params.e * (p - 1) // 2)


def check_properties(equation: ModEqPoly, params: ParamSet) -> None:
    """
    Structural checks on an exact equation.

    Raises:
        PropertyCheckFailed: on a wrong constant term, trace valuation or lowest-order coefficient
    """
    bound = -2 * params.re
    low = params.degree - params.n - 1
    low_valuation = equation.coeffs[low].valuation()
    if low_valuation != bound:
        raise PropertyCheckFailed(
            f"{params.label}: coefficient of F^{low} has valuation {low_valuation}, expected {bound}"
        )
    for d, coeff in enumerate(equation.coeffs):
        v = coeff.valuation()
        if v is not None and v < bound:
            raise PropertyCheckFailed(f"{params.label}: coefficient of F^{d} has valuation {v} < {bound}")

    trace = equation.coeffs[params.degree - 1].valuation()
    if trace != -params.re:
        raise PropertyCheckFailed(f"{params.label}: trace valuation {trace}, expected {-params.re}")

    expected = phi_at_zero(params)
    if equation.coeffs[0] != NormalPoly.constant(expected):
        raise PropertyCheckFailed(f"{params.label}: constant term {equation.coeffs[0]!r}, expected {expected}")


def double_eta_function(params: ParamSet) -> FunctionSpec:
    """w_{p1,p2}^e as a product of eta factors, for the numeric oracle."""
    p1, p2, e = params.p1, params.p2, params.e
    if params.equal:
        factors = ((Fraction(1, p1), 2 * e), (Fraction(1, p1 * p1), -e), (Fraction(1), -e))
    else:
        factors = ((Fraction(1, p1), e), (Fraction(1, p2), e), (Fraction(1, p1 * p2), -e), (Fraction(1), -e))
    return FunctionSpec(label=double_eta_label(params, 1), factors=factors, predicted_sign=params.sign)


def build_double_eta(
    p1: int,
    p2: int,
    *,
    e: Optional[int] = None,
    guard: Optional[int] = None,
    engine: EngineKind = EngineKind.DIRECT,
    crt: Optional[CrtEngine] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> ModEqPoly:
    """
    Modular equation of (-1)^(delta+1) w_{p1,p2}^e in (F, G2, G3, J).

    The structural properties are always checked; the numeric oracle runs
    unless samples is 0 and decides the reported sign.
    """
    params = derive_params(p1, p2, e)
    task = DoubleEtaTask(params, required_terms(params, guard))
    logger.info(
        f"Computing {params.label}: degree {params.degree}, {task.terms} terms, {EngineKind(engine).value}"
    )
    if EngineKind(engine) == EngineKind.CRT:
        result = (crt or CrtEngine()).run(task)
        equation = result.equation
        equation.primes = result.primes
    else:
        equation = double_eta_equation(task)
    equation.label = params.label
    equation.sign = equation.predicted_sign = params.sign

    check_properties(equation, params)

    samples = settings.VERIFY_SAMPLES if samples is None else samples
    if samples:
        report = check_equation(equation, double_eta_function(params), samples=samples, seed=seed)
        equation.verification = report
        equation.sign = report.chosen_sign
        equation.label = double_eta_label(params, report.chosen_sign)
        logger.info(f"Equation vanishes at {equation.label} (predicted {params.label})")
    return equation


# ============================================================================
# Direct evaluation of the conjugates
# ============================================================================


def _chi(params: ParamSet) -> complex:
    return complex(np.exp(-2j * pi * params.t / params.delta))


def _conjugate_sum(params: ParamSet, k: int, z: complex, pa: int, pb: int) -> complex:
    """sum_nu chi^(-k nu) eps^(ke) Q(z + nu)^(ek), Q = eta(pa t) eta(t/pb) / (eta(t) eta(pa t/pb))."""
    e = params.e
    chi = _chi(params)
    eps = 1 if pb == 2 else legendre(pa % pb, pb)
    total = 0j
    for nu in range(pb):
        tau = complex(z) + nu
        quotient = (eval_eta(pa, tau) * eval_eta(Fraction(1, pb), tau)
                    / (eval_eta(1, tau) * eval_eta(Fraction(pa, pb), tau)))
        total += chi ** (-k * nu) * eps ** ((k * e) % 2) * quotient ** (e * k)
    return total


def conjugate_sum_c2(params: ParamSet, k: int, z: complex) -> complex:
    """Direct value of sigma_c2_k at z."""
    return _conjugate_sum(params, k, z, params.p1, params.p2)


def conjugate_sum_c1(params: ParamSet, k: int, z: complex) -> complex:
    """Direct value of sigma_c1_k at z."""
    return _conjugate_sum(params, k, z, params.p2, params.p1)


def conjugate_sum_c(params: ParamSet, k: int, z: complex) -> complex:
    """
    Direct value of sigma_c_k at z from
    C'_nu = chi^mu (sqrt(p) eps(nu) zeta24^theta(nu) eta(pz)^2 / (eta(z) eta(z + nu/p)))^e,
    with mu in [1, p-1], mu nu = -1 mod p and v = (1 + mu nu)/p.
    """
    p, e = params.p1, params.e
    z = complex(z)
    chi = _chi(params)
    outer = eval_eta(p, z) ** 2 / eval_eta(1, z)
    total = 0j
    for nu in range(1, p):
        mu = (-pow(nu, -1, p)) % p
        v = (1 + mu * nu) // p
        if p == 2:
            eps, theta = 1, 0
        else:
            eps = legendre((-nu) % p, p)
            theta = p * nu * (1 - mu * mu) + (-3 * p + 2 + v) * mu - 3 + 3 * p
        base = np.sqrt(p) * eps * np.exp(2j * pi * theta / 24) * outer / eval_eta(1, z + nu / p)
        total += (chi ** mu * base ** e) ** k
    return complex(total)


def conjugate_power_sum(params: ParamSet, k: int, z: complex) -> complex:
    """Sigma_k at z evaluated directly over the negative-order conjugates."""
    if params.equal:
        return conjugate_sum_c(params, k, z)
    return conjugate_sum_c2(params, k, z) + conjugate_sum_c1(params, k, z)
