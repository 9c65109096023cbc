"""
Weber Modular Equations
Computes Phi[+-w_p^2](X, G2, G3, J) for a prime p > 3 from the power sums
of the reciprocal roots p/x, which reduce to powers of (eta(z)/eta(pz))^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from sympy import isprime

from modeq.core.config import settings
from modeq.core.errors import ModEqError
from modeq.models.schemas import EngineKind
from modeq.services.crt_engine import CrtEngine
from modeq.services.modular_forms import euler_product
from modeq.services.normal_form import ModEqPoly, power_sums_to_monic, reverse_and_descale
from modeq.services.numeric_verify import check_equation, weber_square
from modeq.services.recognizer import RecognitionContext, recognize
from modeq.services.series import FracSeries

logger = logging.getLogger(__name__)


class UnsupportedPrime(ModEqError):
    """The prime is not > 3 or exceeds the configured bound."""
    pass


def _validate_prime(p: int) -> None:
    if not isprime(p) or p <= 3:
        raise UnsupportedPrime(f"p={p} must be a prime greater than 3")


def required_terms(p: int, guard: Optional[int] = None) -> int:
    """(p^2 - 1)/12 coefficients of the j-series plus the guard."""
    _validate_prime(p)
    return (p * p - 1) // 12 + (settings.TERMS_GUARD if guard is None else guard)


def weber_label(p: int, sign: int) -> str:
    return f"{'-' if sign < 0 else ''}w_{p}^2"


@dataclass(frozen=True)
class KiepertTask:
    """One Weber equation computation; picklable for the CRT workers."""

    p: int
    n: int
    terms: int
    sign: int

    @classmethod
    def for_prime(cls, p: int, guard: Optional[int] = None) -> "KiepertTask":
        terms = required_terms(p, guard)
        sign = -1 if (p - 1) // 2 % 2 else 1
        return cls(p=p, n=p + 1, terms=terms, sign=sign)

    @property
    def degree(self) -> int:
        return self.n

    @property
    def excluded_primes(self) -> Tuple[int, ...]:
        return (self.p,)

    @property
    def label(self) -> str:
        return weber_label(self.p, self.sign)

    def run(self, modulus: Optional[int] = None) -> ModEqPoly:
        return kiepert_equation(self, modulus)


def reciprocal_root_series(p: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """(eta(z)/eta(pz))^2 = q^((1-p)/12) (P(q)/P(q^p))^2 with relative precision `terms`."""
    ratio = euler_product(1, terms, modulus) * euler_product(p, terms, modulus).inverse()
    return (ratio * ratio).shift(Fraction(1 - p, 12))


def s_k_series(p: int, k: int, terms: int, modulus: Optional[int] = None) -> FracSeries:
    """
    S_k = (p/x_{0,p,1})^k = (eta(z)/eta(pz))^(2k).

    The other p reciprocal roots have positive order and drop out of the
    recognized power sums.
    """
    if not 1 <= k <= p + 1:
        raise ValueError(f"k={k} outside 1..{p + 1}")
    return reciprocal_root_series(p, terms, modulus) ** k


def kiepert_equation(task: KiepertTask, modulus: Optional[int] = None) -> ModEqPoly:
    """Recognize S_1..S_n, run Newton's identities, then remove the powers of p."""
    base = reciprocal_root_series(task.p, task.terms, modulus)
    context = RecognitionContext(task.terms, modulus)
    power_sums = []
    current: Optional[FracSeries] = None
    for k in range(1, task.n + 1):
        current = base if current is None else current * base
        form = recognize(current, context=context)
        logger.debug(f"p={task.p} k={k}: {form}")
        power_sums.append(form.to_normal_poly(modulus))

    reciprocal = power_sums_to_monic(power_sums, task.n, modulus=modulus, variable="X")
    equation = reverse_and_descale(reciprocal, task.p, target_constant=task.sign * task.p)
    equation.label = task.label
    equation.variable = "X"
    equation.sign = task.sign
    equation.predicted_sign = task.sign
    return equation


def build_kiepert(
    p: int,
    *,
    guard: Optional[int] = None,
    engine: EngineKind = EngineKind.DIRECT,
    crt: Optional[CrtEngine] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> ModEqPoly:
    """
    Modular equation of (-1)^((p-1)/2) w_p^2 in (X, G2, G3, J).

    Args:
        p: prime with 3 < p <= MAX_KIEPERT_PRIME
        guard: extra coefficients past (p^2 - 1)/12
        engine: big-integer path or the multi-modular engine
        crt: engine instance to use with EngineKind.CRT
        samples: oracle sample points (0 skips the oracle)
        seed: oracle seed

    Returns:
        ModEqPoly whose sign and label come from the numeric oracle when it runs
    """
    _validate_prime(p)
    if p > settings.MAX_KIEPERT_PRIME:
        raise UnsupportedPrime(f"p={p} exceeds the configured bound {settings.MAX_KIEPERT_PRIME}")
    task = KiepertTask.for_prime(p, guard)
    logger.info(f"Computing Weber equation for p={p} (degree {task.n}, {task.terms} terms, {EngineKind(engine).value})")

    if EngineKind(engine) == EngineKind.CRT:
        result = (crt or CrtEngine()).run(task)
        equation = result.equation
        equation.primes = result.primes
        equation.label, equation.variable = task.label, "X"
        equation.sign = equation.predicted_sign = task.sign
    else:
        equation = kiepert_equation(task)

    samples = settings.VERIFY_SAMPLES if samples is None else samples
    if samples:
        report = check_equation(equation, weber_square(p), samples=samples, seed=seed)
        equation.verification = report
        equation.sign = report.chosen_sign
        equation.label = weber_label(p, report.chosen_sign)
        logger.info(f"Equation vanishes at {equation.label} (predicted {task.label})")
    return equation
