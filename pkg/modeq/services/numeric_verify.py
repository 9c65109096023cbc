"""
Numeric Oracle
Evaluates eta, j, gamma2, gamma3 and eta-quotients at points of the upper
half plane with numpy, and checks that computed equations vanish there.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import pi
from typing import List, Optional, Tuple

import numpy as np

from modeq.core.config import settings
from modeq.core.errors import ModEqError
from modeq.models.schemas import SeriesIdentityReport, SeriesKind, SignCheck, VerificationReport
from modeq.services.modular_forms import form_series
from modeq.services.normal_form import ModEqPoly
from modeq.services.series import FracSeries

logger = logging.getLogger(__name__)


class ConvergenceWarning(UserWarning):
    """The last retained term of a series is not negligible at the sample point."""
    pass


class NoVanishingSign(ModEqError):
    """Neither sign variant of the function is a root of the equation."""
    pass


@dataclass(frozen=True)
class SamplePoint:
    """Point z of the upper half plane with Im z large enough for fast q-series convergence."""

    z: complex

    def __post_init__(self):
        if self.z.imag < settings.VERIFY_MIN_IM:
            raise ValueError(f"Sample point {self.z} has Im z below {settings.VERIFY_MIN_IM}")

    @property
    def q(self) -> complex:
        return complex(np.exp(2j * pi * self.z))


def sample_points(count: int, seed: Optional[int] = None) -> List[SamplePoint]:
    """Seeded random points with Re z in [-0.5, 0.5) and Im z in [VERIFY_MIN_IM, VERIFY_MAX_IM)."""
    rng = np.random.default_rng(settings.VERIFY_SEED if seed is None else seed)
    real = rng.uniform(-0.5, 0.5, count)
    imag = rng.uniform(settings.VERIFY_MIN_IM, settings.VERIFY_MAX_IM, count)
    return [SamplePoint(complex(x, y)) for x, y in zip(real, imag)]


def evaluate_series(series: FracSeries, z: complex) -> complex:
    """
    Sum the nonzero terms c q^(n/D), with q^(n/D) taken as exp(2 pi i z n/D).

    Warns with ConvergenceWarning when the last term exceeds 1e-16 of the sum.
    """
    pairs = list(series.support())
    if not pairs:
        return 0j
    exponents = np.array([n for n, _ in pairs], dtype=float) / series.denom
    coeffs = np.array([float(c) for _, c in pairs], dtype=float)
    values = coeffs * np.exp(2j * pi * complex(z) * exponents)
    total = complex(values.sum())
    tail = abs(values[-1])
    if len(pairs) > 1 and tail > 1e-16 * abs(total):
        message = f"Last term {tail:.3e} is not negligible against {abs(total):.3e} at z={z}"
        logger.warning(message)
        warnings.warn(message, ConvergenceWarning)
    return total


def eval_eta(scale, z: complex) -> complex:
    """
    eta(scale * z) by the pentagonal theorem, branch exp(2 pi i scale z / 24).

    Sums (-1)^k x^(k(3k-1)/2) over k = -K..K with x = exp(2 pi i scale z),
    K chosen so the first omitted term is below 1e-20.
    """
    m = float(Fraction(scale))
    z = complex(z)
    # |x|^g < 1e-20 once g > 20 log(10) / (2 pi m Im z)
    bound = 7.33 / (m * z.imag)
    count = int(np.ceil(np.sqrt(bound / 1.5))) + 2
    k = np.arange(-count, count + 1)
    exponents = k * (3 * k - 1) / 2
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    return complex(np.exp(2j * pi * m * z / 24) * np.sum(signs * np.exp(2j * pi * m * z * exponents)))


def eval_form(kind: SeriesKind, z, terms: Optional[int] = None, **params) -> complex:
    """Evaluate a generator of modular_forms at z (a SamplePoint or a complex number)."""
    point = z.z if isinstance(z, SamplePoint) else complex(z)
    series = form_series(SeriesKind(kind), terms or settings.NUMERIC_TERMS, **params)
    return evaluate_series(series, point)


@dataclass(frozen=True)
class FunctionSpec:
    """f(z) = prod eta(m z)^a over `factors`, with the sign predicted by theory."""

    label: str
    factors: Tuple[Tuple[Fraction, int], ...]
    predicted_sign: int = 1

    def evaluate(self, z: complex) -> complex:
        value = 1 + 0j
        for scale, power in self.factors:
            value *= eval_eta(scale, z) ** power
        return value


def weber_square(p: int) -> FunctionSpec:
    """w_p^2 = (eta(z/p)/eta(z))^2; the Kiepert equation vanishes at (-1)^((p-1)/2) w_p^2."""
    return FunctionSpec(
        label=f"w_{p}^2",
        factors=((Fraction(1, p), 2), (Fraction(1), -2)),
        predicted_sign=-1 if (p - 1) // 2 % 2 else 1,
    )


def kiepert_root(p: int) -> FunctionSpec:
    """x_{0,p,1} = p (eta(pz)/eta(z))^2 without the factor p."""
    return FunctionSpec(label=f"(eta({p}z)/eta(z))^2", factors=((Fraction(p), 2), (Fraction(1), -2)))


def equation_residual(equation: ModEqPoly, f: complex, j: complex, g2: complex, g3: complex) -> float:
    """|Phi(f, G2, G3, J)| divided by the largest monomial magnitude."""
    total = 0j
    largest = 0.0
    for fdeg, (jdeg, a, b), coeff in equation.monomials():
        value = float(coeff) * j ** jdeg * g2 ** a * g3 ** b * f ** fdeg
        total += value
        largest = max(largest, abs(value))
    return abs(total) / largest if largest else abs(total)


def check_equation(
    equation: ModEqPoly,
    spec: FunctionSpec,
    samples: Optional[int] = None,
    tolerance: Optional[float] = None,
    seed: Optional[int] = None,
) -> VerificationReport:
    """
    Evaluate the equation at (+f, G2, G3, J) and (-f, G2, G3, J) on random points.

    Raises:
        NoVanishingSign: neither sign variant stays below the tolerance
    """
    samples = settings.VERIFY_SAMPLES if samples is None else samples
    tolerance = settings.VERIFY_TOLERANCE if tolerance is None else tolerance
    seed = settings.VERIFY_SEED if seed is None else seed
    if samples < 1:
        raise ValueError("At least one sample point is required")

    worst = {1: 0.0, -1: 0.0}
    for point in sample_points(samples, seed):
        f = spec.evaluate(point.z)
        j = eval_form(SeriesKind.J, point)
        g2 = eval_form(SeriesKind.GAMMA2, point)
        g3 = eval_form(SeriesKind.GAMMA3, point)
        for sign in worst:
            worst[sign] = max(worst[sign], equation_residual(equation, sign * f, j, g2, g3))

    vanishing = [sign for sign in (1, -1) if worst[sign] < tolerance]
    logger.info(f"Oracle for {spec.label}: residual(+)={worst[1]:.2e} residual(-)={worst[-1]:.2e}")
    if not vanishing:
        raise NoVanishingSign(
            f"{equation.label or spec.label}: residuals {worst[1]:.2e} (+) and {worst[-1]:.2e} (-) "
            f"exceed {tolerance:.0e}"
        )
    chosen = min(vanishing, key=lambda sign: worst[sign])
    if len(vanishing) > 1:
        logger.warning(f"Both sign variants of {spec.label} vanish; keeping {chosen:+d}")
    if chosen != spec.predicted_sign:
        logger.warning(f"{spec.label}: vanishing sign {chosen:+d} differs from predicted {spec.predicted_sign:+d}")

    return VerificationReport(
        samples=samples,
        seed=seed,
        tolerance=tolerance,
        checks=[SignCheck(sign=sign, max_residual=worst[sign]) for sign in (1, -1)],
        chosen_sign=chosen,
        predicted_sign=spec.predicted_sign,
        unique=len(vanishing) == 1,
    )


def check_series_identities(z: complex = 1.5j, terms: Optional[int] = None) -> SeriesIdentityReport:
    """Relative defects of gamma2^3 = j, gamma3^2 = j - 1728 at z, and of j(i) = 1728."""
    j = eval_form(SeriesKind.J, z, terms)
    g2 = eval_form(SeriesKind.GAMMA2, z, terms)
    g3 = eval_form(SeriesKind.GAMMA3, z, terms)
    j_at_i = eval_form(SeriesKind.J, 1j, terms)
    return SeriesIdentityReport(
        z=str(complex(z)),
        gamma2_cubed_minus_j=abs(g2 ** 3 - j) / abs(j),
        gamma3_squared_minus_j_1728=abs(g3 ** 2 - (j - 1728)) / abs(j),
        j_at_i_minus_1728=abs(j_at_i - 1728) / 1728,
    )
