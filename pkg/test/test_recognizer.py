from fractions import Fraction

import numpy as np
import pytest

from modeq.services.kiepert import reciprocal_root_series
from modeq.services.modular_forms import gamma2_series, gamma3_series, j_series
from modeq.services.recognizer import (
    GammaPoly,
    NoIntegralTwist,
    NonIntegerCoefficient,
    RecognitionContext,
    ResidualNotPositiveOrder,
    UnsupportedDenominator,
    recognize,
    recognize_poly_in_j,
    split_gamma_factors,
)
from modeq.services.series import FracSeries, sparse_series

TERMS = 18

# (11 / x_{0,11,1})^k = G2^a G3^b P(J), P listed from the leading coefficient down
P11_POWER_SUMS = {
    1: (1, 1, [1]),
    2: (2, 0, [1, -1244]),
    3: (0, 1, [1, -1002, 59895]),
    4: (1, 0, [1, -2488, 1510268, -135655520]),
    5: (2, 1, [1, -2246, 1287749, -145411750]),
    6: (0, 0, [1, -3732, 4586706, -2059075976, 253478654715, -2067305393340]),
    7: (1, 1, [1, -3490, 4063139, -1796527998, 247854700555, -4740750382830]),
    8: (2, 0, [1, -4976, 9210680, -7786404608, 2955697453292, -418137392559040, 12629117378938720]),
    9: (0, 1, [1, -4734, 8386065, -6877048710, 2611195915626, -398512009001700,
               16457557949779815, -41283301866181650]),
    10: (1, 0, [1, -6220, 15382190, -19242776200, 12809764457825, -4368737795118764,
                669619352632925750, -33921007872189625000, 233702090524237500000]),
    11: (2, 1, [1, -5978, 14256527, -17312108670, 11327366012605, -3889904574252522,
                631138185556080950, -38141443583282670180, 473098671409604281800]),
    12: (0, 0, [1, -7464, 23101236, -38353325536, 36913772324730, -20784851556729552,
                6580486714450069928, -1063011399511905159360, 72005127765018136775955,
                -1322204967509387392211000, 1424583710586688670191932]),
}


def _expected(k):
    g2, g3, descending = P11_POWER_SUMS[k]
    return GammaPoly(g2, g3, tuple(reversed(descending)))


@pytest.mark.parametrize("k", sorted(P11_POWER_SUMS))
def test_power_sums_for_p11(k):
    context = RecognitionContext(TERMS)
    series = reciprocal_root_series(11, TERMS) ** k

    assert recognize(series, context=context) == _expected(k)


def test_first_power_sum_expansion_for_p11():
    s1 = reciprocal_root_series(11, TERMS)

    assert s1.format(max_terms=4).startswith("q^(-5/6) - 2*q^(1/6) - q^(7/6) + 2*q^(13/6)")


def test_power_sums_for_p11_modulo_a_prime():
    m = 1000003
    context = RecognitionContext(TERMS, m)
    series = reciprocal_root_series(11, TERMS, m) ** 6

    form = recognize(series, context=context)
    assert (form.g2exp, form.g3exp) == (0, 0)
    assert form.poly_j == tuple(c % m for c in _expected(6).poly_j)


def test_recognize_basic_invariants():
    assert recognize(j_series(10)) == GammaPoly(0, 0, (0, 1))
    assert recognize(gamma2_series(10)) == GammaPoly(1, 0, (1,))
    assert recognize(gamma3_series(10)) == GammaPoly(0, 1, (1,))
    assert recognize(j_series(10) - 744) == GammaPoly(0, 0, (-744, 1))


def test_recognized_form_reproduces_the_series_below_q0():
    # the power sum also contains the positive-order reciprocal roots,
    # so only the coefficients of order <= 0 agree with S_2
    form = _expected(2)
    series = form.to_series(TERMS)
    single_root = reciprocal_root_series(11, TERMS) ** 2

    assert series.valuation == Fraction(-5, 3)
    polar = [e for e, _ in series.terms() if e <= 0]
    assert polar
    assert [series.coeff_at(e) for e in polar] == [single_root.coeff_at(e) for e in polar]
    assert [series.coeff_at(Fraction(-5, 3) + n) for n in range(2)] == [1, -4]


def test_fractional_exponents_are_not_a_polynomial_in_j():
    with pytest.raises(UnsupportedDenominator):
        recognize_poly_in_j(gamma2_series(10), allow_positive_tail=True)


def test_twist_follows_exponent_class():
    # exponent class 2/3 selects a single gamma2
    series = gamma2_series(TERMS) * (j_series(TERMS) - 744)

    g2, g3, quotient = split_gamma_factors(series)
    assert (g2, g3) == (1, 0)
    assert recognize_poly_in_j(quotient) == [-744, 1]


def test_zero_series_is_the_zero_form():
    form = recognize(FracSeries([], val=0, trunc=5))

    assert form.is_zero()
    assert form.degree == -1


def test_non_integer_coefficient():
    with pytest.raises(NonIntegerCoefficient):
        recognize(FracSeries([Fraction(1, 2)], val=-1, trunc=5))


def test_residual_with_fractional_exponents_is_rejected():
    series = sparse_series({-2: 1, -1: 5}, 2, 10)

    with pytest.raises(ResidualNotPositiveOrder):
        recognize_poly_in_j(series)


def test_denominator_must_divide_six():
    with pytest.raises(UnsupportedDenominator):
        split_gamma_factors(sparse_series({-1: 1}, 5, 10))


def test_mixed_exponent_classes_have_no_twist():
    with pytest.raises(NoIntegralTwist):
        split_gamma_factors(sparse_series({-3: 1, -2: 1}, 6, 12))


def test_gamma_poly_rejects_exponents_outside_normal_form():
    with pytest.raises(ValueError):
        GammaPoly(3, 0, (1,))


@pytest.mark.parametrize("seed", range(8))
def test_random_forms_survive_expansion_and_recognition(seed):
    rng = np.random.default_rng(seed)
    degree = int(rng.integers(1, 4))
    poly = tuple(int(c) for c in rng.integers(-50, 51, size=degree)) + (int(rng.integers(1, 10)),)
    form = GammaPoly(int(rng.integers(0, 3)), int(rng.integers(0, 2)), poly)

    assert recognize(form.to_series(20)) == form
