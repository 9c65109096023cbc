from fractions import Fraction

import pytest

from modeq.models.schemas import SeriesKind
from modeq.services.modular_forms import (
    c12_series,
    clear_cache,
    delta_series,
    e4_series,
    e6_series,
    eta_series,
    euler_partition_series,
    euler_product,
    form_series,
    gamma2_series,
    gamma3_series,
    j_series,
    pentagonal_product,
    w_quotient_series,
    weber_series,
)
from modeq.services.series import ResidueSeries


def _naive_euler_product(terms):
    coeffs = [1] + [0] * terms
    for n in range(1, terms + 1):
        for i in range(terms, n - 1, -1):
            coeffs[i] -= coeffs[i - n]
    return coeffs


def test_pentagonal_product_agrees_with_the_product_to_200_terms():
    assert pentagonal_product(200) == _naive_euler_product(200)


def test_pentagonal_product_first_terms():
    assert pentagonal_product(12) == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]


def test_partition_numbers():
    c = euler_partition_series(10)

    assert list(c.coeffs) == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_eisenstein_series():
    assert e4_series(3).coeffs == (1, 240, 2160, 6720)
    assert e6_series(3).coeffs == (1, -504, -16632, -122976)


def test_delta_is_ramanujan_tau():
    delta = delta_series(5)

    assert delta.valuation == 1
    assert list(delta.coeffs[:5]) == [1, -24, 252, -1472, 4830]


def test_j_invariant_expansion():
    j = j_series(4)

    assert j.valuation == -1
    assert [j.coeff_at(n) for n in range(-1, 3)] == [1, 744, 196884, 21493760]


def test_gamma2_cubed_is_j():
    terms = 30
    g2 = gamma2_series(terms)

    assert g2.valuation == Fraction(-1, 3)
    assert g2.coeff_at(Fraction(2, 3)) == 248
    assert g2 ** 3 == j_series(terms)


def test_gamma3_squared_is_j_minus_1728():
    terms = 30
    g3 = gamma3_series(terms)

    assert g3.valuation == Fraction(-1, 2)
    assert g3.coeff_at(Fraction(1, 2)) == -492
    assert g3 ** 2 == j_series(terms) - 1728


def test_eta_series_leading_term_and_denominator():
    eta = eta_series(7, 10)

    assert eta.valuation == Fraction(7, 24)
    assert eta.denom == 24
    assert eta.coeff_at(Fraction(7, 24) + 7) == -1

    eta_seventh = eta_series(Fraction(1, 7), 10)
    assert eta_seventh.denom == 168
    assert eta_seventh.valuation == Fraction(1, 168)


def test_eta_to_the_24th_is_delta():
    eta = eta_series(1, 12)

    assert eta ** 24 == delta_series(12)


def test_euler_product_with_step():
    p = euler_product(3, 10)

    assert [n for n, _ in p.support()] == [0, 3, 6]
    assert p.trunc == 10


def test_c12_is_integral_with_constant_one():
    c = c12_series(3, 7, 20)

    assert c.valuation == 0
    assert c.coeffs[0] == 1
    assert all(isinstance(x, int) for x in c.coeffs)
    assert c == c12_series(7, 3, 20)


def test_weber_series_in_fractional_powers():
    w = weber_series(5, 20)

    # eta(z/5)/eta(z) = q^(-1/30) (1 - q^(1/5) - q^(2/5) + ...)
    assert w.valuation == Fraction(-1, 30)
    assert w.coeff_at(Fraction(-1, 30) + Fraction(1, 5)) == -1
    assert w.coeff_at(Fraction(-1, 30) + Fraction(2, 5)) == -1


def test_double_eta_quotient_valuation():
    # -r e/(p1 p2) with r = (p1 - 1)(p2 - 1)/24
    w = w_quotient_series(3, 7, 1, 30)

    assert w.valuation == Fraction(-12, 24 * 21)


def test_residue_generators():
    j = j_series(5, 101)

    assert isinstance(j, ResidueSeries)
    assert j.coeff_at(0) == 744 % 101
    assert j.coeff_at(1) == 196884 % 101


@pytest.mark.parametrize("kind", [SeriesKind.E4, SeriesKind.E6, SeriesKind.J, SeriesKind.GAMMA2])
def test_form_series_dispatch(kind):
    direct = {
        SeriesKind.E4: e4_series,
        SeriesKind.E6: e6_series,
        SeriesKind.J: j_series,
        SeriesKind.GAMMA2: gamma2_series,
    }[kind]

    assert form_series(kind, 8) == direct(8)


def test_form_series_needs_primes_for_quotients():
    with pytest.raises(ValueError):
        form_series(SeriesKind.C12, 8)
    assert form_series(SeriesKind.C12, 8, p1=3, p2=7) == c12_series(3, 7, 8)


def test_terms_must_be_positive():
    with pytest.raises(ValueError):
        j_series(0)


def test_clear_cache_rebuilds_equal_series():
    before = j_series(5)
    clear_cache()
    after = j_series(5)

    assert after is not before
    assert after == before


def test_clear_cache_for_one_modulus():
    exact = j_series(5)
    reduced = j_series(5, 7)

    clear_cache(7)
    assert j_series(5) is exact
    assert j_series(5, 7) is not reduced
    assert j_series(5, 7) == reduced
