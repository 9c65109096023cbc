import cmath
import warnings
from fractions import Fraction

import pytest

from modeq.models.schemas import SeriesKind
from modeq.services.equation_io import parse_equation
from modeq.services.modular_forms import eta_series, j_series
from modeq.services.numeric_verify import (
    ConvergenceWarning,
    NoVanishingSign,
    SamplePoint,
    check_equation,
    check_series_identities,
    equation_residual,
    eval_eta,
    eval_form,
    evaluate_series,
    sample_points,
    weber_square,
)


def test_sample_points_are_seeded_and_in_range():
    first = sample_points(10, seed=5)
    second = sample_points(10, seed=5)

    assert first == second
    assert all(-0.5 <= p.z.real < 0.5 and 1.2 <= p.z.imag < 2.0 for p in first)


def test_sample_point_too_close_to_real_axis():
    with pytest.raises(ValueError):
        SamplePoint(complex(0.1, 0.5))


def test_eta_pentagonal_sum_matches_series():
    z = complex(0.2, 1.3)

    for scale in (1, 7, Fraction(1, 5)):
        series_value = evaluate_series(eta_series(scale, 60), z)
        assert abs(eval_eta(scale, z) - series_value) < 1e-12 * abs(series_value)


def test_eta_at_i():
    # eta(i) = Gamma(1/4) / (2 pi^(3/4))
    expected = 0.768225422326056659
    assert abs(eval_eta(1, 1j) - expected) < 1e-12


def test_series_identities_at_a_point():
    report = check_series_identities(complex(0.1, 1.4))

    assert report.gamma2_cubed_minus_j < 1e-10
    assert report.gamma3_squared_minus_j_1728 < 1e-10
    assert report.j_at_i_minus_1728 < 1e-10


def test_j_at_sqrt_minus_2():
    # j(i sqrt(2)) = 8000
    assert abs(eval_form(SeriesKind.J, complex(0, 2 ** 0.5)) - 8000) < 1e-6


def test_residual_is_relative():
    equation = parse_equation("X^2 - 4", "X")

    assert equation_residual(equation, 2, 0, 0, 0) == 0
    assert equation_residual(equation, 3, 0, 0, 0) == pytest.approx(5 / 9)


def test_check_equation_without_a_vanishing_sign():
    with pytest.raises(NoVanishingSign):
        check_equation(parse_equation("X - 1", "X"), weber_square(5), samples=3)


def test_weber_equation_for_p5_vanishes_at_plus_sign():
    equation = parse_equation("X^6 + 10*X^3 - G2*X + 5", "X")

    report = check_equation(equation, weber_square(5), samples=10)
    assert report.chosen_sign == 1
    assert report.predicted_sign == 1
    assert report.unique
    worst = {check.sign: check.max_residual for check in report.checks}
    assert worst[1] < 1e-8 < worst[-1]


def test_weber_square_is_the_square_of_the_quotient():
    z = complex(-0.3, 1.5)

    value = weber_square(7).evaluate(z)
    direct = (eval_eta(Fraction(1, 7), z) / eval_eta(1, z)) ** 2
    assert cmath.isclose(value, direct, rel_tol=1e-14)


def test_residual_shrinks_with_more_terms():
    equation = parse_equation("X^6 + 10*X^3 - G2*X + 5", "X")
    z = complex(0.17, 1.25)
    f = weber_square(5).evaluate(z)

    def residual(terms):
        j, g2, g3 = (eval_form(kind, z, terms) for kind in (SeriesKind.J, SeriesKind.GAMMA2, SeriesKind.GAMMA3))
        return equation_residual(equation, f, j, g2, g3)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        coarse = residual(1)
    fine = residual(30)
    assert coarse > 1e-6 > fine


def test_short_expansion_warns():
    with pytest.warns(ConvergenceWarning):
        evaluate_series(j_series(3), complex(0, 1.2))
