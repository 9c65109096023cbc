from fractions import Fraction

import pytest

from modeq.models.schemas import EngineKind, SeriesKind
from modeq.services.equation_io import parse_equation
from modeq.services.kiepert import (
    KiepertTask,
    UnsupportedPrime,
    build_kiepert,
    kiepert_equation,
    reciprocal_root_series,
    required_terms,
    s_k_series,
    weber_label,
)
from modeq.services.normal_form import power_sums_to_monic
from modeq.services.numeric_verify import eval_form, equation_residual, kiepert_root, sample_points
from modeq.services.recognizer import RecognitionContext, recognize

WEBER_EQUATIONS = {
    5: "X^6 + 10*X^3 - G2*X + 5",
    7: "X^8 + 14*X^6 + 63*X^4 + 70*X^2 + G3*X - 7",
    11: "X^12 - 990*X^6 + 440*G2*X^4 + 165*G3*X^3 + 22*G2^2*X^2 + G3*G2*X - 11",
    13: (
        "X^14 + 26*X^13 + 325*X^12 + 2548*X^11 + 13832*X^10 + 54340*X^9 + 157118*X^8"
        " + 333580*X^7 + 509366*X^6 + 534820*X^5 + 354536*X^4 + 124852*X^3 + 15145*X^2"
        " + (746 - J)*X + 13"
    ),
}


@pytest.mark.parametrize("p", sorted(WEBER_EQUATIONS))
def test_weber_equations(p):
    equation = build_kiepert(p, samples=0)

    assert equation == parse_equation(WEBER_EQUATIONS[p], "X")
    assert equation.variable == "X"


@pytest.mark.parametrize("p, label", [(5, "w_5^2"), (7, "-w_7^2"), (11, "-w_11^2"), (13, "w_13^2")])
def test_oracle_picks_the_vanishing_sign(p, label):
    equation = build_kiepert(p)

    assert equation.label == label
    assert equation.verification.unique
    assert equation.verification.chosen_sign == equation.verification.predicted_sign


def test_newton_output_before_reversal_for_p11():
    task = KiepertTask.for_prime(11)
    context = RecognitionContext(task.terms)
    base = reciprocal_root_series(11, task.terms)
    power_sums = [recognize(base ** k, context=context).to_normal_poly() for k in range(1, 13)]

    reciprocal = power_sums_to_monic(power_sums, 12, variable="X")
    expected = parse_equation(
        "X^12 - G3*G2*X^11 - 242*G2^2*X^10 - 19965*G3*X^9 - 585640*G2*X^8"
        " + 159440490*X^6 - 285311670611",
        "X",
    )
    assert reciprocal.coeffs == expected.coeffs


def test_other_root_is_kiepert_root():
    # p (eta(pz)/eta(z))^2 is also a root
    equation = build_kiepert(7, samples=0)
    spec = kiepert_root(7)

    for point in sample_points(3, seed=7):
        x = 7 * spec.evaluate(point.z)
        j = eval_form(SeriesKind.J, point)
        g2 = eval_form(SeriesKind.GAMMA2, point)
        g3 = eval_form(SeriesKind.GAMMA3, point)
        assert equation_residual(equation, x, j, g2, g3) < 1e-8


def test_s_k_is_a_power_of_the_base_series():
    terms = required_terms(7)

    assert s_k_series(7, 3, terms) == reciprocal_root_series(7, terms) ** 3
    assert reciprocal_root_series(7, terms).valuation == Fraction(-1, 2)
    with pytest.raises(ValueError):
        s_k_series(7, 9, terms)


def test_required_terms():
    assert required_terms(11, guard=0) == 10
    assert required_terms(13, guard=3) == 17


def test_task_sign_and_label():
    assert KiepertTask.for_prime(5).sign == 1
    assert KiepertTask.for_prime(7).sign == -1
    assert KiepertTask.for_prime(11).label == "-w_11^2"
    assert weber_label(13, 1) == "w_13^2"


def test_modular_run_matches_exact_reduction():
    m = 1000003
    task = KiepertTask.for_prime(7)

    assert kiepert_equation(task, m) == kiepert_equation(task).reduce(m)


def test_crt_engine_matches_direct_for_p11():
    direct = build_kiepert(11, samples=0)
    via_crt = build_kiepert(11, engine=EngineKind.CRT, samples=0)

    assert via_crt == direct
    assert len(via_crt.primes) >= 3


@pytest.mark.parametrize("p", [2, 3, 4, 9])
def test_unsupported_primes(p):
    with pytest.raises(UnsupportedPrime):
        build_kiepert(p)


def test_prime_above_configured_bound(monkeypatch):
    from modeq.core.config import settings

    monkeypatch.setattr(settings, "MAX_KIEPERT_PRIME", 11)
    with pytest.raises(UnsupportedPrime):
        build_kiepert(13)
