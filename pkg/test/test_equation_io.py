from fractions import Fraction

from modeq.models.schemas import EngineKind, EquationRecord, FunctionFamily
from modeq.services.equation_io import (
    EquationCache,
    build_record,
    entries_to_equation,
    equation_to_entries,
    format_equation,
    format_normal_poly,
    parse_equation,
    record_to_equation,
)
from modeq.services.normal_form import ModEqPoly, NormalPoly

P5 = "X^6 + 10*X^3 - G2*X + 5"
P13_TAIL = "X^2 + (-J + 746)*X + 13"


def test_format_matches_printed_layout():
    assert format_equation(parse_equation(P5, "X")) == P5


def test_format_parenthesizes_multi_term_coefficients():
    assert format_equation(parse_equation("X^2 + (746 - J)*X + 13", "X")) == P13_TAIL


def test_format_orders_monomials_by_weight():
    poly = NormalPoly({(0, 0, 0): 5, (1, 0, 0): -2, (0, 2, 1): 3})

    assert format_normal_poly(poly) == "3*G3*G2^2 - 2*J + 5"
    assert format_normal_poly(NormalPoly()) == "0"


def test_format_of_mixed_monomials():
    equation = parse_equation("F^3 - G3*G2*F^2 + J^2*G2^2*F - 1")

    assert format_equation(equation) == "F^3 - G3*G2*F^2 + J^2*G2^2*F - 1"


def test_parse_reduces_gamma_powers():
    equation = parse_equation("F^2 + G2^3*F + G3^2")

    assert equation.coeffs[1] == NormalPoly({(1, 0, 0): 1})
    assert equation.coeffs[0] == NormalPoly({(1, 0, 0): 1, (0, 0, 0): -1728})


def test_parse_with_modulus():
    equation = parse_equation("F^2 - 3*F + 12", modulus=5)

    assert equation.modulus == 5
    assert equation.coeffs[0].constant_value() == 2
    assert equation.coeffs[1].constant_value() == 2


def test_parse_rational_coefficients():
    equation = parse_equation("F - 3/4")

    assert equation.coeffs[0].constant_value() == Fraction(-3, 4)


def test_text_and_json_forms_agree():
    equation = parse_equation("F^4 - G3*F^3 + (486 - G3^2)*F^2 - 9*G3*F - 27")

    from_text = parse_equation(format_equation(equation))
    from_json = entries_to_equation(equation_to_entries(equation))
    assert from_text == equation
    assert from_json == equation


def test_entries_skip_zero_coefficients():
    entries = equation_to_entries(parse_equation(P5, "X"))

    assert [entry.fdeg for entry in entries] == [6, 3, 1, 0]
    assert entries[2].terms[0].g2 == 1
    assert entries[2].terms[0].coeff == "-1"


def test_record_round_trip():
    equation = parse_equation(P5, "X")
    equation.label = "w_5^2"
    equation.primes = [1000003, 1000033]

    record = build_record(equation, FunctionFamily.WEBER, {"p": 5}, EngineKind.CRT)
    restored = EquationRecord.model_validate_json(record.model_dump_json())
    back = record_to_equation(restored)

    assert restored == record
    assert back == equation
    assert back.label == "w_5^2"
    assert back.variable == "X"
    assert back.primes == [1000003, 1000033]


def test_cache_store_and_load(tmp_path):
    cache = EquationCache(str(tmp_path))
    equation = parse_equation(P5, "X")
    equation.label = "w_5^2"
    record = build_record(equation, FunctionFamily.WEBER, {"p": 5})

    path = cache.store("weber_p5", record)
    assert path.exists()
    assert cache.load("weber_p5", EngineKind.DIRECT) == record
    assert cache.load("weber_p5", EngineKind.CRT) is None
    assert cache.load("weber_p7", EngineKind.DIRECT) is None


def test_cache_ignores_other_tool_versions(tmp_path):
    cache = EquationCache(str(tmp_path))
    record = build_record(ModEqPoly(1, [NormalPoly.constant(1), NormalPoly.constant(1)]), FunctionFamily.WEBER, {})
    stale = record.model_copy(update={"tool_version": "0.0.1"})
    cache.store("old", stale)

    assert cache.load("old", EngineKind.DIRECT) is None


def test_cache_ignores_unreadable_files(tmp_path):
    cache = EquationCache(str(tmp_path))
    cache.path_for("broken", EngineKind.DIRECT).write_text("{not json")

    assert cache.load("broken", EngineKind.DIRECT) is None


def test_cache_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MODEQ_CACHE", str(tmp_path / "env-cache"))

    assert EquationCache().directory == tmp_path / "env-cache"
