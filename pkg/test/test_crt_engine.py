from dataclasses import dataclass
from typing import Optional, Tuple

import pytest

from modeq.services import modular_forms
from modeq.services.crt_engine import (
    CrtEngine,
    InadmissiblePrime,
    NotConverged,
    crt_combine,
    crt_pair,
    is_admissible,
    run_modular,
    symmetric_lift,
)
from modeq.services.kiepert import KiepertTask
from modeq.services.normal_form import ModEqPoly, NormalPoly


@dataclass(frozen=True)
class FixedTask:
    """Reduces a fixed exact equation; stands in for a pipeline."""

    equation: ModEqPoly
    degree: int = 2
    excluded_primes: Tuple[int, ...] = (3,)

    def run(self, modulus: Optional[int] = None) -> ModEqPoly:
        return self.equation if modulus is None else self.equation.reduce(modulus)


def _equation(*constants):
    return ModEqPoly(len(constants) - 1, [NormalPoly.constant(c) for c in constants], label="test")


def test_crt_pair():
    assert crt_pair(3, 5, 3, 7) == (3, 35)
    assert crt_pair(4, 5, 2, 7) == (9, 35)
    assert crt_pair(4, 5, 5, 7) == (19, 35)


def test_symmetric_lift():
    assert symmetric_lift(3, 35) == 3
    assert symmetric_lift(19, 35) == -16
    assert symmetric_lift(17, 35) == 17
    assert symmetric_lift(-1, 35) == -1


def test_combine_two_residue_equations():
    exact = _equation(-16, 3, 1)

    combined = crt_combine([exact.reduce(5), exact.reduce(7)])
    assert combined == exact
    assert combined.label == "test"


def test_combine_needs_two_results():
    with pytest.raises(ValueError):
        crt_combine([_equation(1, 1).reduce(5)])


def test_combine_rejects_different_degrees():
    with pytest.raises(ValueError):
        crt_combine([_equation(1, 1).reduce(5), _equation(1, 1, 1).reduce(7)])


def test_admissibility():
    task = FixedTask(_equation(1, 0, 1))

    assert is_admissible(task, 5)
    assert not is_admissible(task, 3)
    assert not is_admissible(task, 2)
    assert not is_admissible(task, 9)
    with pytest.raises(InadmissiblePrime):
        run_modular(task, 3)


def test_kiepert_task_excludes_its_level():
    task = KiepertTask.for_prime(7)

    assert not is_admissible(task, 7)
    assert not is_admissible(task, 5)
    assert is_admissible(task, 11)


def test_engine_stops_once_stable():
    exact = ModEqPoly(2, [NormalPoly({(1, 0, 0): -12345678901234567890, (0, 0, 0): 7}),
                          NormalPoly.constant(-3), NormalPoly.constant(1)])
    engine = CrtEngine(prime_bits=20, window=2)

    result = engine.run(FixedTask(exact))
    assert result.converged
    assert result.equation == exact
    assert len(result.primes) == len(set(result.primes))
    assert all(p > 2 ** 19 for p in result.primes)


def test_engine_with_fixed_prime_count():
    exact = _equation(5, -3, 1)

    result = CrtEngine(prime_bits=16, primes=4).run(FixedTask(exact))
    assert len(result.primes) == 4
    assert result.equation == exact


def test_engine_gives_up_after_budget():
    exact = _equation(10 ** 60, 1)

    with pytest.raises(NotConverged):
        CrtEngine(prime_bits=16, budget=3, window=2).run(FixedTask(exact, degree=1))


def test_engine_with_worker_processes():
    exact = _equation(-16, 3, 1)

    result = CrtEngine(prime_bits=20, workers=2, window=2).run(FixedTask(exact))
    assert result.converged
    assert result.equation == exact


def test_modular_runs_drop_their_reduced_series():
    modular_forms.clear_cache()
    result = CrtEngine(prime_bits=20, window=2, workers=1).run(KiepertTask.for_prime(5))

    assert result.converged
    assert all(key[-1] is None for key in modular_forms._cache)
