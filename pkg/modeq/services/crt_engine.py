"""
Multi-Modular Engine
Runs a pipeline over Z/mZ for a stream of word-size primes and rebuilds the
integer equation by Chinese remaindering with a symmetric lift.
"""

from __future__ import annotations

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Protocol, Sequence, Tuple

from sympy import isprime, nextprime

from modeq.core.config import settings
from modeq.core.errors import ModEqError
from modeq.services.modular_forms import clear_cache
from modeq.services.normal_form import ModEqPoly, Monomial, NormalPoly

logger = logging.getLogger(__name__)


class InadmissiblePrime(ModEqError):
    """The prime divides a Newton divisor or the level of the function."""
    pass


class NotConverged(ModEqError):
    """The prime budget ran out before the reconstruction stabilized."""
    pass


class ModularTask(Protocol):
    """A pipeline that can be run over Z/mZ (KiepertTask, DoubleEtaTask)."""

    @property
    def degree(self) -> int: ...

    @property
    def excluded_primes(self) -> Tuple[int, ...]: ...

    def run(self, modulus: Optional[int] = None) -> ModEqPoly: ...


@dataclass
class CrtPlan:
    """Primes used so far and the stop-when-stable window."""
    primes: List[int] = field(default_factory=list)
    window: int = 2


@dataclass
class CrtResult:
    equation: ModEqPoly
    primes: List[int]
    converged: bool


def is_admissible(task: ModularTask, prime: int) -> bool:
    return isprime(prime) and prime > task.degree and prime not in task.excluded_primes


def run_modular(task: ModularTask, prime: int) -> ModEqPoly:
    """
    Run the pipeline with every series reduced mod prime.

    Raises:
        InadmissiblePrime: prime not above the degree or equal to a level prime
    """
    if not is_admissible(task, prime):
        raise InadmissiblePrime(
            f"Prime {prime} must exceed {task.degree} and avoid {task.excluded_primes}"
        )
    try:
        return task.run(prime)
    finally:
        clear_cache(prime)


def _inv_mod(a: int, m: int) -> int:
    return pow(a % m, -1, m)


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> Tuple[int, int]:
    """x = a1 mod m1 and x = a2 mod m2 (coprime moduli) -> (x mod m1 m2, m1 m2)."""
    t = ((a2 - a1) % m2) * _inv_mod(m1, m2) % m2
    m = m1 * m2
    return (a1 + m1 * t) % m, m


def symmetric_lift(x: int, m: int) -> int:
    """Representative of x mod m in (-m/2, m/2]."""
    x %= m
    return x - m if 2 * x > m else x


class _Accumulator:
    """Coefficientwise CRT fold over results sharing one F-degree."""

    def __init__(self):
        self.residues: Dict[Tuple[int, Monomial], int] = {}
        self.modulus = 1
        self.template: Optional[ModEqPoly] = None

    def add(self, result: ModEqPoly) -> None:
        if result.modulus is None:
            raise ValueError("Only residue results can be combined")
        if self.template is not None and result.fdeg != self.template.fdeg:
            raise ValueError(f"F-degrees differ: {self.template.fdeg} vs {result.fdeg}")
        incoming = {(d, key): c for d, key, c in result.monomials()}
        m2 = result.modulus
        for key in set(self.residues) | set(incoming):
            a, _ = crt_pair(self.residues.get(key, 0), self.modulus, incoming.get(key, 0), m2)
            self.residues[key] = a
        self.modulus *= m2
        self.template = self.template or result

    def lift(self) -> ModEqPoly:
        fdeg = self.template.fdeg
        grouped: List[Dict[Monomial, int]] = [{} for _ in range(fdeg + 1)]
        for (d, key), a in self.residues.items():
            value = symmetric_lift(a, self.modulus)
            if value:
                grouped[d][key] = value
        return ModEqPoly(
            fdeg,
            [NormalPoly(terms) for terms in grouped],
            label=self.template.label,
            variable=self.template.variable,
            sign=self.template.sign,
            predicted_sign=self.template.predicted_sign,
        )


def crt_combine(results: Sequence[ModEqPoly]) -> ModEqPoly:
    """Combine residue equations for distinct primes into the symmetric integer lift."""
    if len(results) < 2:
        raise ValueError("CRT combination needs at least two results")
    accumulator = _Accumulator()
    for result in results:
        accumulator.add(result)
    return accumulator.lift()


class CrtEngine:
    """
    Drives run_modular over admissible primes until the lift is stable.

    Args:
        prime_bits: primes are drawn upward from 2^(prime_bits - 1)
        budget: maximum number of primes
        window: consecutive unchanged lifts required to stop
        workers: process count; 1 runs inline
        primes: fixed number of primes to use instead of the stability rule
    """

    def __init__(
        self,
        prime_bits: Optional[int] = None,
        budget: Optional[int] = None,
        window: Optional[int] = None,
        workers: Optional[int] = None,
        primes: Optional[int] = None,
    ):
        self.prime_bits = prime_bits or settings.CRT_PRIME_BITS
        self.budget = budget or settings.CRT_PRIME_BUDGET
        self.window = window or settings.CRT_STABLE_WINDOW
        self.workers = max(1, workers or settings.CRT_WORKERS)
        self.fixed_primes = primes

    def prime_stream(self, task: ModularTask) -> Iterator[int]:
        prime = nextprime(2 ** (self.prime_bits - 1))
        while True:
            if is_admissible(task, prime):
                yield int(prime)
            prime = nextprime(prime)

    def run(self, task: ModularTask) -> CrtResult:
        return asyncio.run(self.run_async(task))

    async def run_async(self, task: ModularTask) -> CrtResult:
        limit = self.fixed_primes or self.budget
        plan = CrtPlan(window=self.window)
        accumulator = _Accumulator()
        previous: Optional[ModEqPoly] = None
        stable = 0
        stream = self.prime_stream(task)
        loop = asyncio.get_running_loop()
        pool = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        try:
            while len(plan.primes) < limit:
                batch = [next(stream) for _ in range(min(self.workers, limit - len(plan.primes)))]
                if pool is None:
                    results = [run_modular(task, prime) for prime in batch]
                else:
                    results = await asyncio.gather(*[
                        loop.run_in_executor(pool, run_modular, task, prime)
                        for prime in batch
                    ])
                for prime, result in zip(batch, results):
                    accumulator.add(result)
                    plan.primes.append(prime)
                    current = accumulator.lift()
                    stable = stable + 1 if current == previous else 0
                    previous = current
                    logger.info(f"CRT prime {len(plan.primes)}/{limit}: {prime} (stable for {stable})")
                    if self.fixed_primes is None and stable >= plan.window:
                        return CrtResult(current, plan.primes, True)
        finally:
            if pool is not None:
                pool.shutdown()

        if self.fixed_primes is not None:
            return CrtResult(previous, plan.primes, stable >= plan.window)
        raise NotConverged(f"No stable lift after {len(plan.primes)} primes")
