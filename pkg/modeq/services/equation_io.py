"""
Equation Rendering and Cache
Text and JSON forms of ModEqPoly, a sympy-based parser for the text form,
and the on-disk EquationRecord cache.
"""

from __future__ import annotations

import logging
import os
import re
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from modeq import __version__
from modeq.core.config import settings
from modeq.models.schemas import (
    CoefficientEntry,
    EngineKind,
    EquationRecord,
    FunctionFamily,
    MonomialTerm,
    VerificationReport,
)
from modeq.services.normal_form import ModEqPoly, Monomial, Number, NormalPoly

logger = logging.getLogger(__name__)


# ============================================================================
# Text form
# ============================================================================


def _monomial_text(key: Monomial) -> str:
    jdeg, g2, g3 = key
    parts = []
    if jdeg:
        parts.append("J" if jdeg == 1 else f"J^{jdeg}")
    if g3:
        parts.append("G3")
    if g2:
        parts.append("G2" if g2 == 1 else f"G2^{g2}")
    return "*".join(parts)


def _term_text(coeff: Number, monomial: str) -> str:
    magnitude = abs(coeff)
    if not monomial:
        return str(magnitude)
    return monomial if magnitude == 1 else f"{magnitude}*{monomial}"


def format_normal_poly(poly: NormalPoly) -> str:
    """e.g. -J + 746, G3*G2^2 or 0."""
    pieces: List[str] = []
    for key, coeff in poly.items():
        body = _term_text(coeff, _monomial_text(key))
        if not pieces:
            pieces.append(f"-{body}" if coeff < 0 else body)
        else:
            pieces.append(f"- {body}" if coeff < 0 else f"+ {body}")
    return " ".join(pieces) or "0"


def format_equation(equation: ModEqPoly) -> str:
    """Descending powers of the variable, e.g. X^6 + 10*X^3 - G2*X + 5."""
    var = equation.variable
    pieces: List[str] = []
    for d in range(equation.fdeg, -1, -1):
        coeff = equation.coeffs[d]
        if coeff.is_zero():
            continue
        power = "" if d == 0 else (var if d == 1 else f"{var}^{d}")
        items = list(coeff.items())
        if len(items) == 1:
            key, c = items[0]
            monomial = "*".join(part for part in (_monomial_text(key), power) if part)
            body = _term_text(c, monomial)
            negative = c < 0
        else:
            inner = format_normal_poly(coeff)
            body = f"({inner})*{power}" if power else f"({inner})"
            negative = False
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces) or "0"


def _to_number(value: sympy.Expr) -> Number:
    value = sympy.nsimplify(value)
    if value.is_Integer:
        return int(value)
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    raise ValueError(f"Coefficient {value} is not rational")


def parse_equation(text: str, variable: str = "F", modulus: Optional[int] = None) -> ModEqPoly:
    """
    Parse the text form (any arrangement sympy understands) back to normal form.

    G2^3 and G3^2 are reduced with the defining relations.
    """
    symbols = {name: sympy.Symbol(name) for name in (variable, "J", "G2", "G3")}
    expr = parse_expr(
        text,
        local_dict=symbols,
        transformations=standard_transformations + (convert_xor,),
    )
    poly = sympy.Poly(sympy.expand(expr), symbols[variable], symbols["J"], symbols["G2"], symbols["G3"])
    fdeg = poly.degree(symbols[variable])
    if fdeg < 0:
        fdeg = 0
    coeffs = [NormalPoly(None, modulus) for _ in range(fdeg + 1)]
    for (d, jdeg, g2, g3), c in poly.terms():
        coeffs[d] = coeffs[d] + NormalPoly.monomial(jdeg, g2, g3, _to_number(c), modulus)
    return ModEqPoly(fdeg, coeffs, variable=variable, modulus=modulus)


# ============================================================================
# JSON form
# ============================================================================


def equation_to_entries(equation: ModEqPoly) -> List[CoefficientEntry]:
    """[{fdeg, terms: [{jdeg, g2, g3, coeff}]}] for nonzero coefficients, highest F first."""
    return [
        CoefficientEntry(
            fdeg=d,
            terms=[
                MonomialTerm(jdeg=jdeg, g2=g2, g3=g3, coeff=str(c))
                for (jdeg, g2, g3), c in equation.coeffs[d].items()
            ],
        )
        for d in range(equation.fdeg, -1, -1)
        if not equation.coeffs[d].is_zero()
    ]


def entries_to_equation(entries: List[CoefficientEntry], variable: str = "F") -> ModEqPoly:
    fdeg = max((entry.fdeg for entry in entries), default=0)
    coeffs = [NormalPoly() for _ in range(fdeg + 1)]
    for entry in entries:
        terms: Dict[Monomial, Number] = {
            (t.jdeg, t.g2, t.g3): Fraction(t.coeff) for t in entry.terms
        }
        coeffs[entry.fdeg] = coeffs[entry.fdeg] + NormalPoly(terms)
    return ModEqPoly(fdeg, coeffs, variable=variable)


def build_record(
    equation: ModEqPoly,
    family: FunctionFamily,
    params: Dict,
    engine: EngineKind = EngineKind.DIRECT,
) -> EquationRecord:
    verification = equation.verification
    if verification is not None and not isinstance(verification, VerificationReport):
        verification = VerificationReport.model_validate(verification)
    return EquationRecord(
        label=equation.label,
        family=family,
        sign=equation.sign,
        predicted_sign=equation.predicted_sign,
        params=params,
        variable=equation.variable,
        equation=equation_to_entries(equation),
        verification=verification,
        engine=engine,
        primes=list(equation.primes),
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc),
    )


def record_to_equation(record: EquationRecord) -> ModEqPoly:
    equation = entries_to_equation(record.equation, record.variable)
    equation.label = record.label
    equation.sign = record.sign
    equation.predicted_sign = record.predicted_sign
    equation.verification = record.verification
    equation.primes = list(record.primes)
    return equation


# ============================================================================
# Cache
# ============================================================================


class EquationCache:
    """
    Directory of EquationRecord JSON files, one per (key, engine).

    The directory comes from the argument, else MODEQ_CACHE, else ./modeq-cache.
    """

    def __init__(self, directory: Optional[str] = None):
        self.directory = Path(directory or os.getenv("MODEQ_CACHE") or settings.MODEQ_CACHE)

    def path_for(self, key: str, engine: EngineKind) -> Path:
        safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", key)
        return self.directory / f"{safe}.{EngineKind(engine).value}.json"

    def load(self, key: str, engine: EngineKind) -> Optional[EquationRecord]:
        """Cached record for key, or None when missing, unreadable or from another tool version."""
        path = self.path_for(key, engine)
        if not path.exists():
            return None
        try:
            record = EquationRecord.model_validate_json(path.read_text())
        except ValueError as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            return None
        if record.tool_version != __version__ or record.engine != EngineKind(engine):
            logger.info(f"Cache entry {path} is stale (version {record.tool_version})")
            return None
        logger.info(f"Cache hit: {path}")
        return record

    def store(self, key: str, record: EquationRecord) -> Path:
        path = self.path_for(key, record.engine)
        self.directory.mkdir(parents=True, exist_ok=True)
        path.write_text(record.model_dump_json(indent=2))
        logger.info(f"Cached {record.label} at {path}")
        return path
