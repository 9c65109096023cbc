"""
Data models for modeq.
Pydantic models for the equation cache, JSON output and oracle reports.
"""

from datetime import datetime
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field


# ============================================================================
# Enums
# ============================================================================


class EngineKind(str, Enum):
    """Which arithmetic engine produced an equation."""
    DIRECT = "direct"
    CRT = "crt"


class FunctionFamily(str, Enum):
    """Family of the function whose modular equation is computed."""
    WEBER = "weber"
    DOUBLE_ETA = "double_eta"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class SeriesKind(str, Enum):
    """q-expansions the CLI `series` command can print."""
    ETA = "eta"
    E4 = "e4"
    E6 = "e6"
    DELTA = "delta"
    J = "j"
    GAMMA2 = "gamma2"
    GAMMA3 = "gamma3"
    C12 = "c12"
    WEBER = "weber"
    DOUBLE_ETA = "w"


# ============================================================================
# Equation Models
# ============================================================================


class MonomialTerm(BaseModel):
    """One monomial coeff * J^jdeg * G2^g2 * G3^g3 in normal form."""
    jdeg: int = Field(..., ge=0, description="Power of J")
    g2: int = Field(..., ge=0, le=2, description="Power of G2 (normal form keeps it below 3)")
    g3: int = Field(..., ge=0, le=1, description="Power of G3 (normal form keeps it below 2)")
    coeff: str = Field(..., description="Exact coefficient as a decimal (or a/b) string")


class CoefficientEntry(BaseModel):
    """Coefficient of F^fdeg."""
    fdeg: int = Field(..., ge=0)
    terms: list[MonomialTerm]


# ============================================================================
# Verification Models
# ============================================================================


class SignCheck(BaseModel):
    """Worst relative residual for one sign variant of the function."""
    sign: int = Field(..., description="+1 or -1")
    max_residual: float


class VerificationReport(BaseModel):
    """Outcome of the floating-point oracle."""
    samples: int = Field(..., ge=1)
    seed: int
    tolerance: float
    checks: list[SignCheck]
    chosen_sign: int = Field(..., description="Sign variant that vanished")
    predicted_sign: int = Field(..., description="Sign predicted by theory")
    unique: bool = Field(..., description="Exactly one sign variant vanished")


class SeriesIdentityReport(BaseModel):
    """Relative defects of the classical identities at one point."""
    z: str
    gamma2_cubed_minus_j: float
    gamma3_squared_minus_j_1728: float
    j_at_i_minus_1728: float


# ============================================================================
# Cache Record
# ============================================================================


class EquationRecord(BaseModel):
    """A computed modular equation together with its provenance."""
    label: str = Field(..., description="Function label, e.g. w_{3,7}^1")
    family: FunctionFamily
    sign: int = Field(..., description="Sign of the function the equation vanishes at")
    predicted_sign: int
    params: dict[str, Any] = Field(default={}, description="Prime(s) and derived parameters")
    variable: str = Field(default="F", description="Name of the function variable")
    equation: list[CoefficientEntry]
    verification: Optional[VerificationReport] = None
    engine: EngineKind = EngineKind.DIRECT
    primes: list[int] = Field(default=[], description="Primes used by the CRT engine")
    tool_version: str
    timestamp: datetime
