"""
Configuration management for modeq.
Handles environment variables and runtime settings.
"""

from functools import lru_cache
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings:
    """Runtime settings loaded from environment variables."""

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT: str = os.getenv("LOG_FORMAT", "text")  # "json" or "text"

    # Equation cache
    MODEQ_CACHE: str = os.getenv("MODEQ_CACHE", "./modeq-cache")

    # Precision
    TERMS_GUARD: int = int(os.getenv("TERMS_GUARD", "8"))
    MAX_KIEPERT_PRIME: int = int(os.getenv("MAX_KIEPERT_PRIME", "61"))

    # Multi-modular engine
    CRT_PRIME_BITS: int = int(os.getenv("CRT_PRIME_BITS", "31"))
    CRT_PRIME_BUDGET: int = int(os.getenv("CRT_PRIME_BUDGET", "64"))
    CRT_STABLE_WINDOW: int = int(os.getenv("CRT_STABLE_WINDOW", "2"))
    CRT_WORKERS: int = int(os.getenv("CRT_WORKERS", "1"))

    # Numeric oracle
    VERIFY_SAMPLES: int = int(os.getenv("VERIFY_SAMPLES", "10"))
    VERIFY_SEED: int = int(os.getenv("VERIFY_SEED", "20240601"))
    VERIFY_TOLERANCE: float = float(os.getenv("VERIFY_TOLERANCE", "1e-8"))
    VERIFY_MIN_IM: float = float(os.getenv("VERIFY_MIN_IM", "1.2"))
    VERIFY_MAX_IM: float = float(os.getenv("VERIFY_MAX_IM", "2.0"))
    NUMERIC_TERMS: int = int(os.getenv("NUMERIC_TERMS", "40"))


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
