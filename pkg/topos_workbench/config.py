import os
from dataclasses import dataclass
from functools import lru_cache

from .constants import (
    DEFAULT_BUDGET,
    DEFAULT_LOG_LEVEL,
    DEFAULT_MAX_ALGEBRA,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TABULATION_LIMIT,
)

TRUTHY = {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    budget: int = DEFAULT_BUDGET
    verify: bool = False
    max_algebra: int = DEFAULT_MAX_ALGEBRA
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tabulation_limit: int = DEFAULT_TABULATION_LIMIT
    log_level: str = DEFAULT_LOG_LEVEL


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def load_settings() -> Settings:
    """Read settings from the environment (and whatever `.env` put there)."""
    return Settings(
        budget=_int_env("TOPOS_BUDGET", DEFAULT_BUDGET),
        verify=os.getenv("TOPOS_VERIFY", "").strip().lower() in TRUTHY,
        max_algebra=_int_env("TOPOS_MAX_ALGEBRA", DEFAULT_MAX_ALGEBRA),
        samples=_int_env("TOPOS_SAMPLES", DEFAULT_SAMPLES),
        seed=_int_env("TOPOS_SEED", DEFAULT_SEED),
        tabulation_limit=_int_env("TOPOS_TABULATION_LIMIT", DEFAULT_TABULATION_LIMIT),
        log_level=os.getenv("TOPOS_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper(),
    )


@lru_cache(maxsize=None)
def get_settings() -> Settings:
    return load_settings()
