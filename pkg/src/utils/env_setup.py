import os
import logging
from typing import Optional

from dotenv import load_dotenv, find_dotenv
from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger('env_setup')

ENV_PREFIX = "QMR_"


class Settings(BaseModel):
    """
    Runtime configuration. Every field can be overridden by an environment
    variable named QMR_<FIELD> (for example QMR_SEARCH_BOUND=30), usually
    through a .env file next to the project root.
    """
    search_bound: int = Field(20, ge=0, description="Coefficient box for the cubic norm search")
    seed: int = Field(0, description="Seed for randomized search orders")
    log_level: str = Field("WARNING", description="Root logging level")
    conjugator_bound: int = Field(3, ge=1, description="Entry bound for GL2(Z) conjugator search")
    cache_size: int = Field(4096, ge=1, description="Entries per symbol cache")
    workers: int = Field(4, ge=1, description="Threads used by batch decide")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return level


def setup_env_file() -> Optional[str]:
    """
    Load the nearest .env file (searching upwards from the working
    directory) into the process environment. Existing variables win.
    """
    env_file = find_dotenv(usecwd=True)
    if not env_file:
        logger.debug("No .env file found; using process environment only")
        return None
    load_dotenv(env_file, override=False)
    logger.info(f"Loaded environment from {env_file}")
    return env_file


def load_settings(**overrides) -> Settings:
    """
    Build Settings from QMR_* environment variables, then apply explicit
    overrides (CLI flags). Overrides equal to None are ignored.
    """
    values = {}
    for name in Settings.model_fields:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is not None and raw != "":
            values[name] = raw
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)
