import os
import sys
from functools import lru_cache
from typing import Any, TextIO

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from spinlab.constants import DEFAULT_WORKERS, FULL_CHECK_MAX_SPINS, MAX_FULL_SPINS

LOG_FORMAT = "{time:YYYY-MM-DD at HH:mm:ss} | {level} | {message}"

# LabConfig field -> environment variable
ENV_VARS = {
    "max_full_spins": "SPINLAB_MAX_FULL_SPINS",
    "full_check_max_spins": "SPINLAB_FULL_CHECK_LIMIT",
    "workers": "SPINLAB_WORKERS",
    "log_level": "SPINLAB_LOG_LEVEL",
}


class LabConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_full_spins: int = Field(MAX_FULL_SPINS, ge=2, description="largest N for which a dense 2^N matrix is built")
    full_check_max_spins: int = Field(
        FULL_CHECK_MAX_SPINS, ge=2, description="largest N for which designs are cross-checked in the full space"
    )
    workers: int = Field(DEFAULT_WORKERS, ge=1, description="threads used by batch sweeps")
    log_level: str = Field("WARNING", description="loguru level for the cli sink")

    @field_validator("log_level", mode="before")
    def validate_log_level(cls, value: Any) -> str:
        level = str(value).upper()
        try:
            logger.level(level)
        except ValueError:
            raise ValueError(f"Invalid log level: {value}")  # noqa: B904
        return level

    @classmethod
    def from_env(cls, dotenv: bool = True) -> "LabConfig":
        """Build a config from SPINLAB_* environment variables, reading a .env file first when present."""
        if dotenv:
            load_dotenv()
        values = {field: os.getenv(var) for field, var in ENV_VARS.items() if os.getenv(var) is not None}
        return cls(**values)


@lru_cache(maxsize=1)
def get_config() -> LabConfig:
    return LabConfig.from_env()


def configure_logging(level: str = "WARNING", sink: TextIO | None = None) -> None:
    logger.remove()
    logger.add(sink or sys.stderr, level=level, format=LOG_FORMAT, backtrace=False, diagnose=False)
