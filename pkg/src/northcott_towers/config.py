"""Configuration management for tower construction and verification."""

from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from typing import Any, Iterator, Optional

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .logging_config import get_logger

logger = get_logger(__name__)


class Environment(str, Enum):
    """Application environment enum."""

    DEVELOPMENT = "development"
    PRODUCTION = "production"


class LogLevel(str, Enum):
    """Valid log levels."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class OrderingMode(str, Enum):
    """How strictly consecutive tower steps must separate their primes."""

    WEAK = "weak"
    STRICT = "strict"


class Settings(BaseSettings):
    """Configuration settings for the northcott toolkit."""

    # --- General Settings ---
    ENVIRONMENT: str = Field(
        default=Environment.DEVELOPMENT.value,
        description="Application environment (development, production).",
    )
    LOG_LEVEL: Optional[str] = Field(
        default=None,
        validate_default=True,
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).",
    )

    # --- Numerics ---
    NORTHCOTT_TOL: float = Field(default=1e-9, description="Default enclosure width target.")
    NORTHCOTT_PRECISION_BITS: int = Field(default=96, description="Starting working precision in bits.")
    NORTHCOTT_PRECISION_CEILING: int = Field(
        default=2048, description="Working precision is doubled on failure up to this many bits."
    )

    # --- Construction ---
    NORTHCOTT_ORDERING: str = Field(default=OrderingMode.WEAK.value, description="Tower ordering mode (weak, strict).")
    NORTHCOTT_SEARCH_SPAN: int = Field(
        default=1_000_000, description="Maximum candidates a widened prime scan may inspect."
    )
    NORTHCOTT_SKIP_EXHAUSTED: bool = Field(
        default=False, description="Skip degrees whose prime window is empty instead of failing."
    )

    # --- Oracles and property suites ---
    NORTHCOTT_ENUMERATION_CAP: int = Field(default=10_000_000, description="Refuse enumerations larger than this.")
    NORTHCOTT_THREADS: int = Field(default=1, description="Worker threads for property suites.")
    NORTHCOTT_SEED: int = Field(default=0, description="Default seed for property suites.")

    # Load from environment variables ONLY.
    model_config = SettingsConfigDict(
        env_file=None,
        case_sensitive=True,
        extra="ignore",
    )

    @field_validator("ENVIRONMENT")
    def validate_environment(cls, v: str) -> str:
        """Validate environment value."""
        try:
            return Environment(v.lower()).value
        except ValueError:
            logger.warning(
                f"Invalid ENVIRONMENT value '{v}'. Defaulting to 'development'. "
                f"Valid values: {', '.join([e.value for e in Environment])}"
            )
            return Environment.DEVELOPMENT.value

    @field_validator("LOG_LEVEL", mode="before")
    def set_log_level_based_on_env(cls, v: Optional[str], values: Any) -> str:
        """Set default LOG_LEVEL based on ENVIRONMENT if not explicitly set."""
        env = values.data.get("ENVIRONMENT", Environment.DEVELOPMENT.value)
        if v is None:
            if env == Environment.DEVELOPMENT.value:
                return LogLevel.DEBUG.value
            return LogLevel.INFO.value
        return v

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        """Validate that the log level is one of the allowed values."""
        try:
            return LogLevel[v.upper()].value
        except KeyError:
            logger.warning(
                f"Invalid LOG_LEVEL '{v}'. Defaulting to INFO. Valid values: {', '.join(LogLevel.__members__)}"
            )
            return LogLevel.INFO.value

    @field_validator("NORTHCOTT_TOL")
    def validate_tol(cls, v: float) -> float:
        """Validate the default tolerance."""
        if not 0.0 < v < 1.0:
            raise ValueError("Tolerance must lie strictly between 0 and 1")
        return v

    @field_validator("NORTHCOTT_PRECISION_BITS")
    def validate_precision(cls, v: int) -> int:
        """Validate the starting precision."""
        if not 53 <= v <= 4096:
            raise ValueError("Precision must be between 53 and 4096 bits")
        return v

    @field_validator("NORTHCOTT_ORDERING")
    def validate_ordering(cls, v: str) -> str:
        """Validate the ordering mode."""
        try:
            return OrderingMode(v.lower()).value
        except ValueError:
            raise ValueError(f"Ordering must be one of: {', '.join(m.value for m in OrderingMode)}")

    @field_validator("NORTHCOTT_ENUMERATION_CAP", "NORTHCOTT_SEARCH_SPAN", "NORTHCOTT_THREADS")
    def validate_positive(cls, v: int) -> int:
        """Validate counts that must be positive."""
        if v < 1:
            raise ValueError("Value must be a positive integer")
        return v

    @property
    def tolerance(self) -> Fraction:
        """NORTHCOTT_TOL as the exact decimal it was written as."""
        return Fraction(str(self.NORTHCOTT_TOL))

    @model_validator(mode="after")
    def validate_ceiling(self) -> "Settings":
        """The precision ceiling may not sit below the starting precision."""
        if self.NORTHCOTT_PRECISION_CEILING < self.NORTHCOTT_PRECISION_BITS:
            raise ValueError("NORTHCOTT_PRECISION_CEILING must be at least NORTHCOTT_PRECISION_BITS")
        return self


# Create global instance directly - reads from environment variables
try:
    settings = Settings()
except ValidationError as e:
    logger.critical(f"Configuration validation failed:\n{e}")
    raise RuntimeError(f"Configuration validation failed: {e}") from e


@contextmanager
def overridden(**values: Any) -> Iterator[Settings]:
    """Temporarily replace settings fields (validated), restoring them on exit."""
    checked = Settings(**{**settings.model_dump(), **values})
    saved = {name: getattr(settings, name) for name in values}
    for name in values:
        setattr(settings, name, getattr(checked, name))
    try:
        yield settings
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)
