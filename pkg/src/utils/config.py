"""
Process-level configuration read from the environment
"""

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Settings that do not belong to a single experiment.

    Every field can be overridden with a ``PMEWAVE_`` prefixed environment
    variable, e.g. ``PMEWAVE_LOG_LEVEL=DEBUG``.
    """

    model_config = SettingsConfigDict(
        env_prefix="PMEWAVE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    environment: str = Field(default="development")
    log_level: str = Field(default="INFO")
    log_file: Optional[str] = Field(default=None)
    json_logs: bool = Field(default=False)
    output_dir: str = Field(default="runs")
    debug: bool = Field(default=False)
    progress_fraction: float = Field(default=0.1, gt=0.0, le=1.0)

    @field_validator("log_level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        valid_levels = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator("environment")
    @classmethod
    def validate_environment(cls, v: str) -> str:
        if v not in ("development", "testing", "production"):
            raise ValueError("Environment must be one of: development, testing, production")
        return v

    def ensure_output_dir(self, directory: Optional[str] = None) -> Path:
        """Create and return the artifact directory"""
        path = Path(directory or self.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path


@lru_cache()
def get_settings() -> RuntimeSettings:
    """Get cached settings instance"""
    return RuntimeSettings()
