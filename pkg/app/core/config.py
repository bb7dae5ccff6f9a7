"""
Application Configuration

This module contains all runtime settings for magsync.
Settings are loaded from environment variables and .env files.
Scenario parameters (inductor, clocks, sensors) are not settings: they live
in the scenario file.
"""

from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings configuration."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application Settings
    APP_NAME: str = Field("magsync", description="Application name")
    APP_VERSION: str = Field("1.0.0", description="Application version")
    APP_DESCRIPTION: str = Field(
        "Magnetic-field event-based time synchronisation for wireless IMU fleets",
        description="Application description",
    )

    # Logging Settings
    LOG_LEVEL: str = Field("WARNING")
    LOG_FORMAT: str = Field("console")
    LOG_FILE: Optional[str] = Field(None)
    LOG_RETENTION_DAYS: int = Field(30)

    # Estimator Settings
    HIT_NOISE_SIGMAS: float = Field(4.0)  # ε lower bound in units of noise σ
    HIT_FLUX_FRACTION: float = Field(0.02)  # ε lower bound as a fraction of K
    MIN_HITS: int = Field(3)
    RECOMMENDED_HITS: int = Field(20)
    INDEX_RESIDUAL_LIMIT: float = Field(0.25)  # drive periods
    MIN_BASELINE_SAMPLES: int = Field(50)
    BASELINE_SNR_MIN: float = Field(8.0)
    NEAR_SATURATION_TAUS: float = Field(4.9)

    # Alignment Settings
    ALIGN_SCALE_TOLERANCE: float = Field(1e-3)

    # Performance Settings
    EXPERIMENT_WORKERS: int = Field(1)

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of {allowed_levels}")
        return v.upper()

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate log format."""
        allowed_formats = ["json", "console"]
        if v.lower() not in allowed_formats:
            raise ValueError(f"Log format must be one of {allowed_formats}")
        return v.lower()

    @field_validator("HIT_FLUX_FRACTION")
    @classmethod
    def validate_flux_fraction(cls, v: float) -> float:
        """Validate the flux fraction used for the hit threshold."""
        if not 0 < v < 0.5:
            raise ValueError("Hit flux fraction must be between 0 and 0.5")
        return v

    @field_validator(
        "HIT_NOISE_SIGMAS",
        "BASELINE_SNR_MIN",
        "NEAR_SATURATION_TAUS",
        "INDEX_RESIDUAL_LIMIT",
        "ALIGN_SCALE_TOLERANCE",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Validate strictly positive thresholds."""
        if v <= 0:
            raise ValueError("Threshold must be positive")
        return v

    @field_validator("MIN_HITS")
    @classmethod
    def validate_min_hits(cls, v: int) -> int:
        """A first-order fit with R² needs at least three points."""
        if v < 3:
            raise ValueError("MIN_HITS must be at least 3")
        return v

    @field_validator("EXPERIMENT_WORKERS", "MIN_BASELINE_SAMPLES", "RECOMMENDED_HITS")
    @classmethod
    def validate_count(cls, v: int) -> int:
        """Validate positive counts."""
        if v < 1:
            raise ValueError("Count must be at least 1")
        return v


# Global settings instance
settings = Settings()
