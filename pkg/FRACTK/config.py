"""
FracTK — Central Configuration
Loads all settings from environment variables via pydantic-settings.
"""
from functools import lru_cache

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    # Application
    app_name: str = "FracTK"
    log_level: str = Field(default="WARNING", alias="FRACTK_LOG_LEVEL")

    # Parallel scans
    threads: int = Field(default=4, ge=1, alias="FRACTK_THREADS")
    chunk_rows: int = Field(default=1 << 16, ge=256, alias="FRACTK_CHUNK")

    # Numerics
    eps: float = Field(default=1e-9, gt=0.0, alias="FRACTK_EPS")
    extended_precision: bool = Field(default=False, alias="FRACTK_EXTENDED_PRECISION")
    max_segments: int = Field(default=4 * 8 ** 7, ge=1, alias="FRACTK_MAX_SEGMENTS")

    # Sampling (seeded generator named by its numpy bit-generator class)
    seed: int = Field(default=0, alias="FRACTK_SEED")
    rng_algorithm: str = Field(default="PCG64", alias="FRACTK_RNG")

    # Witness search
    witness_lattice: int = Field(default=16, ge=2, alias="FRACTK_WITNESS_LATTICE")
    witness_sides: int = Field(default=3, ge=1, alias="FRACTK_WITNESS_SIDES")
    collar_grid: int = Field(default=7, ge=2, alias="FRACTK_COLLAR_GRID")
    ball_depth: int = Field(default=6, ge=1, alias="FRACTK_BALL_DEPTH")

    @property
    def float_dtype(self) -> type:
        return np.longdouble if self.extended_precision else np.float64


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
