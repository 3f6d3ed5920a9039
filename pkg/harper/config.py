from pathlib import Path
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings, read from HARPER_* environment variables or a .env file"""

    model_config = SettingsConfigDict(env_prefix="HARPER_", env_file=".env", extra="ignore")

    # Parallelism
    threads: int = Field(default=1, ge=1)

    # Logging
    log_level: str = "INFO"

    # Output
    output_dir: Path = Path(".")

    # Simulation
    simulation_time_cap: float = Field(default=1e6, gt=0)
    simulation_chunk_size: int = Field(default=4096, ge=1)  # fixed, part of the seed contract

    # Guards
    brute_force_max_order: int = 100_000
    figure_max_n: int = 10_000

    # Numerics
    quantile_grid_points: int = Field(default=10_000, ge=100)
    hermitian_tolerance: float = 1e-12


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
