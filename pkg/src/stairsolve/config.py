import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_threads() -> int:
    return os.cpu_count() or 1


class Config(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="STAIRSOLVE_",
        extra="ignore",
    )

    threads: int = Field(default_factory=_default_threads, ge=1)
    block_size: int = Field(default=256, ge=1)
    tol: float = Field(default=1.0e-9, gt=0)
    maxit: int = Field(default=10000, ge=1)
    seed: int = Field(default=0, ge=0)
    dense_limit: int = Field(default=4096, ge=1)
    log_level: str = Field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))
