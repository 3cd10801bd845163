from functools import lru_cache

from pydantic import ConfigDict, Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Solver settings"""

    # Radial grid
    POINTS_PER_BAND: int = Field(128, ge=16, le=4096)
    UV_CUTOFF_FACTOR: float = Field(8.0, ge=2.0, le=64.0)
    CLUSTERING_SCALE: float = Field(1.0, gt=0.0, le=100.0)
    GRID_PANEL_ORDER: int = Field(8, ge=4, le=32)

    # Angular projection
    ANGULAR_ORDER: int = Field(64, ge=8, le=1024)
    ANGULAR_TOL: float = Field(1e-9, gt=0.0, lt=1e-3)
    ANGULAR_MAX_ORDER: int = Field(1024, ge=64, le=8192)

    # Critical temperature, in units of max chemical potential
    T_FLOOR: float = Field(1e-9, gt=0.0, lt=1e-2)
    T_CEILING_FACTOR: float = Field(10.0, gt=1.0, le=1000.0)
    BISECT_TOL: float = Field(1e-6, gt=0.0, lt=1e-1)
    EIG_TOL: float = Field(1e-9, gt=0.0, lt=1e-3)
    TC_MAX_CHANNEL: int = Field(8, ge=0, le=64)

    # Fermi-surface operator
    L_MAX: int = Field(16, ge=0, le=256)
    TRACE_L_MAX: int = Field(32, ge=0, le=512)
    DEGENERACY_TOL: float = Field(1e-10, ge=0.0, lt=1e-2)

    # Inter-band thresholds
    KAPPA_SCAN_START: float = Field(0.01, gt=0.0, le=1.0)
    KAPPA_SCAN_MAX: float = Field(10.0, gt=0.0, le=1e4)
    KAPPA_CROSSING_TOL: float = Field(1e-7, gt=0.0, lt=1e-2)

    # Gap equation
    GAP_TOL: float = Field(1e-10, gt=0.0, lt=1e-2)
    GAP_DAMPING: float = Field(0.5, gt=0.0, le=1.0)
    GAP_MAX_ITER: int = Field(2000, ge=10, le=10**6)
    ANDERSON_DEPTH: int = Field(3, ge=0, le=20)
    GAP_RESTARTS: int = Field(2, ge=0, le=10)
    GAP_TRIVIAL_TOL: float = Field(1e-7, gt=0.0, lt=1e-1)  # relative to T

    # Asymptotics
    LAMBDA_REF: float = Field(0.4, gt=0.0, le=10.0)
    FIT_MIN_RECORDS: int = Field(5, ge=2, le=1000)

    BCS_NUM_WORKERS: int = Field(1, ge=1, le=256)
    model_config = ConfigDict(case_sensitive=True, env_file=".env", extra="ignore")


@lru_cache
def get_settings() -> Settings:
    settings = Settings()
    return settings
