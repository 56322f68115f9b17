from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Precision
    precision_bits: int = Field(128, validation_alias='ONESIDED_PRECISION_BITS')
    imag_tol: float = Field(1e-9, validation_alias='ONESIDED_IMAG_TOL')
    closed_form_tol: float = Field(1e-10, validation_alias='ONESIDED_CLOSED_FORM_TOL')
    conjugate_tol: float = Field(1e-12, validation_alias='ONESIDED_CONJUGATE_TOL')

    # Scans
    scan_budget: int = Field(1_000_000, validation_alias='ONESIDED_SCAN_BUDGET')
    scan_block: int = Field(65_536, validation_alias='ONESIDED_SCAN_BLOCK')
    scan_workers: int = Field(1, validation_alias='ONESIDED_SCAN_WORKERS')
    history_points: int = Field(1000, validation_alias='ONESIDED_HISTORY_POINTS')

    # Integer relations
    relation_height: int = Field(1000, validation_alias='ONESIDED_RELATION_HEIGHT')
    relation_precision_bits: int = Field(128, validation_alias='ONESIDED_RELATION_PRECISION_BITS')

    # Continuous minimization
    torus_grid: int = Field(512, validation_alias='ONESIDED_TORUS_GRID')
    torus_max_points: int = Field(2_097_152, validation_alias='ONESIDED_TORUS_MAX_POINTS')
    torus_multistart: int = Field(64, validation_alias='ONESIDED_TORUS_MULTISTART')
    time_resolution: float = Field(0.01, validation_alias='ONESIDED_TIME_RESOLUTION')
    time_horizon: float = Field(200.0, validation_alias='ONESIDED_TIME_HORIZON')
    time_horizon_cap: float = Field(20_000.0, validation_alias='ONESIDED_TIME_HORIZON_CAP')

    # Witness search
    witness_effort: int = Field(1_000_000, validation_alias='ONESIDED_WITNESS_EFFORT')
    witness_min_delta: float = Field(1e-9, validation_alias='ONESIDED_WITNESS_MIN_DELTA')

    # Quadrature
    quad_rel_tol: float = Field(1e-6, validation_alias='ONESIDED_QUAD_REL_TOL')

    # Runs
    seed: int = Field(0, validation_alias='ONESIDED_SEED')

    # Logging
    log_level: str = Field("INFO", validation_alias='LOG_LEVEL')

    @field_validator("precision_bits", "relation_precision_bits")
    @classmethod
    def check_precision(cls, v: int) -> int:
        if v < 53:
            raise ValueError("Working precision must be at least 53 bits.")
        return v

    @field_validator("scan_block", "scan_workers", "history_points", "torus_grid", "torus_multistart")
    @classmethod
    def check_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Value must be a positive integer.")
        return v

    model_config = SettingsConfigDict(
        env_file='.env',
        env_file_encoding='utf-8',
        extra='ignore',  # Ignore extra fields from environment
    )


settings = Settings()
