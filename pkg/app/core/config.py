from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Tolerances
    eps_ball: float = 1e-12
    eps_gap: float = 1e-9
    eps_col: float = 1e-9
    eps_wind: float = 1e-9
    winding_residual_max: float = 0.01
    equivariance_tol: float = 1e-12
    symmetry_tol: float = 1e-10
    chord_degenerate_tol: float = 1e-12

    # Random configuration sampler
    sampler_min_gap: float = 1e-3
    sampler_max_attempts: int = 10000

    # Homotopy
    homotopy_frames: int = 64

    # Obstruction
    obstruction_radius: float = 0.1
    obstruction_samples: int = 256
    obstruction_base_radius: float = 0.6
    obstruction_base_jitter: float = 0.01

    # Fixed-configuration solver
    solver_tol: float = 1e-6
    solver_restarts: int = 32
    solver_budget: int = 100_000
    solver_min_gap: float = 1e-3
    solver_initial_step: float = 0.05
    solver_polish_passes: int = 3

    # HTTP report cache
    cache_ttl_seconds: int = 600
    cache_max_entries: int = 100

    log_level: str = "INFO"
    environment: str = "dev"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
