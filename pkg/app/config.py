from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # App
    app_name: str = "Exchange-Only DFS Decoupling Toolkit"
    env: str = "development"
    log_level: str = "INFO"

    # Sequence solver
    solver_tolerance: float = 1e-13
    solver_max_iterations: int = 200
    solver_rank_rcond: float = 1e-10
    max_solver_order: int = 64

    # DFS
    unitarity_tolerance: float = 1e-12

    # Quantum-bath expansion / search
    max_expansion_order: int = 4
    globalization_tolerance: float = 1e-10
    search_residual_tolerance: float = 1e-9
    search_min_interval: float = 1e-3
    search_restarts: int = 4
    max_search_intervals: int = 12

    # Filter functions
    filter_grid_min: float = 1e-2
    filter_grid_max: float = 1e3
    filter_grid_points: int = 400
    chi_rel_tolerance: float = 1e-8
    chi_max_panels: int = 20000

    # Simulator (physical scales in MHz / kHz, converted to rad/s on use)
    bath_rms_mhz: float = 100.0
    bath_bandwidth_mhz: float = 100.0
    bath_modes: int = 10
    spin_bath_j_mhz: float = 100.0
    spin_bath_beta_khz: float = 10.0
    classical_baths: int = 10
    classical_states: int = 20
    quantum_trials: int = 16
    fit_window_min: float = 1e-11
    fit_window_max: float = 1e-2
    phase_quad_rel_tolerance: float = 1e-12

    # Runs
    seed: int = 20240601
    n_jobs: int = 1
    output_dir: str = "out"


@lru_cache
def get_settings() -> Settings:
    return Settings()
