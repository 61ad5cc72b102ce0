from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings and configuration"""

    # Magnus / nilpotent quotients
    magnus_max_class: int = 8  # Degree cap for lcs_class

    # Surface conjugacy closure
    surface_closure_limit: int = 20000  # Max cyclic words per closure
    surface_closure_slack: int = 2  # Extra letters allowed on closure intermediates

    # Default witness search budget
    witness_max_target_order: int = 256
    witness_max_candidates: int = 10000
    witness_time_limit_seconds: float = 60.0
    witness_seed: int = 0
    stage_one_sweep: list[int] = [2, 3, 4, 5, 6, 7, 8]

    # Brute-force oracles
    oracle_conjugator_length: int = 4

    # Server / CLI configuration
    app_name: str = "Seifert Conjugacy Explorer"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "WARNING"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False
    )


# Global settings instance
settings = Settings()
