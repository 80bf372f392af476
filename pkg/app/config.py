from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    MAX_DIM: int = 4096
    TOLERANCE: float = 1e-9
    HERMITIAN_TOL: float = 1e-9

    OUTPUT_DIR: str = ""
    DEFAULT_SEED: int = 12345

    MC_CHUNK_SIZE: int = 10_000
    SCAN_WORKERS: int = 4
    CONVERGENCE_M_MAX: int = 10_000

    LOG_LEVEL: str = "WARNING"

    model_config = {"env_file": ".env", "extra": "ignore"}


settings = Settings()
