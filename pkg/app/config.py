from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path


class Settings(BaseSettings):
    PROJECT_NAME: str = "Cycle ML-degree"
    LOG_LEVEL: str = "INFO"

    # Racines et inversions
    ROOT_TOL: float = 1e-10
    # Appartenance à L⁻¹ et à Id + L^⊥
    MEMBERSHIP_TOL: float = 1e-8
    DEDUP_DECIMALS: int = 6

    # Mineurs et certificats
    HARVEST_SAMPLES: int = 20
    HARVEST_TOL: float = 1e-9
    RANK_THRESHOLD: float = 1e-8
    IDENTITY_SAMPLES: int = 50
    IDENTITY_TOL: float = 1e-9

    # Vraisemblance
    MLE_TOL: float = 1e-12
    MLE_MAX_ITER: int = 100

    # Oracle multi-départs
    ORACLE_STARTS_N4: int = 500
    ORACLE_STARTS_N5: int = 1000
    ORACLE_STARTS_N6: int = 4000
    ORACLE_BOX_SCALE: float = 2.0
    ORACLE_MAX_NEWTON: int = 100
    ORACLE_MAX_STEPS: int = 3000
    ORACLE_COND_LIMIT: float = 1e10
    ORACLE_SINGULAR_RATIO: float = 1e-8
    # Complétion par boucles de seconds membres
    ORACLE_LOOP_SCALE: float = 1.0
    ORACLE_STALL_LOOPS: int = 8
    ORACLE_MAX_LOOPS: int = 60

    DEFAULT_SEED: int = 0
    THREADS: int = 1

    model_config = SettingsConfigDict(
        # Aucun secret ici : le fichier .env local est optionnel
        env_file=".env" if Path(".env").exists() else None,
        env_prefix="CYCLEML_",
        extra="ignore",
    )

    def oracle_starts(self, n: int) -> int:
        return {4: self.ORACLE_STARTS_N4, 5: self.ORACLE_STARTS_N5}.get(n, self.ORACLE_STARTS_N6)


settings = Settings()
