from pydantic import BaseModel, Field
from typing import Optional, List

from app.models.schemas import MatrixPayload, RunConfig


class MleResultResponse(BaseModel):
    config: Optional[RunConfig] = None
    n: int
    K_hat: MatrixPayload
    Sigma_hat: MatrixPayload
    iterations: int
    grad_norm: float
    loglik: float
    trace: List[float] = Field(default_factory=list, description="log-vraisemblance après chaque pas accepté")


class OracleReportResponse(BaseModel):
    config: Optional[RunConfig] = None
    n: int
    formulation: str
    S: MatrixPayload
    starts: int
    seed: int
    distinct_critical_points: int
    formula_count: int
    converged_runs: int
    ill_conditioned: int
    failed_runs: int = Field(description="départs dont le chemin n'a pas atteint t = 1")
    singular_rejected: int = 0
    loops: int = 0
    max_residual: Optional[float] = None
    exceeds_formula: bool
    points: List[MatrixPayload] = Field(default_factory=list)
