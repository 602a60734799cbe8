from pydantic import BaseModel, Field
from typing import Optional, List

from app.models.schemas import RunConfig


# ============================================
# IDENTITÉS
# ============================================

class IdentityRow(BaseModel):
    check: str
    parameter: str  # ex. "n=7", "m=3", "n=6,k=4"
    passed: bool
    detail: Optional[str] = None


class IdentitySweepResponse(BaseModel):
    config: Optional[RunConfig] = None
    max_n: int
    rows: List[IdentityRow] = Field(default_factory=list)
    all_pass: bool


# ============================================
# PIPELINE COMPLET
# ============================================

class AcceptanceRow(BaseModel):
    stage: str  # "count", "certify", "identities", "oracle", "mle"
    n: Optional[int] = None
    passed: bool
    detail: Optional[str] = None


class AcceptanceResponse(BaseModel):
    config: Optional[RunConfig] = None
    rows: List[AcceptanceRow] = Field(default_factory=list)
    passed_count: int
    failed_count: int
    all_pass: bool
