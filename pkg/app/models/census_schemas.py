from pydantic import BaseModel, Field, field_validator
from typing import Optional, List, Dict

from app.models.schemas import MatrixPayload, RunConfig


# ============================================
# FORMULES
# ============================================

class FormulaRow(BaseModel):
    n: int
    ml_degree: int
    variety_degree: int


class FormulaResponse(BaseModel):
    config: Optional[RunConfig] = None
    n: int
    kind: str  # "ml_degree" ou "variety_degree"
    value: int


class FormulaTableResponse(BaseModel):
    config: Optional[RunConfig] = None
    rows: List[FormulaRow]


# ============================================
# MINEURS ET CERTIFICATS
# ============================================

class MinorPayload(BaseModel):
    rows: List[int]
    cols: List[int]

    @field_validator('rows', 'cols')
    @classmethod
    def validate_triple(cls, v):
        if len(v) != 3 or len(set(v)) != 3 or min(v) < 1:
            raise ValueError('Un mineur 3x3 demande trois indices distincts >= 1')
        return sorted(v)


class CertificateResponse(BaseModel):
    point_index: Optional[int] = None
    required_rank: int
    achieved_rank: int
    sigma_ratio: float
    minor_count: int
    passed: bool


class CertifyResponse(BaseModel):
    config: Optional[RunConfig] = None
    n: int
    points_checked: int
    all_pass: bool
    worst_sigma_ratio: Optional[float] = None
    minor_count: int
    certificates: List[CertificateResponse] = Field(default_factory=list)


# ============================================
# RECENSEMENT
# ============================================

class IntersectionPointResponse(BaseModel):
    index: int
    family: str
    x: Optional[List[float]] = None  # [re, im]
    sign_pattern: List[int]
    matrix: MatrixPayload
    certificate: Optional[CertificateResponse] = None


class CensusReportResponse(BaseModel):
    config: Optional[RunConfig] = None
    n: int
    formula_count: int
    distinct_count: int
    count_matches: bool
    min_pairwise_distance: Optional[float] = None
    cross_family_merges: int = 0
    family_counts: Dict[str, int] = Field(default_factory=dict)
    points: List[IntersectionPointResponse] = Field(default_factory=list)


class CountCheckRow(BaseModel):
    n: int
    passed: bool
    formula_count: int
    distinct_count: Optional[int] = None
    error: Optional[str] = None


class CountCheckResponse(BaseModel):
    config: Optional[RunConfig] = None
    rows: List[CountCheckRow]
    all_pass: bool
