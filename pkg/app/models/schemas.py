from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional, List, Union, Tuple


class PolynomialPayload(BaseModel):
    coeffs: List[int] = Field(default_factory=list, description="coeffs[i] = coefficient de x^i")


class RootSetPayload(BaseModel):
    roots: List[List[float]]
    source: PolynomialPayload
    tolerance: float


class MatrixPayload(BaseModel):
    """Matrice symétrique dense ; une entrée est un réel ou une paire [re, im]"""
    n: int = Field(..., ge=1)
    entries: List[List[Union[float, List[float]]]]

    @field_validator('entries')
    @classmethod
    def normalize_entries(cls, v):
        rows = []
        for row in v:
            normalized = []
            for value in row:
                if isinstance(value, list):
                    if len(value) != 2:
                        raise ValueError('Une entrée complexe doit être une paire [re, im]')
                    normalized.append([float(value[0]), float(value[1])])
                else:
                    normalized.append([float(value), 0.0])
            rows.append(normalized)
        return rows

    @model_validator(mode='after')
    def check_shape(self):
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError(f'La matrice doit être de taille {self.n}x{self.n}')
        return self


class RunConfig(BaseModel):
    """En-tête reproductible recopié dans chaque sortie"""
    command: str
    n: Optional[int] = None
    n_range: Optional[str] = None
    max_n: Optional[int] = Field(None, ge=4)
    seed: int = 0
    tol: Optional[float] = None
    threads: int = Field(1, ge=1)
    starts: Optional[int] = Field(None, ge=1)
    samples: Optional[int] = Field(None, ge=1)
    max_iter: Optional[int] = Field(None, ge=1)
    formulation: Optional[str] = None
    format: str = "json"
    output: Optional[str] = None

    @field_validator('format')
    @classmethod
    def validate_format(cls, v):
        if v not in ('json', 'csv'):
            raise ValueError('Format inconnu (json ou csv)')
        return v

    @field_validator('n')
    @classmethod
    def validate_n(cls, v):
        if v is not None and v < 3:
            raise ValueError('Le cycle doit avoir au moins 3 sommets')
        return v

    @field_validator('n_range')
    @classmethod
    def validate_range(cls, v):
        if v is None:
            return v
        parse_n_range(v)
        return v

    @field_validator('tol')
    @classmethod
    def validate_tol(cls, v):
        if v is not None and not (0 < v < 1):
            raise ValueError('La tolérance doit être dans ]0, 1[')
        return v

    @field_validator('formulation')
    @classmethod
    def validate_formulation(cls, v):
        if v is not None and v not in ('concentration', 'adjugate'):
            raise ValueError('Formulation inconnue (concentration ou adjugate)')
        return v

    def bounds(self) -> Tuple[int, int]:
        return parse_n_range(self.n_range or "4..8")


def parse_n_range(text: str) -> Tuple[int, int]:
    """'A..B' → (A, B) avec 4 <= A <= B"""
    parts = text.split('..')
    if len(parts) != 2:
        raise ValueError(f"Plage invalide '{text}' (attendu A..B)")
    try:
        low, high = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"Plage invalide '{text}' (bornes entières attendues)")
    if low < 4 or high < low:
        raise ValueError(f"Plage invalide '{text}' (4 <= A <= B)")
    return low, high
