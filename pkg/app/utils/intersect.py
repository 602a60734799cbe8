"""
Recensement de L⁻¹ ∩ (Id + L^⊥) et comparaison au degré ML en forme close.

Familles : l'identité, les inverses normalisés de M_n^±(x) aux racines des
polynômes caractéristiques, le damier (n pair), puis toutes leurs conjuguées
par matrices diagonales de signes. La déduplication est globale : les orbites
de x et -x qui coïncident pour n pair sont absorbées sans cas particulier.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.models.census_schemas import (
    CensusReportResponse,
    CountCheckRow,
    FormulaRow,
    IntersectionPointResponse,
)
from app.utils.certify import Certificate, MinorSpec, harvest_minors
from app.utils.cycle_model import (
    CycleModel,
    SignDiag,
    SymMatrix,
    checkerboard,
    in_L_inverse,
    m_matrix,
    sign_patterns,
)
from app.utils.errors import (
    CycleModelError,
    InvalidArgumentError,
    MembershipError,
    NormalizationError,
    SingularCensusMatrixError,
)
from app.utils.poly import char_poly_even_minus, char_poly_even_plus, char_poly_odd, roots

logger = logging.getLogger(__name__)

# Rayon de la recherche des quasi-doublons échappant à l'arrondi
NEAR_RADIUS = 1e-3
MERGE_RELATIVE = 1e-8
BLOCK_SIZE = 512


class FamilyKind(str, Enum):
    IDENTITY = "Identity"
    MPLUS = "MPlus"
    MMINUS = "MMinus"
    CHECKERBOARD = "Checkerboard"


# ============================================
# FORMULES
# ============================================

def ml_degree_formula(n: int) -> int:
    """(n-3)·2^(n-2) + 1"""
    if n < 3:
        raise InvalidArgumentError(f"n doit être >= 3 (reçu {n})")
    return (n - 3) * 2 ** (n - 2) + 1


def variety_degree_formula(n: int) -> int:
    """(n+2)/4 · C(2n, n) - 3·2^(2n-3), en arithmétique entière"""
    if n < 3:
        raise InvalidArgumentError(f"n doit être >= 3 (reçu {n})")
    numerator = (n + 2) * comb(2 * n, n)
    if numerator % 4:
        raise ArithmeticError(f"Degré non entier pour n={n}")
    return numerator // 4 - 3 * 2 ** (2 * n - 3)


def formula_table(ns: Iterable[int]) -> List[FormulaRow]:
    return [
        FormulaRow(n=n, ml_degree=ml_degree_formula(n), variety_degree=variety_degree_formula(n))
        for n in ns
    ]


# ============================================
# POINTS ET RAPPORT
# ============================================

@dataclass(frozen=True, eq=False)
class IntersectionPoint:
    matrix: SymMatrix
    family: FamilyKind
    sign_pattern: SignDiag
    x: Optional[complex] = None
    certificate: Optional[Certificate] = None

    def to_response(self, index: int) -> IntersectionPointResponse:
        return IntersectionPointResponse(
            index=index,
            family=self.family.value,
            x=None if self.x is None else [float(self.x.real), float(self.x.imag)],
            sign_pattern=list(self.sign_pattern.signs),
            matrix=self.matrix.to_payload(),
            certificate=None if self.certificate is None else self.certificate.to_response(),
        )


@dataclass(frozen=True, eq=False)
class CensusReport:
    n: int
    points: List[IntersectionPoint]
    formula_count: int
    min_pairwise_distance: Optional[float]
    cross_family_merges: int = 0
    minors: List[MinorSpec] = field(default_factory=list)

    @property
    def distinct_count(self) -> int:
        return len(self.points)

    @property
    def count_matches(self) -> bool:
        return self.distinct_count == self.formula_count

    def with_certificates(self, certificates: Sequence[Certificate]) -> "CensusReport":
        points = [replace(p, certificate=c) for p, c in zip(self.points, certificates)]
        return replace(self, points=points)

    def to_response(self, include_points: bool = True) -> CensusReportResponse:
        return CensusReportResponse(
            n=self.n,
            formula_count=self.formula_count,
            distinct_count=self.distinct_count,
            count_matches=self.count_matches,
            min_pairwise_distance=self.min_pairwise_distance,
            cross_family_merges=self.cross_family_merges,
            family_counts=census_family_counts(self),
            points=[p.to_response(i) for i, p in enumerate(self.points)] if include_points else [],
        )


def census_family_counts(report: CensusReport) -> Dict[str, int]:
    counts = Counter(p.family.value for p in report.points)
    return {kind.value: counts.get(kind.value, 0) for kind in FamilyKind}


# ============================================
# CONSTRUCTION DES FAMILLES
# ============================================

@dataclass(frozen=True, eq=False)
class _Seed:
    family: FamilyKind
    x: Optional[complex]
    base: np.ndarray
    orbit: bool = True


def _normalized_inverse(n: int, x: complex, variant: str, tol: float) -> np.ndarray:
    matrix = m_matrix(n, x, variant).entries
    if np.linalg.cond(matrix) > 1.0 / tol:
        raise SingularCensusMatrixError(f"M_{n}^{variant}({x}) numériquement singulière")
    inverse = np.linalg.inv(matrix)
    diagonal = np.diag(inverse)
    c = diagonal[0]
    if np.abs(diagonal).min() <= tol:
        raise NormalizationError(f"Diagonale de M_{n}^{variant}({x})⁻¹ trop petite")
    if np.abs(diagonal - c).max() > 1e3 * tol * abs(c):
        raise NormalizationError(f"Diagonale non constante pour M_{n}^{variant}({x})⁻¹")
    normalized = inverse / c
    return (normalized + normalized.T) / 2


def _census_seeds(n: int, tol: float) -> List[_Seed]:
    seeds = [_Seed(FamilyKind.IDENTITY, None, np.eye(n, dtype=complex), orbit=False)]
    m, odd = divmod(n, 2)
    if odd:
        families = [(FamilyKind.MPLUS, "plus", char_poly_odd(m))]
    else:
        families = [
            (FamilyKind.MPLUS, "plus", char_poly_even_plus(m)),
            (FamilyKind.MMINUS, "minus", char_poly_even_minus(m)),
        ]
    for kind, variant, poly in families:
        for x in roots(poly, settings.ROOT_TOL):
            seeds.append(_Seed(kind, x, _normalized_inverse(n, x, variant, tol)))
    if not odd:
        seeds.append(_Seed(FamilyKind.CHECKERBOARD, None, checkerboard(n).entries.astype(complex)))
    return seeds


# ============================================
# DÉDUPLICATION
# ============================================

def _distance_vectors(uppers: np.ndarray, n: int) -> np.ndarray:
    """Vecteurs réels dont la norme euclidienne est la norme de Frobenius"""
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return np.hstack([uppers.real * weights, uppers.imag * weights])


def canonical_keys(uppers: np.ndarray, decimals: int) -> np.ndarray:
    keys = np.hstack([np.round(uppers.real, decimals), np.round(uppers.imag, decimals)])
    return keys + 0.0  # -0.0 → 0.0


def _near_pairs(vectors: np.ndarray, radius: float) -> Tuple[float, List[Tuple[int, int]]]:
    """
    Distance minimale approchée (Gram par blocs) entre paires éloignées de
    plus de `radius`, et liste des paires plus proches à réexaminer.
    """
    count = len(vectors)
    squares = np.einsum("ij,ij->i", vectors, vectors)
    far_min = np.inf
    close: List[Tuple[int, int]] = []
    columns = np.arange(count)
    for start in range(0, count, BLOCK_SIZE):
        block = vectors[start:start + BLOCK_SIZE]
        d2 = squares[start:start + BLOCK_SIZE, None] + squares[None, :] - 2.0 * block @ vectors.T
        lower = columns[None, :] <= np.arange(start, start + len(block))[:, None]
        d2 = np.where(lower, np.inf, d2)
        near = d2 < radius ** 2
        for i, j in zip(*np.nonzero(near)):
            close.append((int(i) + start, int(j)))
        far = np.where(near, np.inf, d2)
        if far.size:
            far_min = min(far_min, float(far.min()))
    return float(np.sqrt(max(far_min, 0.0))), close


def deduplicate(uppers: np.ndarray, n: int, decimals: int) -> Tuple[np.ndarray, np.ndarray, Optional[float]]:
    """
    Retourne (indices des représentants dans l'ordre canonique, représentant
    de chaque candidat, distance minimale entre survivants).
    Clé : parties réelle et imaginaire arrondies, ordre lexicographique,
    première occurrence retenue. Deux matrices de même clé mais distantes de
    plus de 1e-8·norme restent distinctes ; deux clés voisines à moins de
    1e-8·norme fusionnent.
    """
    keys = canonical_keys(uppers, decimals)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    vectors = _distance_vectors(uppers, n)
    norms = np.linalg.norm(vectors, axis=1)

    representative = first[inverse]
    gaps = np.linalg.norm(vectors - vectors[representative], axis=1)
    split = np.nonzero(gaps > MERGE_RELATIVE * np.maximum(norms, 1.0))[0]
    if len(split):
        logger.warning(f"{len(split)} candidat(s) partagent une clé sans coïncider")
        representative = representative.copy()
        representative[split] = split

    survivors = list(first) + [int(i) for i in split]
    survivor_vectors = vectors[survivors]
    far_min, close = _near_pairs(survivor_vectors, NEAR_RADIUS)

    dropped = set()
    close_min = np.inf
    for a, b in close:
        exact = float(np.linalg.norm(survivor_vectors[a] - survivor_vectors[b]))
        scale = max(norms[survivors[a]], 1.0)
        if exact < MERGE_RELATIVE * scale:
            dropped.add(b)
            representative[representative == survivors[b]] = survivors[a]
        else:
            close_min = min(close_min, exact)

    kept = np.array([s for i, s in enumerate(survivors) if i not in dropped], dtype=int)
    minimum = min(far_min, close_min)
    return kept, representative, (None if not np.isfinite(minimum) else minimum)


# ============================================
# RECENSEMENT
# ============================================

def _validate(points: Sequence[IntersectionPoint], model: CycleModel, tol: float,
              minors: Optional[Sequence[MinorSpec]]) -> Optional[Sequence[MinorSpec]]:
    """Appartenance de chaque survivant ; les mineurs sont récoltés à la demande"""
    rows, cols = model.support_rows[model.n:], model.support_cols[model.n:]
    for point in points:
        values = point.matrix.entries
        if np.abs(np.diag(values) - 1).max() > tol or np.abs(values[rows, cols]).max() > tol:
            raise MembershipError(f"Point {point.family.value} hors de Id + L^⊥")
        singular = np.linalg.cond(values) >= 1.0 / tol
        if singular and minors is None:
            minors = harvest_minors(model.n)
        if not in_L_inverse(point.matrix, model, tol, minors if singular else None):
            raise MembershipError(f"Point {point.family.value} hors de L⁻¹")
    return minors


def enumerate_points(n: int, tol: Optional[float] = None,
                     minors: Optional[Sequence[MinorSpec]] = None) -> CensusReport:
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    if n < 4:
        raise InvalidArgumentError(f"Le recensement demande n >= 4 (reçu {n})")
    if tol <= 0:
        raise InvalidArgumentError("La tolérance doit être positive")

    model = CycleModel(n)
    rows, cols = np.triu_indices(n)
    patterns = sign_patterns(n)
    products = (patterns[:, :, None] * patterns[:, None, :])[:, rows, cols]

    uppers, kinds, origins = [], [], []
    seeds = _census_seeds(n, settings.ROOT_TOL)
    for seed_index, seed in enumerate(seeds):
        base = seed.base[rows, cols]
        if seed.orbit:
            uppers.append(base[None, :] * products)
            origins.extend((seed_index, b) for b in range(len(patterns)))
        else:
            uppers.append(base[None, :])
            origins.append((seed_index, 0))
        kinds.extend([seed.family] * (len(patterns) if seed.orbit else 1))

    stacked = np.vstack(uppers)
    kept, representative, minimum = deduplicate(stacked, n, settings.DEDUP_DECIMALS)

    kind_codes = np.array([list(FamilyKind).index(k) for k in kinds])
    crossing = kind_codes != kind_codes[representative]
    cross_merges = int(len(np.unique(representative[crossing])))
    if cross_merges:
        logger.warning(f"n={n} : {cross_merges} fusion(s) entre familles distinctes")

    points = []
    for index in kept:
        seed_index, bits = origins[index]
        seed = seeds[seed_index]
        values = np.zeros((n, n), dtype=complex)
        values[rows, cols] = stacked[index]
        points.append(IntersectionPoint(
            matrix=SymMatrix(values),
            family=seed.family,
            sign_pattern=SignDiag.from_bits(n, bits),
            x=seed.x,
        ))

    minors = _validate(points, model, tol, minors)

    report = CensusReport(
        n=n,
        points=points,
        formula_count=ml_degree_formula(n),
        min_pairwise_distance=minimum,
        cross_family_merges=cross_merges,
        minors=list(minors or []),
    )
    logger.info(
        f"n={n} : {report.distinct_count} points distincts "
        f"(formule {report.formula_count}, {len(stacked)} candidats)"
    )
    return report


@dataclass(frozen=True, eq=False)
class CountCheckResult:
    n: int
    passed: bool
    report: Optional[CensusReport]
    error: Optional[str] = None

    def to_row(self) -> CountCheckRow:
        return CountCheckRow(
            n=self.n,
            passed=self.passed,
            formula_count=ml_degree_formula(self.n),
            distinct_count=None if self.report is None else self.report.distinct_count,
            error=self.error,
        )


def count_check(ns: Iterable[int], tol: Optional[float] = None) -> List[CountCheckResult]:
    """Chaque n est traité indépendamment ; une erreur n'interrompt pas le lot"""
    results = []
    for n in ns:
        try:
            report = enumerate_points(n, tol)
            results.append(CountCheckResult(n=n, passed=report.count_matches, report=report))
        except CycleModelError as e:
            logger.error(f"❌ Recensement n={n} : {e}")
            results.append(CountCheckResult(n=n, passed=False, report=None, error=str(e)))
    return results
