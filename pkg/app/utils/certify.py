"""
Certificats de transversalité.

1. Récolte empirique des mineurs 3x3 qui s'annulent sur L⁻¹ (échantillons K⁻¹).
2. Jacobienne {mineurs} ∪ {contraintes de la tranche affine} en un point.
3. Rang plein n(n+1)/2 par rapport de valeurs singulières.

Le module vérifie aussi les identités quartiques R'_k et R_k de l'idéal du
graphe, et fournit le témoin de lieu de base associé.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.models.census_schemas import CertificateResponse, MinorPayload
from app.utils.cycle_model import CycleModel, SymMatrix, _as_array, cofactors3, minor_values
from app.utils.errors import InvalidArgumentError, SampleSingularError

if TYPE_CHECKING:
    from app.utils.intersect import IntersectionPoint

logger = logging.getLogger(__name__)

MAX_RESHIFTS = 10


# ============================================
# MINEURS
# ============================================

@dataclass(frozen=True)
class MinorSpec:
    rows: Tuple[int, int, int]
    cols: Tuple[int, int, int]

    @classmethod
    def from_labels(cls, rows: Sequence[int], cols: Sequence[int]) -> "MinorSpec":
        """Construit à partir d'indices 1-based ; l'ordre canonique met I <= J"""
        r = tuple(sorted(i - 1 for i in rows))
        c = tuple(sorted(j - 1 for j in cols))
        return cls(*sorted((r, c)))

    def label(self) -> str:
        rows = ",".join(str(i + 1) for i in self.rows)
        cols = ",".join(str(j + 1) for j in self.cols)
        return f"δ({rows})({cols})"

    def to_payload(self) -> MinorPayload:
        return MinorPayload(rows=[i + 1 for i in self.rows], cols=[j + 1 for j in self.cols])


def _sample_inverse(model: CycleModel, rng: np.random.Generator) -> np.ndarray:
    """A = K⁻¹ pour K de support C_n, gaussien puis décalé vers le cône positif"""
    theta = rng.standard_normal(2 * model.n)
    k = model.from_support(theta)
    k += (abs(np.linalg.eigvalsh(k).min()) + 1.0) * np.eye(model.n)
    for _ in range(MAX_RESHIFTS):
        if np.linalg.cond(k) < 1e12:
            return np.linalg.inv(k)
        k += np.eye(model.n)
    raise SampleSingularError(f"Échantillon K singulier après {MAX_RESHIFTS} décalages (n={model.n})")


def _minor_index(minors: Sequence[MinorSpec]) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.array([m.rows for m in minors], dtype=int).reshape(-1, 3)
    cols = np.array([m.cols for m in minors], dtype=int).reshape(-1, 3)
    return rows, cols


def harvest_minors(n: int, samples: Optional[int] = None, tol: Optional[float] = None,
                   seed: Optional[int] = None) -> List[MinorSpec]:
    """
    Toutes les paires (I, J), I <= J, dont le mineur s'annule (tolérance
    relative à la borne de Hadamard) sur chacun des échantillons.
    """
    samples = settings.HARVEST_SAMPLES if samples is None else samples
    tol = settings.HARVEST_TOL if tol is None else tol
    seed = settings.DEFAULT_SEED if seed is None else seed
    if n < 4:
        raise InvalidArgumentError(f"La récolte demande n >= 4 (reçu {n})")
    if samples < 10:
        raise InvalidArgumentError(f"Au moins 10 échantillons (reçu {samples})")

    model = CycleModel(n)
    rng = np.random.default_rng(seed)
    triples = list(combinations(range(n), 3))
    pairs = [(a, b) for i, a in enumerate(triples) for b in triples[i:]]
    rows = np.array([p[0] for p in pairs])
    cols = np.array([p[1] for p in pairs])

    alive = np.ones(len(pairs), dtype=bool)
    for _ in range(samples):
        values, scales = minor_values(_sample_inverse(model, rng), rows, cols)
        alive &= np.abs(values) <= tol * scales

    harvested = [MinorSpec(pairs[i][0], pairs[i][1]) for i in np.nonzero(alive)[0]]
    logger.info(f"n={n} : {len(harvested)} mineurs récoltés sur {len(pairs)} candidats")
    return harvested


def minor_value(a, minor: MinorSpec) -> complex:
    values = _as_array(a)
    return complex(np.linalg.det(values[np.ix_(minor.rows, minor.cols)]))


def minor_gradients(a, minors: Sequence[MinorSpec], model: CycleModel) -> np.ndarray:
    """
    Gradients des mineurs par rapport aux n(n+1)/2 coordonnées du triangle
    supérieur : cofacteurs 3x3 répartis sur les coordonnées, une coordonnée
    hors diagonale recevant les contributions de (i, j) et de (j, i).
    """
    values = _as_array(a)
    if values.shape != (model.n, model.n):
        raise InvalidArgumentError(f"Matrice {values.shape} pour n={model.n}")
    rows, cols = _minor_index(minors)
    gradients = np.zeros((len(rows), model.dim), dtype=complex)
    if len(rows) == 0:
        return gradients
    blocks = values[rows[:, :, None], cols[:, None, :]]
    cof = cofactors3(blocks)
    targets = model.coordinate_index[rows[:, :, None], cols[:, None, :]]
    np.add.at(gradients, (np.repeat(np.arange(len(rows)), 9), targets.ravel()), cof.ravel())
    return gradients


def minor_gradient(a, minor: MinorSpec, model: CycleModel) -> np.ndarray:
    return minor_gradients(a, [minor], model)[0]


def jacobian_at(a, minors: Sequence[MinorSpec], model: CycleModel) -> np.ndarray:
    """Lignes des mineurs puis les 2n vecteurs unitaires des contraintes affines"""
    constraints = np.zeros((2 * model.n, model.dim), dtype=complex)
    columns = model.coordinate_index[model.support_rows, model.support_cols]
    constraints[np.arange(2 * model.n), columns] = 1.0
    return np.vstack([minor_gradients(a, minors, model), constraints])


# ============================================
# CERTIFICATS DE RANG
# ============================================

@dataclass(frozen=True)
class Certificate:
    point_index: Optional[int]
    required_rank: int
    achieved_rank: int
    sigma_ratio: float
    minor_count: int
    threshold: float

    @property
    def passed(self) -> bool:
        return self.achieved_rank == self.required_rank and self.sigma_ratio > self.threshold

    def to_response(self) -> CertificateResponse:
        return CertificateResponse(
            point_index=self.point_index,
            required_rank=self.required_rank,
            achieved_rank=self.achieved_rank,
            sigma_ratio=self.sigma_ratio,
            minor_count=self.minor_count,
            passed=self.passed,
        )


def rank_certificate(point, minors: Sequence[MinorSpec], model: CycleModel,
                     threshold: Optional[float] = None, point_index: Optional[int] = None) -> Certificate:
    """`point` est un IntersectionPoint ou directement une matrice"""
    threshold = settings.RANK_THRESHOLD if threshold is None else threshold
    matrix = point.matrix if hasattr(point, "matrix") else point
    sigma = np.linalg.svd(jacobian_at(matrix, minors, model), compute_uv=False)
    required = model.dim
    achieved = int(min(np.count_nonzero(sigma > threshold * sigma[0]), required))
    ratio = float(sigma[required - 1] / sigma[0]) if len(sigma) >= required else 0.0
    return Certificate(
        point_index=point_index,
        required_rank=required,
        achieved_rank=achieved,
        sigma_ratio=ratio,
        minor_count=len(minors),
        threshold=threshold,
    )


def certify_census(points: Sequence["IntersectionPoint"], minors: Sequence[MinorSpec], model: CycleModel,
                   threads: int = 1, threshold: Optional[float] = None) -> List[Certificate]:
    """Un certificat par point, dans l'ordre des points"""
    def certify_one(indexed) -> Certificate:
        index, point = indexed
        return rank_certificate(point, minors, model, threshold, point_index=index)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            certificates = list(executor.map(certify_one, enumerate(points)))
    else:
        certificates = [certify_one(item) for item in enumerate(points)]

    failures = [c for c in certificates if not c.passed]
    if failures:
        logger.warning(f"n={model.n} : {len(failures)} point(s) sans rang plein")
    else:
        logger.info(f"n={model.n} : {len(certificates)} points certifiés")
    return certificates


# ============================================
# IDENTITÉS QUARTIQUES
# ============================================

Accessor = Callable[[int, int], complex]


def rk_prime_terms(x: Accessor, k: int, restore_cancelled: bool = False) -> List[complex]:
    """Les huit monômes de R'_k (indices 1-based), plus les deux termes simplifiés sur demande"""
    terms = [
        x(1, 1) * x(k, k + 1) * x(2, k) * x(2, k + 1),
        -x(1, 1) * x(k, k) * x(2, k + 1) * x(2, k + 1),
        -x(1, 2) * x(k, k + 1) * x(1, k) * x(2, k + 1),
        x(1, 2) * x(k, k) * x(1, k + 1) * x(2, k + 1),
        -x(1, 2) * x(k + 1, k + 1) * x(1, k) * x(2, k),
        x(1, 2) * x(k, k + 1) * x(1, k) * x(2, k + 1),
        x(2, 2) * x(k + 1, k + 1) * x(1, k) * x(1, k),
        -x(2, 2) * x(k, k + 1) * x(1, k) * x(1, k + 1),
    ]
    if restore_cancelled:
        terms += [
            -x(2, k + 1) * x(1, k) * x(2, k) * x(1, k + 1),
            x(2, k + 1) * x(1, k) * x(1, k) * x(2, k + 1),
        ]
    return terms


def rk_terms(x: Accessor, y: Accessor, k: int) -> List[complex]:
    """Forme bihomogène R_k : deux coordonnées de chaque monôme passent en y"""
    return [
        y(1, 1) * y(k, k + 1) * x(2, k) * x(2, k + 1),
        -y(1, 1) * y(k, k) * x(2, k + 1) * x(2, k + 1),
        -y(1, 2) * y(k, k + 1) * x(1, k) * x(2, k + 1),
        y(1, 2) * y(k, k) * x(1, k + 1) * x(2, k + 1),
        -y(1, 2) * y(k + 1, k + 1) * x(1, k) * x(2, k),
        y(1, 2) * y(k, k + 1) * x(1, k) * x(2, k + 1),
        y(2, 2) * y(k + 1, k + 1) * x(1, k) * x(1, k),
        -y(2, 2) * y(k, k + 1) * x(1, k) * x(1, k + 1),
    ]


def rk_minor_form(values: np.ndarray, k: int) -> complex:
    """x_{2,k+1}·δ(1,2,k)(1,k,k+1) - x_{1,k}·δ(2,k,k+1)(1,2,k+1)"""
    x = _accessor(values)
    first = np.linalg.det(values[np.ix_([0, 1, k - 1], [0, k - 1, k])])
    second = np.linalg.det(values[np.ix_([1, k - 1, k], [0, 1, k])])
    return complex(x(2, k + 1) * first - x(1, k) * second)


def _accessor(values: np.ndarray) -> Accessor:
    return lambda i, j: values[i - 1, j - 1]


def _negligible(terms: Sequence[complex], tol: float) -> bool:
    scale = max(abs(t) for t in terms)
    return abs(sum(terms)) <= tol * max(scale, np.finfo(float).tiny)


def rk_identity_check(n: int, k: int, samples: Optional[int] = None, tol: Optional[float] = None,
                      seed: Optional[int] = None, restore_cancelled: bool = False) -> bool:
    """
    R'_k(A) = 0 et R_k(A, λ·π(A)) = 0 sur des points A = K⁻¹ de L⁻¹ ;
    contrôle croisé sur une matrice symétrique générique : le développement
    en huit termes coïncide avec la combinaison de mineurs, et R_k = λ²·R'_k.
    """
    samples = settings.IDENTITY_SAMPLES if samples is None else samples
    tol = settings.IDENTITY_TOL if tol is None else tol
    seed = settings.DEFAULT_SEED if seed is None else seed
    if not 3 <= k <= n - 1:
        raise InvalidArgumentError(f"k doit vérifier 3 <= k <= n-1 (reçu k={k}, n={n})")

    model = CycleModel(n)
    rng = np.random.default_rng(seed)

    for _ in range(samples):
        values = _sample_inverse(model, rng)
        x = _accessor(values)
        if not _negligible(rk_prime_terms(x, k, restore_cancelled), tol):
            return False
        lam = complex(rng.standard_normal(), rng.standard_normal())
        y = lambda i, j: lam * x(i, j)
        if not _negligible(rk_terms(x, y, k), tol):
            return False

        generic = rng.standard_normal((n, n))
        generic = generic + generic.T
        g = _accessor(generic)
        expanded = rk_prime_terms(g, k, restore_cancelled)
        scale = max(abs(t) for t in expanded)
        if abs(sum(expanded) - rk_minor_form(generic, k)) > tol * scale:
            return False
        bihomogeneous = sum(rk_terms(g, lambda i, j: lam * g(i, j), k))
        if abs(bihomogeneous - lam ** 2 * sum(expanded)) > tol * scale * abs(lam) ** 2:
            return False
    return True


def base_locus_witness(a, tol: Optional[float] = None) -> Optional[Tuple[int, int, complex]]:
    """
    Pour A ∈ L⁻¹ ∩ L^⊥ non nulle : coefficient non nul le plus proche de la
    diagonale (distance cyclique), rotation ramenant sa ligne en 1, puis k tel
    que x_{1,k} ≠ 0 et x_{1,k+1} = x_{2,k} = x_{2,k+1} = 0.
    Retourne (i, k, R_k(A, Id)) en indices 1-based du repère d'origine, ou None
    si aucun k ne convient.
    """
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    values = _as_array(a)
    n = values.shape[0]
    model = CycleModel(n)
    peak = float(np.abs(values).max())
    if peak == 0.0:
        raise InvalidArgumentError("Le témoin demande une matrice non nulle")
    threshold = tol * peak
    if np.abs(values[model.support_mask]).max() > threshold:
        raise InvalidArgumentError("Le témoin demande une matrice de L^⊥ (diagonale et arêtes nulles)")

    best = None
    for i in range(n):
        for j in range(n):
            if i != j and abs(values[i, j]) > threshold:
                gap = (j - i) % n
                if best is None or gap < best[0]:
                    best = (gap, i)
    if best is None:
        return None

    _, row = best
    order = (np.arange(n) + row) % n
    rotated = values[np.ix_(order, order)]
    x = _accessor(rotated)
    zero = lambda v: abs(v) <= threshold

    k = next((j - 1 for j in range(2 + best[0], n + 1) if zero(x(1, j))), None)
    if k is None or not 3 <= k <= n - 1:
        return None
    if zero(x(1, k)) or not (zero(x(1, k + 1)) and zero(x(2, k)) and zero(x(2, k + 1))):
        return None

    identity = _accessor(np.eye(n))
    value = complex(sum(rk_terms(x, identity, k)))
    return row + 1, int(order[k - 1]) + 1, value
