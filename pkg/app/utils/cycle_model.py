"""
Modèle gaussien du cycle C_n : support, matrices symétriques, matrices M_n(x),
conjugaisons par signes et par décalage, projections et tests d'appartenance.

Indices internes 0-based ; la documentation et les sorties sérialisées
numérotent les sommets à partir de 1.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.config import settings
from app.models.schemas import MatrixPayload
from app.utils.errors import InvalidArgumentError, NeedsMinorsError

logger = logging.getLogger(__name__)

VARIANTS = ("path", "plus", "minus")


# ============================================
# MATRICES SYMÉTRIQUES
# ============================================

@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Matrice symétrique complexe ; le triangle supérieur fait foi."""
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgumentError(f"Matrice carrée attendue, reçu {a.shape}")
        full = np.triu(a) + np.triu(a, 1).T
        full.setflags(write=False)
        object.__setattr__(self, "entries", full)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def upper(self) -> np.ndarray:
        """Coordonnées (i <= j) en ordre ligne par ligne"""
        return self.entries[np.triu_indices(self.n)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def distance(self, other: "SymMatrix") -> float:
        return float(np.linalg.norm(self.entries - other.entries))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.entries.imag).max(initial=0.0) <= tol * max(1.0, self.norm()))

    def to_payload(self) -> MatrixPayload:
        return MatrixPayload(
            n=self.n,
            entries=[[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
        )

    @classmethod
    def from_payload(cls, payload: MatrixPayload) -> "SymMatrix":
        values = np.array(payload.entries, dtype=float)
        return cls(values[..., 0] + 1j * values[..., 1])

    def to_frame(self) -> pd.DataFrame:
        """Parties réelle et imaginaire en format long, sommets numérotés depuis 1"""
        rows, cols = np.triu_indices(self.n)
        values = self.entries[rows, cols]
        return pd.DataFrame({
            "i": rows + 1,
            "j": cols + 1,
            "re": values.real,
            "im": values.imag,
        })


def _as_array(a) -> np.ndarray:
    return a.entries if isinstance(a, SymMatrix) else np.asarray(a, dtype=complex)


# ============================================
# MODÈLE DU CYCLE
# ============================================

@dataclass(frozen=True)
class CycleModel:
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise InvalidArgumentError(f"Un cycle a au moins 3 sommets (reçu n={self.n})")

    @cached_property
    def diag_positions(self) -> List[Tuple[int, int]]:
        return [(i, i) for i in range(self.n)]

    @cached_property
    def edge_positions(self) -> List[Tuple[int, int]]:
        """(i, i+1) puis l'arête de fermeture (1, n)"""
        return [(i, i + 1) for i in range(self.n - 1)] + [(0, self.n - 1)]

    @cached_property
    def support(self) -> List[Tuple[int, int]]:
        return self.diag_positions + self.edge_positions

    @cached_property
    def support_rows(self) -> np.ndarray:
        return np.array([p[0] for p in self.support])

    @cached_property
    def support_cols(self) -> np.ndarray:
        return np.array([p[1] for p in self.support])

    @cached_property
    def support_mask(self) -> np.ndarray:
        mask = np.zeros((self.n, self.n), dtype=bool)
        mask[self.support_rows, self.support_cols] = True
        mask[self.support_cols, self.support_rows] = True
        return mask

    @cached_property
    def off_support(self) -> List[Tuple[int, int]]:
        """Paires i < j hors du support, n(n-3)/2 au total"""
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)
                if not self.support_mask[i, j]]

    @property
    def dim(self) -> int:
        return self.n * (self.n + 1) // 2

    @cached_property
    def coordinate_index(self) -> np.ndarray:
        """coordinate_index[i, j] = colonne de la coordonnée {i, j} dans upper()"""
        index = np.empty((self.n, self.n), dtype=int)
        rows, cols = np.triu_indices(self.n)
        index[rows, cols] = np.arange(len(rows))
        index[cols, rows] = np.arange(len(rows))
        return index

    def from_support(self, theta: np.ndarray) -> np.ndarray:
        """Matrice de L à partir de ses 2n coordonnées (diagonale puis arêtes)"""
        k = np.zeros((self.n, self.n), dtype=np.result_type(theta, float))
        k[self.support_rows, self.support_cols] = theta
        k[self.support_cols, self.support_rows] = theta
        return k


# ============================================
# SIGNES
# ============================================

@dataclass(frozen=True)
class SignDiag:
    signs: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in values):
            raise InvalidArgumentError(f"Signes ±1 attendus : {self.signs}")
        object.__setattr__(self, "signs", values)

    @property
    def n(self) -> int:
        return len(self.signs)

    @classmethod
    def identity(cls, n: int) -> "SignDiag":
        return cls((1,) * n)

    @classmethod
    def alternating(cls, n: int) -> "SignDiag":
        """diag((-1)^i) pour i = 1..n"""
        return cls(tuple(-1 if i % 2 else 1 for i in range(1, n + 1)))

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "SignDiag":
        return cls(tuple(-1 if (bits >> i) & 1 else 1 for i in range(n)))

    def __mul__(self, other: "SignDiag") -> "SignDiag":
        if other.n != self.n:
            raise InvalidArgumentError("Tailles de signes incompatibles")
        return SignDiag(tuple(a * b for a, b in zip(self.signs, other.signs)))

    def vector(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)


def sign_patterns(n: int) -> np.ndarray:
    """Les 2^n vecteurs de signes, ligne b ↔ SignDiag.from_bits(n, b)"""
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1
    return 1.0 - 2.0 * bits


def sign_group(n: int) -> List[SignDiag]:
    return [SignDiag.from_bits(n, b) for b in range(2 ** n)]


def conjugate_sign(a, d: SignDiag) -> SymMatrix:
    """D A D, calculé entrée par entrée"""
    values = _as_array(a)
    if values.shape[0] != d.n:
        raise InvalidArgumentError(f"Dimension {values.shape[0]} ≠ {d.n}")
    s = d.vector()
    return SymMatrix(values * np.outer(s, s))


def orbit(a) -> List[SymMatrix]:
    values = _as_array(a)
    return [conjugate_sign(values, d) for d in sign_group(values.shape[0])]


def stabilizer(a, tol: Optional[float] = None) -> List[SignDiag]:
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    values = _as_array(a)
    scale = max(1.0, float(np.abs(values).max()))
    patterns = sign_patterns(values.shape[0])
    conjugated = values[None] * (patterns[:, :, None] * patterns[:, None, :])
    gaps = np.abs(conjugated - values[None]).reshape(len(patterns), -1).max(axis=1)
    return [SignDiag(tuple(int(s) for s in patterns[b])) for b in np.nonzero(gaps <= tol * scale)[0]]


# ============================================
# MATRICES DU RECENSEMENT
# ============================================

def m_matrix(n: int, x: complex, variant: str = "plus") -> SymMatrix:
    """
    Diagonale 1, x sur la sur/sous-diagonale ;
    coin (1, n) = x pour 'plus', -x pour 'minus', 0 pour 'path'.
    """
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"Variante inconnue : {variant}")
    if n < (1 if variant == "path" else 3):
        raise InvalidArgumentError(f"n={n} trop petit pour la variante {variant}")
    values = np.eye(n, dtype=complex)
    idx = np.arange(n - 1)
    values[idx, idx + 1] = x
    if variant == "plus":
        values[0, n - 1] = x
    elif variant == "minus":
        values[0, n - 1] = -x
    return SymMatrix(values)


def checkerboard(n: int) -> SymMatrix:
    """(𝒞_n)_ij = 1 si i + j est pair, 0 sinon (n pair)"""
    if n < 4 or n % 2:
        raise InvalidArgumentError(f"Le damier n'existe que pour n pair >= 4 (reçu {n})")
    i, j = np.indices((n, n))
    return SymMatrix(((i + j) % 2 == 0).astype(float))


def shift_matrix(n: int, variant: str = "plus") -> np.ndarray:
    """Permutation cyclique i → i+1 ; pour 'minus' l'entrée (n, 1) vaut -1"""
    if variant not in ("plus", "minus"):
        raise InvalidArgumentError(f"Variante inconnue : {variant}")
    shift = np.zeros((n, n))
    shift[np.arange(n - 1), np.arange(1, n)] = 1.0
    shift[n - 1, 0] = -1.0 if variant == "minus" else 1.0
    return shift


def shift_conjugate(a, variant: str = "plus") -> SymMatrix:
    values = _as_array(a)
    shift = shift_matrix(values.shape[0], variant)
    return SymMatrix(shift @ values @ shift.T)


def is_shift_invariant(a, variant: str = "plus", tol: Optional[float] = None) -> bool:
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    values = _as_array(a)
    moved = shift_conjugate(values, variant).entries
    return bool(np.abs(moved - values).max() <= tol * max(1.0, float(np.abs(values).max())))


# ============================================
# PROJECTIONS ET APPARTENANCE
# ============================================

def _check_size(values: np.ndarray, model: CycleModel) -> None:
    if values.shape != (model.n, model.n):
        raise InvalidArgumentError(f"Matrice {values.shape} pour un cycle à {model.n} sommets")


def project_L(a, model: CycleModel) -> SymMatrix:
    values = _as_array(a)
    _check_size(values, model)
    return SymMatrix(np.where(model.support_mask, values, 0))


def project_Lperp(a, model: CycleModel) -> SymMatrix:
    values = _as_array(a)
    _check_size(values, model)
    return SymMatrix(np.where(model.support_mask, 0, values))


def in_affine_slice(a, model: CycleModel, tol: Optional[float] = None) -> bool:
    """Diagonale égale à 1 et arêtes nulles"""
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    values = _as_array(a)
    _check_size(values, model)
    diag_ok = np.abs(np.diag(values) - 1).max() <= tol
    edges = values[model.support_rows[model.n:], model.support_cols[model.n:]]
    return bool(diag_ok and np.abs(edges).max() <= tol)


def cofactors3(blocks: np.ndarray) -> np.ndarray:
    """Cofacteurs d'une pile de matrices 3x3 par produits vectoriels des lignes"""
    b0, b1, b2 = blocks[..., 0, :], blocks[..., 1, :], blocks[..., 2, :]
    return np.stack([np.cross(b1, b2), np.cross(b2, b0), np.cross(b0, b1)], axis=-2)


def minor_values(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Déterminants 3x3 des sous-matrices (rows[m], cols[m]) et leur borne de
    Hadamard (produit des normes de lignes), échelle de la tolérance relative.
    """
    blocks = values[rows[:, :, None], cols[:, None, :]]
    dets = np.einsum("mj,mj->m", blocks[:, 0, :], np.cross(blocks[:, 1, :], blocks[:, 2, :]))
    scales = np.prod(np.linalg.norm(blocks, axis=2), axis=1)
    return dets, scales


def in_L_inverse(a, model: CycleModel, tol: Optional[float] = None, minors: Optional[Sequence] = None) -> bool:
    """
    Appartenance à l'adhérence de L⁻¹.
    Matrice inversible : l'inverse doit s'annuler hors du support.
    Matrice singulière : tous les mineurs fournis doivent s'annuler.
    """
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    values = _as_array(a)
    _check_size(values, model)

    if np.linalg.cond(values) < 1.0 / tol:
        inverse = np.linalg.inv(values)
        off = inverse[~model.support_mask]
        return bool(np.abs(off).max(initial=0.0) <= tol * np.abs(inverse).max())

    if minors is None:
        raise NeedsMinorsError("Matrice singulière : une liste de mineurs est nécessaire")
    if len(minors) == 0:
        raise InvalidArgumentError("Liste de mineurs vide : appartenance indécidable")
    rows = np.array([m.rows for m in minors])
    cols = np.array([m.cols for m in minors])
    dets, scales = minor_values(values, rows, cols)
    return bool(np.all(np.abs(dets) <= tol * np.maximum(scales, np.finfo(float).tiny)))
