"""
Polynômes univariés à coefficients entiers exacts.

Héberge les déterminants tridiagonaux P_k, les polynômes caractéristiques du
recensement (par parité du cycle), leurs racines numériques et les identités
de factorisation / divisibilité utilisées dans l'argument de lissité.
L'arithmétique exacte est déléguée à sympy.Poly sur ZZ.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly

from app.config import settings
from app.models.schemas import PolynomialPayload, RootSetPayload
from app.utils.errors import InvalidArgumentError, RootResidualError, SimplicityError

logger = logging.getLogger(__name__)

_x = sympy.Symbol("x")


def _as_int(value) -> int:
    if isinstance(value, bool):
        raise InvalidArgumentError(f"Coefficient booléen refusé : {value!r}")
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise InvalidArgumentError(f"Coefficient non entier : {value}")
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, sympy.Rational):
        if value.q != 1:
            raise InvalidArgumentError(f"Coefficient non entier : {value}")
        return int(value.p)
    raise InvalidArgumentError(f"Coefficient non entier : {value!r}")


@dataclass(frozen=True)
class Polynomial:
    """
    Polynôme dense, coeffs[i] = coefficient de x^i.
    Le dernier coefficient stocké est non nul ; le polynôme nul est ().
    """
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        values = [_as_int(c) for c in self.coeffs]
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, "coeffs", tuple(values))

    # -------------------------
    # Constructeurs
    # -------------------------
    @classmethod
    def constant(cls, c: int) -> "Polynomial":
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c: int = 1) -> "Polynomial":
        if degree < 0:
            raise InvalidArgumentError(f"Degré négatif : {degree}")
        return cls((0,) * degree + (c,))

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "Polynomial":
        return cls(tuple(sympy.Rational(c) for c in reversed(poly.all_coeffs())))

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly.from_list(list(reversed(self.coeffs)) or [0], _x, domain=sympy.ZZ)

    # -------------------------
    # Propriétés
    # -------------------------
    @property
    def degree(self) -> int:
        """-1 pour le polynôme nul"""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_even(self) -> bool:
        """Seules les puissances paires ont un coefficient non nul"""
        return all(c == 0 for c in self.coeffs[1::2])

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    # -------------------------
    # Arithmétique exacte
    # -------------------------
    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Polynomial.from_sympy(self.to_sympy() + other.to_sympy())

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Polynomial.from_sympy(self.to_sympy() - other.to_sympy())

    def __rsub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Polynomial.from_sympy(self.to_sympy() * other.to_sympy())

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise InvalidArgumentError(f"Exposant négatif : {exponent}")
        return Polynomial.from_sympy(self.to_sympy() ** exponent)

    def __divmod__(self, divisor) -> Tuple["Polynomial", "Polynomial"]:
        """
        Division euclidienne exacte sur Q.
        Le quotient et le reste doivent être entiers (c'est le cas dès que le
        diviseur est unitaire au signe près, ce qui couvre tous nos usages).
        """
        divisor = _coerce(divisor)
        if divisor is None:
            return NotImplemented
        if divisor.is_zero:
            raise ZeroDivisionError("Division par le polynôme nul")
        quotient, remainder = self.to_sympy().div(divisor.to_sympy())
        return Polynomial.from_sympy(quotient), Polynomial.from_sympy(remainder)

    def __floordiv__(self, divisor) -> "Polynomial":
        return divmod(self, divisor)[0]

    def __mod__(self, divisor) -> "Polynomial":
        return divmod(self, divisor)[1]

    # -------------------------
    # Analyse
    # -------------------------
    def __call__(self, x):
        """Évaluation de Horner (entier, flottant ou complexe)"""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial.from_sympy(self.to_sympy().diff(_x))

    def to_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def evaluation_scale(self, x: complex) -> float:
        """Σ |c_i| |x|^i : échelle naturelle de l'erreur d'évaluation"""
        r = abs(x)
        return float(sum(abs(c) * r ** i for i, c in enumerate(self.coeffs)))

    def to_payload(self) -> PolynomialPayload:
        return PolynomialPayload(coeffs=list(self.coeffs))

    @classmethod
    def from_payload(cls, payload: PolynomialPayload) -> "Polynomial":
        return cls(tuple(payload.coeffs))

    def __repr__(self) -> str:
        if self.is_zero:
            return "Polynomial(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if i == 0 else f"{c}*x^{i}")
        return "Polynomial(" + " + ".join(terms) + ")"


def _coerce(value) -> Optional[Polynomial]:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, np.integer, Fraction)) and not isinstance(value, bool):
        return Polynomial((value,))
    return None


X = Polynomial((0, 1))
ONE = Polynomial((1,))
ZERO = Polynomial()


# ============================================
# DÉTERMINANTS TRIDIAGONAUX
# ============================================

@lru_cache(maxsize=None)
def p_poly(k: int) -> Polynomial:
    """
    P_k = det(M_k(x)) par la récurrence P_k = P_{k-1} - x² P_{k-2},
    avec la convention des continuants P_{-1} = 0, P_0 = 1.
    """
    if k < -1:
        raise InvalidArgumentError(f"P_k n'est défini que pour k >= -1 (reçu {k})")
    if k == -1:
        return ZERO
    if k == 0:
        return ONE
    previous, current = ZERO, ONE
    x2 = X * X
    for _ in range(k):
        previous, current = current, current - x2 * previous
    return current


def _require_m(m: int) -> None:
    if m < 2:
        raise InvalidArgumentError(f"m doit être >= 2 (reçu {m})")


def char_poly_odd(m: int) -> Polynomial:
    """Cycle impair 2m+1 : P_{m-1} + x P_{m-2}"""
    _require_m(m)
    result = p_poly(m - 1) + X * p_poly(m - 2)
    assert result.degree == m - 1, f"degré inattendu {result.degree} pour m={m}"
    return result


def char_poly_even_plus(m: int) -> Polynomial:
    """Cycle pair 2m, famille M^+ : P_{m-1} - x² P_{m-3}"""
    _require_m(m)
    return p_poly(m - 1) - X * X * p_poly(m - 3)


def char_poly_even_minus(m: int) -> Polynomial:
    """Cycle pair 2m, famille M^- : P_{m-2}"""
    _require_m(m)
    return p_poly(m - 2)


# ============================================
# RACINES
# ============================================

@dataclass(frozen=True)
class RootSet:
    roots: Tuple[complex, ...]
    source: Polynomial
    tolerance: float

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def min_separation(self) -> float:
        if len(self.roots) < 2:
            return float("inf")
        values = np.array(self.roots, dtype=complex)
        gaps = np.abs(values[:, None] - values[None, :])
        gaps[np.diag_indices(len(values))] = np.inf
        return float(gaps.min())

    def to_payload(self) -> RootSetPayload:
        return RootSetPayload(
            roots=[[float(r.real), float(r.imag)] for r in self.roots],
            source=self.source.to_payload(),
            tolerance=self.tolerance,
        )


def _newton_polish(coeffs: np.ndarray, guess: complex, max_iter: int = 50) -> complex:
    derivative = npoly.polyder(coeffs)
    z = complex(guess)
    for _ in range(max_iter):
        slope = npoly.polyval(z, derivative)
        if slope == 0:
            break
        step = npoly.polyval(z, coeffs) / slope
        z -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(z)):
            break
    return complex(z)


def _canonical_order(value: complex) -> Tuple[float, float]:
    return (round(value.real, 12), round(value.imag, 12))


def roots(p: Polynomial, tol: Optional[float] = None) -> RootSet:
    """
    Toutes les racines complexes : valeurs propres de la matrice compagnon
    (normalisation unitaire) puis au plus 50 pas de Newton par racine.
    """
    tol = settings.ROOT_TOL if tol is None else tol
    if p.is_zero:
        raise InvalidArgumentError("Le polynôme nul n'a pas d'ensemble de racines fini")
    if p.degree == 0:
        return RootSet(roots=(), source=p, tolerance=tol)

    coeffs = p.to_array()
    guesses = np.linalg.eigvals(npoly.polycompanion(coeffs))

    polished = []
    for guess in guesses:
        z = _newton_polish(coeffs, guess)
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        residual = abs(npoly.polyval(z, coeffs))
        if residual > tol * p.evaluation_scale(z):
            raise RootResidualError(f"Racine {z} de {p} : résidu {residual:.3e}")
        polished.append(z)

    polished.sort(key=_canonical_order)
    result = RootSet(roots=tuple(polished), source=p, tolerance=tol)

    separation = result.min_separation()
    if separation <= 10 * tol:
        raise SimplicityError(f"Racines confondues pour {p} (écart {separation:.3e})")

    logger.debug(f"{len(polished)} racines pour {p}, écart minimal {separation:.3e}")
    return result


# ============================================
# IDENTITÉS DE FACTORISATION
# ============================================

def _require_cycle(n: int) -> None:
    if n < 4:
        raise InvalidArgumentError(f"n doit être >= 4 (reçu {n})")


def tangency_poly(n: int) -> Polynomial:
    """x^{n-2} + (-1)^n P_{n-2}"""
    _require_cycle(n)
    sign = 1 if n % 2 == 0 else -1
    return Polynomial.monomial(n - 2) + sign * p_poly(n - 2)


def tangency_factors(n: int) -> Tuple[Polynomial, Polynomial]:
    """
    (facteur complémentaire, facteur du recensement) :
    n = 2m+1 → (P_m - x P_{m-1}, P_{m-1} + x P_{m-2}),
    n = 2m   → (P_{m-1}, P_{m-1} - x² P_{m-3}).
    """
    _require_cycle(n)
    m, odd = divmod(n, 2)
    if odd:
        return p_poly(m) - X * p_poly(m - 1), char_poly_odd(m)
    return p_poly(m - 1), char_poly_even_plus(m)


def factorization_check(n: int) -> bool:
    """
    Vérifie coefficient par coefficient que P_{n-2} + (-1)^n x^{n-2} est le
    produit des deux facteurs, et donc que tangency_poly(n) = (-1)^n · produit.
    """
    first, second = tangency_factors(n)
    product = first * second
    sign = 1 if n % 2 == 0 else -1
    exact = p_poly(n - 2) + sign * Polynomial.monomial(n - 2) == product
    stated = tangency_poly(n) == sign * product
    if not (exact and stated):
        logger.warning(f"Factorisation en défaut pour n={n}")
    return exact and stated


def divisibility_check(m: int) -> bool:
    """P_{m-1} + x P_{m-2} divise P_{2m-2} (cycle impair n = 2m+1)"""
    _require_m(m)
    _, remainder = divmod(p_poly(2 * m - 2), char_poly_odd(m))
    return remainder.is_zero


def factor_separation_check(n: int, tol: Optional[float] = None) -> bool:
    """Aucune racine du facteur du recensement n'annule le facteur complémentaire"""
    tol = settings.ROOT_TOL if tol is None else tol
    complementary, census = tangency_factors(n)
    for r in roots(census, tol):
        if abs(complementary(r)) <= tol * max(complementary.evaluation_scale(r), 1.0):
            logger.warning(f"n={n} : la racine {r} annule aussi le facteur complémentaire")
            return False
    return True


def simple_roots_check(k: int, tol: Optional[float] = None) -> bool:
    """Les racines de P_k sont simples (garde de simplicité de roots())"""
    try:
        roots(p_poly(k), tol)
    except SimplicityError:
        return False
    return True
