"""
Erreurs du domaine.

Chaque erreur hérite aussi de l'exception standard qu'elle précise, pour que
l'appelant puisse attraper `ValueError` ou `ArithmeticError` sans connaître
ce module. Les routes CLI convertissent ces erreurs en codes de sortie.
"""


class CycleModelError(Exception):
    """Base de toutes les erreurs du projet"""


# ============================================
# ARGUMENTS
# ============================================

class InvalidArgumentError(CycleModelError, ValueError):
    """Précondition violée (indice, dimension, variante...)"""


class NeedsMinorsError(CycleModelError, ValueError):
    """Matrice singulière sans liste de mineurs pour trancher"""


class DomainError(CycleModelError, ValueError):
    """Matrice hors du cône défini positif"""


# ============================================
# CALCUL NUMÉRIQUE
# ============================================

class SimplicityError(CycleModelError, ArithmeticError):
    """Deux racines polies coïncident : racine multiple inattendue"""


class RootResidualError(CycleModelError, ArithmeticError):
    """Racine polie qui ne satisfait pas la borne de résidu"""


class SingularCensusMatrixError(CycleModelError, ArithmeticError):
    """M_n^±(x) numériquement singulière en une racine du recensement"""


class NormalizationError(CycleModelError, ArithmeticError):
    """Diagonale de l'inverse trop petite pour normaliser"""


class MembershipError(CycleModelError, ArithmeticError):
    """Point construit qui viole les invariants d'appartenance"""


class SampleSingularError(CycleModelError, ArithmeticError):
    """Échantillon K singulier malgré les décalages diagonaux"""


class ConvergenceError(CycleModelError, ArithmeticError):
    """Nombre maximal d'itérations atteint"""


# ============================================
# ORACLE
# ============================================

class OracleOvercountError(CycleModelError, ArithmeticError):
    """Plus de points critiques distincts que le degré ML"""


class NonGenericSampleError(CycleModelError, ArithmeticError):
    """Toutes les matrices S tirées restent mal conditionnées"""
