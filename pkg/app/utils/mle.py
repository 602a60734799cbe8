"""
Vraisemblance gaussienne du modèle du cycle.

- solve_mle : Newton amorti sur les 2n coordonnées du support de K, avec
  recherche linéaire d'Armijo qui refuse les pas hors du cône positif.
- critical_points_oracle : chaque départ aléatoire suit le flot de Newton
  jusqu'à une racine, puis des boucles de seconds membres complètent les
  racines trouvées. Deux formulations du système.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from app.config import settings
from app.models.mle_schemas import MleResultResponse, OracleReportResponse
from app.utils.certify import harvest_minors
from app.utils.cycle_model import CycleModel, SymMatrix, _as_array, cofactors3, in_L_inverse
from app.utils.errors import (
    ConvergenceError,
    DomainError,
    InvalidArgumentError,
    NonGenericSampleError,
    OracleOvercountError,
)
from app.utils.intersect import canonical_keys, ml_degree_formula

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-12
FORMULATIONS = ("concentration", "adjugate")
CLUSTER_RELATIVE = 1e-6
DIVERGENCE_BOUND = 1e8

# Suivi de chemins
TRACK_STEP_INITIAL = 0.05
TRACK_STEP_MAX = 0.2
TRACK_STEP_MIN = 1e-10
TRACK_GROWTH_STREAK = 3
TRACK_CORRECTOR_ITER = 3
TRACK_FIRST_CORRECTION = 0.1
TRACK_CORRECTOR_TOL = 1e-8


# ============================================
# VRAISEMBLANCE
# ============================================

def _real_symmetric(a, name: str) -> np.ndarray:
    values = _as_array(a)
    if np.abs(values.imag).max(initial=0.0) > 1e-12 * max(1.0, float(np.abs(values).max())):
        raise DomainError(f"{name} doit être réelle")
    return values.real


def _cholesky_logdet(k: np.ndarray) -> Optional[float]:
    try:
        lower = np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        return None
    return float(2.0 * np.log(np.diag(lower)).sum())


def log_lik(k, s) -> float:
    """log det K - tr(S K)"""
    k_values = _real_symmetric(k, "K")
    s_values = _real_symmetric(s, "S")
    logdet = _cholesky_logdet(k_values)
    if logdet is None:
        raise DomainError("K n'est pas définie positive")
    return logdet - float(np.sum(s_values * k_values))


def _edge_weights(model: CycleModel) -> np.ndarray:
    return np.where(model.support_rows == model.support_cols, 1.0, 2.0)


def likelihood_gradient(k, s, model: CycleModel) -> np.ndarray:
    """(K⁻¹ - S) sur le support, arêtes comptées deux fois"""
    k_values = _real_symmetric(k, "K")
    if _cholesky_logdet(k_values) is None:
        raise DomainError("K n'est pas définie positive")
    diff = np.linalg.inv(k_values) - _real_symmetric(s, "S")
    return diff[model.support_rows, model.support_cols] * _edge_weights(model)


def _support_basis(model: CycleModel) -> np.ndarray:
    basis = np.zeros((2 * model.n, model.n, model.n))
    index = np.arange(2 * model.n)
    basis[index, model.support_rows, model.support_cols] = 1.0
    basis[index, model.support_cols, model.support_rows] = 1.0
    return basis


def likelihood_hessian(sigma: np.ndarray, model: CycleModel) -> np.ndarray:
    """H_qr = -tr(Σ E_q Σ E_r)"""
    basis = _support_basis(model)
    return -np.einsum("ij,qjk,kl,rli->qr", sigma, basis, sigma, basis, optimize=True)


@dataclass(frozen=True, eq=False)
class MleResult:
    K_hat: SymMatrix
    Sigma_hat: SymMatrix
    iterations: int
    grad_norm: float
    loglik: float
    trace: List[float] = field(default_factory=list)

    def to_response(self) -> MleResultResponse:
        return MleResultResponse(
            n=self.K_hat.n,
            K_hat=self.K_hat.to_payload(),
            Sigma_hat=self.Sigma_hat.to_payload(),
            iterations=self.iterations,
            grad_norm=self.grad_norm,
            loglik=self.loglik,
            trace=self.trace,
        )


def solve_mle(s, tol: Optional[float] = None, max_iter: Optional[int] = None) -> MleResult:
    tol = settings.MLE_TOL if tol is None else tol
    max_iter = settings.MLE_MAX_ITER if max_iter is None else max_iter
    s_values = _real_symmetric(s, "S")
    if tol <= 0:
        raise InvalidArgumentError("La tolérance doit être positive")
    if _cholesky_logdet(s_values) is None:
        raise DomainError("S n'est pas définie positive")

    model = CycleModel(s_values.shape[0])
    weights = _edge_weights(model)
    # arrêt sur ‖g‖ ≤ tol·max(1, ‖π(S)‖)
    threshold = tol * max(1.0, float(np.linalg.norm(s_values[model.support_rows, model.support_cols] * weights)))
    theta = np.zeros(2 * model.n)
    theta[:model.n] = 1.0 / np.diag(s_values)

    k = model.from_support(theta)
    value = log_lik(k, s_values)
    trace = [value]

    for iteration in range(max_iter + 1):
        sigma = np.linalg.inv(k)
        gradient = (sigma - s_values)[model.support_rows, model.support_cols] * weights
        grad_norm = float(np.linalg.norm(gradient))
        if grad_norm <= threshold:
            logger.info(f"MLE n={model.n} : convergence en {iteration} itérations (‖g‖={grad_norm:.2e})")
            return MleResult(
                K_hat=SymMatrix(k),
                Sigma_hat=SymMatrix(sigma),
                iterations=iteration,
                grad_norm=grad_norm,
                loglik=value,
                trace=trace,
            )
        if iteration == max_iter:
            break

        direction = np.linalg.solve(-likelihood_hessian(sigma, model), gradient)
        slope = float(gradient @ direction)
        # sous la résolution flottante de log_lik, Armijo n'est plus décidable
        exact_regime = slope <= 1e-13 * max(1.0, abs(value))

        step = 1.0
        while True:
            trial = model.from_support(theta + step * direction)
            logdet = _cholesky_logdet(trial)
            if logdet is not None:
                trial_value = logdet - float(np.sum(s_values * trial))
                if exact_regime or trial_value >= value + ARMIJO * step * slope:
                    break
            step *= BACKTRACK
            if step < MIN_STEP:
                raise ConvergenceError(f"Recherche linéaire bloquée (itération {iteration})")

        theta = theta + step * direction
        k, value = trial, trial_value
        trace.append(value)

    raise ConvergenceError(f"MLE non convergé après {max_iter} itérations (‖g‖={grad_norm:.2e})")



# ============================================
# ORACLE MULTI-DÉPARTS
# ============================================

@dataclass(frozen=True, eq=False)
class OracleReport:
    n: int
    S: SymMatrix
    starts: int
    seed: int
    formulation: str
    points: List[SymMatrix]
    residuals: List[float]
    converged_runs: int
    ill_conditioned: int
    failed_runs: int
    singular_rejected: int = 0
    loops: int = 0

    @property
    def distinct_critical_points(self) -> int:
        return len(self.points)

    @property
    def formula_count(self) -> int:
        return ml_degree_formula(self.n)

    @property
    def exceeds_formula(self) -> bool:
        return self.distinct_critical_points > self.formula_count

    def to_response(self, include_points: bool = True) -> OracleReportResponse:
        return OracleReportResponse(
            n=self.n,
            formulation=self.formulation,
            S=self.S.to_payload(),
            starts=self.starts,
            seed=self.seed,
            distinct_critical_points=self.distinct_critical_points,
            formula_count=self.formula_count,
            converged_runs=self.converged_runs,
            ill_conditioned=self.ill_conditioned,
            failed_runs=self.failed_runs,
            singular_rejected=self.singular_rejected,
            loops=self.loops,
            max_residual=max(self.residuals) if self.residuals else None,
            exceeds_formula=self.exceeds_formula,
            points=[p.to_payload() for p in self.points] if include_points else [],
        )


System = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def _batched_solve(jacobian: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(jacobian, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bij,bj->bi", np.linalg.pinv(jacobian), rhs)


def _evaluate(system: System, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Évalue le système ; les lignes non finies sont marquées invalides"""
    count, size = z.shape
    values = np.zeros((count, size), dtype=complex)
    jacobian = np.zeros((count, size, size), dtype=complex)
    valid = np.isfinite(z).all(axis=1)
    if valid.any():
        rows = np.nonzero(valid)[0]
        v, j, ok = system(z[rows])
        values[rows], jacobian[rows] = v, j
        valid[rows] = ok & np.isfinite(v).all(axis=1) & np.isfinite(j).all(axis=(1, 2))
    return values, jacobian, valid


def _solve(jacobian: np.ndarray, rhs: np.ndarray, valid: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rhs)
    if valid.any():
        out[valid] = _batched_solve(jacobian[valid], rhs[valid])
    return out


def _newton_batch(system: System, z: np.ndarray, max_iter: int) -> Tuple[np.ndarray, np.ndarray]:
    """Newton simultané sur un lot de points déjà proches d'une racine ; retourne (z, échec)"""
    z = z.copy()
    active = np.ones(len(z), dtype=bool)
    failed = np.zeros(len(z), dtype=bool)
    for _ in range(max_iter):
        index = np.nonzero(active)[0]
        if not len(index):
            break
        values, jacobian, valid = _evaluate(system, z[index])
        failed[index[~valid]] = True
        active[index[~valid]] = False
        index, values, jacobian = index[valid], values[valid], jacobian[valid]
        if not len(index):
            continue

        step = _batched_solve(jacobian, -values)
        z[index] += step
        size = np.abs(z[index]).max(axis=1)
        blown = ~np.isfinite(z[index]).all(axis=1) | (size > DIVERGENCE_BOUND)
        settled = np.abs(step).max(axis=1) <= 1e-14 * (1.0 + size)
        failed[index[blown]] = True
        active[index[blown | settled]] = False
    return z, failed


def _track(system: System, z: np.ndarray, start: np.ndarray, end: np.ndarray,
           max_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Suit chaque ligne du lot le long de F(z) = (1 - t)·start + t·end, de t = 0 à t = 1.

    Prédicteur de Runge-Kutta d'ordre 4 sur dz/dt = J⁻¹ (end - start), puis
    correcteur de Newton à t + h. Le pas est refusé (et divisé par deux) si la
    première correction dépasse TRACK_FIRST_CORRECTION ou si le correcteur ne
    converge pas ; il double après TRACK_GROWTH_STREAK pas acceptés.
    """
    z = z.astype(complex).copy()
    count = len(z)
    t = np.zeros(count)
    h = np.full(count, TRACK_STEP_INITIAL)
    streak = np.zeros(count, dtype=int)
    active = np.ones(count, dtype=bool)
    failed = np.zeros(count, dtype=bool)
    direction = end - start

    def velocity(points, d):
        _, jacobian, valid = _evaluate(system, points)
        return _solve(jacobian, d, valid), valid

    for _ in range(max_steps):
        index = np.nonzero(active)[0]
        if not len(index):
            break
        zi, ti, d = z[index], t[index], direction[index]
        hi = np.minimum(h[index], 1.0 - ti)
        step = hi[:, None]
        scale = 1.0 + np.abs(zi).max(axis=1)

        k1, ok = velocity(zi, d)
        k2, ok2 = velocity(zi + 0.5 * step * k1, d)
        k3, ok3 = velocity(zi + 0.5 * step * k2, d)
        k4, ok4 = velocity(zi + step * k3, d)
        ok = ok & ok2 & ok3 & ok4
        corrected = zi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        reached = ti + hi
        target = (1.0 - reached)[:, None] * start[index] + reached[:, None] * end[index]
        first = np.zeros(len(index))
        last = np.full(len(index), np.inf)
        for iteration in range(TRACK_CORRECTOR_ITER):
            values, jacobian, valid = _evaluate(system, corrected)
            ok &= valid
            delta = _solve(jacobian, target - values, ok)
            corrected = corrected + delta
            last = np.abs(delta).max(axis=1)
            if iteration == 0:
                first = last
        accept = (ok & np.isfinite(corrected).all(axis=1)
                  & (first <= TRACK_FIRST_CORRECTION * scale)
                  & (last <= TRACK_CORRECTOR_TOL * scale))

        moved = index[accept]
        z[moved] = corrected[accept]
        t[moved] = reached[accept]
        streak[moved] += 1
        grow = moved[streak[moved] >= TRACK_GROWTH_STREAK]
        h[grow] = np.minimum(2.0 * h[grow], TRACK_STEP_MAX)
        streak[grow] = 0

        refused = index[~accept]
        h[refused] *= 0.5
        streak[refused] = 0

        done = moved[t[moved] >= 1.0 - 1e-12]
        t[done] = 1.0
        active[done] = False

        lost = np.concatenate([refused[h[refused] < TRACK_STEP_MIN],
                               moved[np.abs(z[moved]).max(axis=1) > DIVERGENCE_BOUND]])
        failed[lost] = True
        active[lost] = False

    # pas épuisés : le chemin n'a pas atteint t = 1
    failed |= active
    return z, failed


def _box(rng: np.random.Generator, shape: Tuple[int, int], scale: float) -> np.ndarray:
    half = scale / 2.0
    return half * (rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape))


def _concentration_system(s_values: np.ndarray, model: CycleModel) -> System:
    """Inconnues : les 2n coordonnées de K ; équations (K⁻¹)_p = S_p"""
    rows, cols = model.support_rows, model.support_cols
    halves = np.where(rows == cols, 0.5, 1.0)
    target = s_values[rows, cols]

    def system(theta):
        k = np.zeros((len(theta), model.n, model.n), dtype=complex)
        k[:, rows, cols] = theta
        k[:, cols, rows] = theta
        valid = np.linalg.cond(k) < 1e12
        values = np.zeros_like(theta)
        jacobian = np.zeros((len(theta), len(rows), len(rows)), dtype=complex)
        if valid.any():
            sigma = np.linalg.inv(k[valid])
            values[valid] = sigma[:, rows, cols] - target
            # ∂(K⁻¹)_ij/∂θ_ab = -(Σ_ia Σ_bj + Σ_ib Σ_aj), pondéré 1/2 sur la diagonale
            jacobian[valid] = -(
                sigma[:, rows[:, None], rows[None, :]] * sigma[:, cols[None, :], cols[:, None]]
                + sigma[:, rows[:, None], cols[None, :]] * sigma[:, rows[None, :], cols[:, None]]
            ) * halves[None, None, :]
        return values, jacobian, valid

    return system


def _cofactors(blocks: np.ndarray) -> np.ndarray:
    size = blocks.shape[-1]
    if size == 3:
        return cofactors3(blocks)
    if size == 1:
        return np.ones_like(blocks)
    cof = np.empty_like(blocks)
    for u in range(size):
        for v in range(size):
            minor = np.delete(np.delete(blocks, u, axis=-2), v, axis=-1)
            cof[..., u, v] = (-1) ** (u + v) * np.linalg.det(minor)
    return cof


def _adjugate_system(s_values: np.ndarray, model: CycleModel) -> System:
    """
    Inconnues : les entrées hors support de Σ ∈ S + L^⊥ ;
    équations adj(Σ)_ij = (-1)^{i+j} det(Σ privée de la ligne j et de la colonne i) = 0.
    """
    n = model.n
    pairs = model.off_support
    count = len(pairs)
    position = {pair: t for t, pair in enumerate(pairs)}
    position.update({(j, i): t for (i, j), t in list(position.items())})

    keep_rows = np.array([[r for r in range(n) if r != j] for i, j in pairs])
    keep_cols = np.array([[c for c in range(n) if c != i] for i, j in pairs])
    signs = np.array([(-1.0) ** (i + j) for i, j in pairs])

    scatter = np.zeros((count, (n - 1) ** 2, count))
    for q in range(count):
        for u in range(n - 1):
            for v in range(n - 1):
                t = position.get((keep_rows[q, u], keep_cols[q, v]))
                if t is not None:
                    scatter[q, u * (n - 1) + v, t] += signs[q]

    off_rows = np.array([p[0] for p in pairs])
    off_cols = np.array([p[1] for p in pairs])

    def system(z):
        sigma = np.broadcast_to(s_values.astype(complex), (len(z), n, n)).copy()
        sigma[:, off_rows, off_cols] = z
        sigma[:, off_cols, off_rows] = z
        blocks = sigma[:, keep_rows[:, :, None], keep_cols[:, None, :]]
        values = signs[None, :] * np.linalg.det(blocks)
        cof = _cofactors(blocks).reshape(len(z), count, -1)
        jacobian = np.einsum("bqk,qkr->bqr", cof, scatter)
        return values, jacobian, np.ones(len(z), dtype=bool)

    return system


def _cluster(solutions: np.ndarray) -> np.ndarray:
    """Indices des représentants, dans l'ordre des clés canoniques"""
    if not len(solutions):
        return np.array([], dtype=int)
    keys = canonical_keys(solutions, settings.DEDUP_DECIMALS)
    _, first = np.unique(keys, axis=0, return_index=True)
    kept: List[int] = []
    for index in first:
        candidate = solutions[index]
        scale = max(1.0, float(np.abs(candidate).max()))
        if all(np.abs(solutions[j] - candidate).max() > CLUSTER_RELATIVE * scale for j in kept):
            kept.append(int(index))
    return np.array(kept, dtype=int)


@dataclass
class _Screened:
    solutions: np.ndarray
    residuals: np.ndarray
    converged: int
    ill: int
    singular: int


def _sigma_from_off_support(s_values: np.ndarray, model: CycleModel, z: np.ndarray) -> np.ndarray:
    sigma = s_values.astype(complex)
    for t, (i, j) in enumerate(model.off_support):
        sigma[i, j] = sigma[j, i] = z[t]
    return sigma


def _screen(system: System, z: np.ndarray, tol: float, formulation: str,
            s_values: np.ndarray, model: CycleModel) -> _Screened:
    """
    Polit les extrémités de chemins et ne garde que les racines : résidu ≤ tol,
    jacobienne bien conditionnée et, pour la forme adjointe, Σ régulière ou
    singulière mais dans l'adhérence de L⁻¹ (mineurs récoltés nuls).
    """
    size = z.shape[1]
    if not len(z):
        return _Screened(np.zeros((0, size), dtype=complex), np.zeros(0), 0, 0, 0)

    z, failed = _newton_batch(system, z, settings.ORACLE_MAX_NEWTON)
    values, jacobian, valid = _evaluate(system, z)
    valid &= ~failed
    residual = np.where(valid, np.abs(values).max(axis=1), np.inf)
    conditioning = np.full(len(z), np.inf)
    if valid.any():
        conditioning[valid] = np.linalg.cond(jacobian[valid])
    converged = residual <= tol

    # forme adjointe : adj(Σ) s'annule aussi sur les Σ de rang ≤ n - 2
    spurious = np.zeros(len(z), dtype=bool)
    if formulation == "adjugate" and converged.any():
        candidates = np.nonzero(converged)[0]
        sigmas = np.array([_sigma_from_off_support(s_values, model, z[c]) for c in candidates])
        spectra = np.linalg.svd(sigmas, compute_uv=False)
        degenerate = candidates[spectra[:, -1] < settings.ORACLE_SINGULAR_RATIO * spectra[:, 0]]
        if len(degenerate):
            minors = harvest_minors(model.n)
            for c in degenerate:
                sigma = _sigma_from_off_support(s_values, model, z[c])
                spurious[c] = not in_L_inverse(sigma, model, minors=minors)
    singular = int(np.count_nonzero(spurious))
    if singular:
        logger.warning(f"Oracle n={model.n} : {singular} Σ singulière(s) hors de L⁻¹ écartée(s)")

    well_posed = conditioning <= settings.ORACLE_COND_LIMIT
    accepted = converged & well_posed & ~spurious
    ill = int(np.count_nonzero(converged & ~well_posed & ~spurious))
    return _Screened(z[accepted], residual[accepted], int(np.count_nonzero(converged)), ill, singular)


def _complete_by_loops(system: System, known: np.ndarray, residuals: np.ndarray, rng: np.random.Generator,
                       scale: float, tol: float, s_values: np.ndarray,
                       model: CycleModel) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Transporte les racines connues le long de boucles 0 → c₁ → c₂ → 0 dans
    l'espace des seconds membres F(z) = c ; une boucle peut permuter les
    racines et en révéler de nouvelles. Arrêt après ORACLE_STALL_LOOPS boucles
    sans nouveauté.
    """
    size = known.shape[1]
    stall = loops = 0
    while stall < settings.ORACLE_STALL_LOOPS and loops < settings.ORACLE_MAX_LOOPS:
        loops += 1
        c1, c2 = scale * (rng.standard_normal((2, size)) + 1j * rng.standard_normal((2, size)))
        z = known.copy()
        for a, b in ((np.zeros(size), c1), (c1, c2), (c2, np.zeros(size))):
            start = np.broadcast_to(a, z.shape)
            end = np.broadcast_to(b, z.shape)
            z, failed = _track(system, z, start, end, settings.ORACLE_MAX_STEPS)
            z = z[~failed]

        screened = _screen(system, z, tol, "concentration", s_values, model)
        pool = np.vstack([known, screened.solutions])
        pool_residuals = np.concatenate([residuals, screened.residuals])
        kept = np.sort(_cluster(pool))
        if len(kept) > len(known):
            logger.debug(f"Boucle {loops} : {len(kept) - len(known)} nouvelle(s) racine(s)")
            stall = 0
        else:
            stall += 1
        known, residuals = pool[kept], pool_residuals[kept]
    return known, residuals, loops


def critical_points_oracle(n: int, s, starts: Optional[int] = None, seed: Optional[int] = None,
                           tol: float = 1e-9, formulation: str = "concentration") -> OracleReport:
    """
    Chaque départ aléatoire suit le flot de Newton F(z) = (1 - t)·F(z₀) jusqu'à
    une racine. Pour la forme de concentration, les racines trouvées sont
    ensuite complétées par boucles. Le compte reste une borne inférieure.
    """
    starts = settings.oracle_starts(n) if starts is None else starts
    seed = settings.DEFAULT_SEED if seed is None else seed
    if n not in (4, 5, 6):
        raise InvalidArgumentError(f"L'oracle est limité à n ∈ {{4, 5, 6}} (reçu {n})")
    if formulation not in FORMULATIONS:
        raise InvalidArgumentError(f"Formulation inconnue : {formulation}")
    if starts < 1:
        raise InvalidArgumentError("Au moins un départ")

    s_values = _real_symmetric(s, "S")
    if s_values.shape != (n, n):
        raise InvalidArgumentError(f"S de taille {s_values.shape} pour n={n}")
    model = CycleModel(n)
    rng = np.random.default_rng(seed)

    if formulation == "concentration":
        system = _concentration_system(s_values, model)
        center = np.concatenate([np.ones(n), np.zeros(n)]).astype(complex)
    else:
        system = _adjugate_system(s_values, model)
        center = np.array([s_values[i, j] for i, j in model.off_support], dtype=complex)

    z0 = center[None, :] + _box(rng, (starts, len(center)), settings.ORACLE_BOX_SCALE)
    values, _, valid = _evaluate(system, z0)
    z, failed = _track(system, z0[valid], values[valid], np.zeros_like(values[valid]),
                       settings.ORACLE_MAX_STEPS)
    screened = _screen(system, z[~failed], tol, formulation, s_values, model)
    failed_runs = int(starts - np.count_nonzero(valid) + np.count_nonzero(failed))

    kept = np.sort(_cluster(screened.solutions))
    solutions, residuals = screened.solutions[kept], screened.residuals[kept]

    loops = 0
    if formulation == "concentration" and len(solutions):
        scale = settings.ORACLE_LOOP_SCALE * max(1.0, float(np.abs(s_values).max()))
        solutions, residuals, loops = _complete_by_loops(system, solutions, residuals, rng, scale, tol,
                                                         s_values, model)
        order = _cluster(solutions)
        solutions, residuals = solutions[order], residuals[order]

    points = []
    for solution in solutions:
        if formulation == "concentration":
            points.append(SymMatrix(model.from_support(solution)))
        else:
            points.append(SymMatrix(_sigma_from_off_support(s_values, model, solution)))

    report = OracleReport(
        n=n,
        S=SymMatrix(s_values),
        starts=starts,
        seed=seed,
        formulation=formulation,
        points=points,
        residuals=[float(r) for r in residuals],
        converged_runs=screened.converged,
        ill_conditioned=screened.ill,
        failed_runs=failed_runs,
        singular_rejected=screened.singular,
        loops=loops,
    )
    logger.info(
        f"Oracle n={n} ({formulation}) : {report.distinct_critical_points} points critiques "
        f"sur {starts} départs, {loops} boucle(s), {screened.ill} mal conditionnés"
    )
    if report.exceeds_formula:
        raise OracleOvercountError(
            f"Oracle n={n} : {report.distinct_critical_points} points critiques > {report.formula_count}"
        )
    return report


def oracle_covariances(report: OracleReport) -> List[SymMatrix]:
    if report.formulation == "adjugate":
        return list(report.points)
    return [SymMatrix(np.linalg.inv(p.entries)) for p in report.points]


def sample_generic_covariance(n: int, seed: Union[int, np.random.Generator, None] = None,
                              scale: float = 0.3) -> SymMatrix:
    """Id + scale·(G + Gᵀ)/2, tiré à nouveau tant que la matrice n'est pas définie positive"""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    while True:
        noise = rng.standard_normal((n, n))
        s = np.eye(n) + scale * (noise + noise.T) / 2.0
        if _cholesky_logdet(s) is not None:
            return SymMatrix(s)


def run_generic_oracle(n: int, starts: Optional[int] = None, seed: Optional[int] = None,
                       max_resamples: int = 5, formulation: str = "concentration") -> OracleReport:
    """Tire S ; si une solution a une jacobienne mal conditionnée, S est retirée"""
    seed = settings.DEFAULT_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    for attempt in range(max_resamples + 1):
        s = sample_generic_covariance(n, rng)
        report = critical_points_oracle(n, s, starts, seed + attempt, formulation=formulation)
        if report.ill_conditioned == 0:
            return report
        logger.warning(f"Oracle n={n} : S non générique (essai {attempt + 1}), nouveau tirage")
    raise NonGenericSampleError(f"Oracle n={n} : aucune S générique en {max_resamples + 1} tirages")
