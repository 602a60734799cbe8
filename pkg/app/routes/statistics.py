import logging
from pathlib import Path
from typing import Optional

import typer

from app.config import settings
from app.models.schemas import MatrixPayload, RunConfig
from app.routes.common import OutputFormat, finish, handle_errors, output_fields, show_table
from app.utils.cycle_model import SymMatrix
from app.utils.errors import InvalidArgumentError
from app.utils.export import emit
from app.utils.mle import critical_points_oracle, run_generic_oracle, sample_generic_covariance, solve_mle

logger = logging.getLogger(__name__)

router = typer.Typer()


def load_matrix(path: Path) -> SymMatrix:
    """Matrice S lue depuis un fichier JSON {n, entries}"""
    payload = MatrixPayload.model_validate_json(path.read_text(encoding="utf-8"))
    return SymMatrix.from_payload(payload)


# ============================================
# ESTIMATEUR DU MAXIMUM DE VRAISEMBLANCE
# ============================================

@router.command("mle")
@handle_errors
def mle(
        n: Optional[int] = typer.Option(None, "--n", help="Dimension si S est tirée au hasard"),
        s_path: Optional[Path] = typer.Option(None, "--s", help="Fichier JSON de la matrice S"),
        seed: int = typer.Option(settings.DEFAULT_SEED, "--seed"),
        tol: float = typer.Option(settings.MLE_TOL, "--tol"),
        max_iter: int = typer.Option(settings.MLE_MAX_ITER, "--max-iter", min=1),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Complétion définie positive : K supporté par le cycle, K⁻¹ = S sur le support"""
    if s_path is None and n is None:
        raise InvalidArgumentError("Il faut --n ou --s")
    s = load_matrix(s_path) if s_path is not None else sample_generic_covariance(n, seed)
    config = RunConfig(command="mle", n=s.n, seed=seed, tol=tol, max_iter=max_iter,
                       **output_fields(fmt, output))

    result = solve_mle(s, tol, max_iter)
    show_table("MLE", ["n", "itérations", "‖g‖", "log-vraisemblance"],
               [(s.n, result.iterations, result.grad_norm, result.loglik)])

    emit(result.to_response().model_copy(update={"config": config}), fmt.value, output)
    finish(True)


# ============================================
# ORACLE DES POINTS CRITIQUES
# ============================================

@router.command("oracle")
@handle_errors
def oracle(
        n: int = typer.Option(..., "--n", help="4, 5 ou 6"),
        starts: Optional[int] = typer.Option(None, "--starts", min=1),
        seed: int = typer.Option(settings.DEFAULT_SEED, "--seed"),
        s_path: Optional[Path] = typer.Option(None, "--s", help="Fichier JSON de S (sinon S générique tirée)"),
        formulation: str = typer.Option("concentration", "--formulation", help="concentration ou adjugate"),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Compte les points critiques complexes de la log-vraisemblance par suivi de chemins multi-départs"""
    starts = settings.oracle_starts(n) if starts is None else starts
    config = RunConfig(command="oracle", n=n, seed=seed, starts=starts, formulation=formulation,
                       **output_fields(fmt, output))

    if s_path is not None:
        report = critical_points_oracle(n, load_matrix(s_path), starts, seed, formulation=formulation)
    else:
        report = run_generic_oracle(n, starts, seed, formulation=formulation)

    show_table(f"Oracle n={n}", ["départs", "convergés", "échoués", "distincts", "formule", "mal conditionnés"],
               [(starts, report.converged_runs, report.failed_runs, report.distinct_critical_points,
                 report.formula_count, report.ill_conditioned)])

    emit(report.to_response().model_copy(update={"config": config}), fmt.value, output)
    finish(report.distinct_critical_points == report.formula_count)
