import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import typer

from app.config import settings
from app.models.identity_schemas import AcceptanceResponse, AcceptanceRow
from app.models.schemas import RunConfig
from app.routes.common import OutputFormat, finish, handle_errors, output_fields, show_table
from app.routes.identities import identity_sweep
from app.utils.certify import certify_census, harvest_minors
from app.utils.cycle_model import CycleModel, SymMatrix, m_matrix
from app.utils.errors import CycleModelError
from app.utils.export import emit
from app.utils.intersect import count_check, enumerate_points, ml_degree_formula
from app.utils.mle import critical_points_oracle, run_generic_oracle, solve_mle

logger = logging.getLogger(__name__)

router = typer.Typer()

CERTIFY_MAX_N = 8
ORACLE_SIZES = (4, 5)
ORACLE_SAMPLES = 3
IDENTITY_MAX_N = 40
MLE_ROUND_TRIP = range(4, 11)
MLE_RANDOM_SAMPLES = 20


def _stage(stage: str, n: Optional[int], run) -> AcceptanceRow:
    try:
        passed, detail = run()
        return AcceptanceRow(stage=stage, n=n, passed=passed, detail=detail)
    except CycleModelError as e:
        logger.error(f"❌ {stage} n={n} : {e}")
        return AcceptanceRow(stage=stage, n=n, passed=False, detail=str(e))


def _certify_stage(report, n: int, threads: int):
    minors = report.minors or harvest_minors(n)
    certificates = certify_census(report.points, minors, CycleModel(n), threads)
    worst = min(c.sigma_ratio for c in certificates)
    return all(c.passed for c in certificates), f"{len(certificates)} points, pire σ {worst:.2e}"


def _oracle_stage(n: int, seed: int):
    counts = []
    for sample in range(ORACLE_SAMPLES):
        report = run_generic_oracle(n, seed=seed + 100 * sample)
        counts.append(report.distinct_critical_points)
    formula = ml_degree_formula(n)
    return all(c == formula for c in counts), f"{counts} pour {formula}"


def _identity_oracle_stage(seed: int):
    report = critical_points_oracle(4, np.eye(4), seed=seed, formulation="adjugate")
    census = [p.matrix for p in enumerate_points(4).points]
    gap = max(min(point.distance(c) for c in census) for point in report.points)
    passed = report.distinct_critical_points == len(census) and gap <= 1e-6
    return passed, f"{report.distinct_critical_points}/{len(census)} en S = Id, écart {gap:.1e}"


def _mle_round_trip_stage():
    gaps = []
    for n in MLE_ROUND_TRIP:
        k0 = m_matrix(n, 0.2, "plus").entries.real
        result = solve_mle(SymMatrix(np.linalg.inv(k0)))
        gaps.append(float(np.abs(result.K_hat.entries - k0).max() / np.abs(k0).max()))
    return max(gaps) <= 1e-8, f"pire écart relatif {max(gaps):.1e}"


def _mle_random_stage(seed: int):
    model = CycleModel(5)
    rng = np.random.default_rng(seed)
    worst = 0.0
    positive = True
    for _ in range(MLE_RANDOM_SAMPLES):
        g = rng.standard_normal((5, 5))
        s = g @ g.T + 5 * np.eye(5)
        result = solve_mle(s)
        sigma = result.Sigma_hat.entries.real
        gap = np.abs(sigma - s)[model.support_rows, model.support_cols].max()
        worst = max(worst, float(gap))
        positive &= bool(np.linalg.eigvalsh(result.K_hat.entries.real).min() > 0)
    return worst <= 1e-8 and positive, f"{MLE_RANDOM_SAMPLES} S, pire écart {worst:.1e}"


@router.command("all")
@handle_errors
def run_all(
        n_range: str = typer.Option("4..12", "--n-range", help="Plage A..B du recensement"),
        seed: int = typer.Option(settings.DEFAULT_SEED, "--seed"),
        threads: int = typer.Option(settings.THREADS, "--threads", min=1),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Toute la chaîne : comptage, certificats, identités, oracle et MLE"""
    config = RunConfig(command="all", n_range=n_range, seed=seed, threads=threads, **output_fields(fmt, output))
    low, high = config.bounds()
    rows: List[AcceptanceRow] = []

    for result in count_check(range(low, high + 1)):
        rows.append(AcceptanceRow(
            stage="count",
            n=result.n,
            passed=result.passed,
            detail=result.error or f"{result.report.distinct_count}/{result.report.formula_count}",
        ))
        if result.report is not None and result.n <= CERTIFY_MAX_N:
            rows.append(_stage("certify", result.n, lambda: _certify_stage(result.report, result.n, threads)))

    identity_rows = identity_sweep(IDENTITY_MAX_N, seed, settings.IDENTITY_SAMPLES)
    failed_identities = [r for r in identity_rows if not r.passed]
    rows.append(AcceptanceRow(
        stage="identities",
        passed=not failed_identities,
        detail=f"{len(identity_rows) - len(failed_identities)}/{len(identity_rows)}",
    ))

    for n in ORACLE_SIZES:
        rows.append(_stage("oracle", n, lambda: _oracle_stage(n, seed)))
    rows.append(_stage("oracle_identity", 4, lambda: _identity_oracle_stage(seed)))
    rows.append(_stage("mle_round_trip", None, _mle_round_trip_stage))
    rows.append(_stage("mle_random", 5, lambda: _mle_random_stage(seed)))

    show_table("Validation", ["étape", "n", "ok", "détail"],
               [(r.stage, r.n, r.passed, r.detail) for r in rows])

    failed = [r for r in rows if not r.passed]
    response = AcceptanceResponse(
        config=config,
        rows=rows,
        passed_count=len(rows) - len(failed),
        failed_count=len(failed),
        all_pass=not failed,
    )
    emit(response, fmt.value, output)
    finish(not failed)
