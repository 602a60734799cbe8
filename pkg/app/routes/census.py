import logging
from pathlib import Path
from typing import Optional

import typer

from app.config import settings
from app.models.census_schemas import CertifyResponse, CountCheckResponse
from app.models.schemas import RunConfig
from app.routes.common import OutputFormat, finish, handle_errors, output_fields, show_table
from app.utils.certify import certify_census, harvest_minors
from app.utils.cycle_model import CycleModel
from app.utils.export import emit, export_census
from app.utils.intersect import census_family_counts, count_check, enumerate_points

logger = logging.getLogger(__name__)

router = typer.Typer()


# ============================================
# RECENSEMENT
# ============================================

@router.command("enumerate")
@handle_errors
def enumerate_census(
        n: int = typer.Option(..., "--n", help="Nombre de sommets (>= 4)"),
        tol: float = typer.Option(settings.MEMBERSHIP_TOL, "--tol"),
        with_certificates: bool = typer.Option(False, "--certify", help="Joindre un certificat de rang à chaque point"),
        threads: int = typer.Option(settings.THREADS, "--threads", min=1),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
        export_dir: Optional[Path] = typer.Option(None, "--export-dir", help="Un CSV par point + index.csv"),
):
    """Points de L⁻¹ ∩ (Id + L^⊥), comparés au degré ML"""
    config = RunConfig(command="enumerate", n=n, tol=tol, threads=threads, **output_fields(fmt, output))
    report = enumerate_points(n, tol)

    if with_certificates:
        minors = report.minors or harvest_minors(n)
        report = report.with_certificates(certify_census(report.points, minors, CycleModel(n), threads))

    counts = census_family_counts(report)
    show_table(f"Recensement n={n}", ["famille", "points"], counts.items())
    logger.info(f"n={n} : {report.distinct_count} points / formule {report.formula_count}")

    if export_dir is not None:
        export_census(report, export_dir)

    response = report.to_response().model_copy(update={"config": config})
    emit(response, fmt.value, output)

    passed = report.count_matches
    if with_certificates:
        passed = passed and all(p.certificate.passed for p in report.points)
    finish(passed)


@router.command("count")
@handle_errors
def count(
        n_range: str = typer.Option("4..10", "--n-range", help="Plage A..B"),
        tol: float = typer.Option(settings.MEMBERSHIP_TOL, "--tol"),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Nombre de points recensés contre la formule, pour chaque n de la plage"""
    config = RunConfig(command="count", n_range=n_range, tol=tol, **output_fields(fmt, output))
    low, high = config.bounds()
    rows = [result.to_row() for result in count_check(range(low, high + 1), tol)]

    show_table("Comptage", ["n", "formule", "recensés", "ok"],
               [(r.n, r.formula_count, r.distinct_count, r.passed) for r in rows])

    all_pass = all(r.passed for r in rows)
    emit(CountCheckResponse(config=config, rows=rows, all_pass=all_pass), fmt.value, output)
    finish(all_pass)


# ============================================
# CERTIFICATS
# ============================================

@router.command("certify")
@handle_errors
def certify(
        n: int = typer.Option(..., "--n", help="Nombre de sommets (>= 4)"),
        tol: float = typer.Option(settings.MEMBERSHIP_TOL, "--tol"),
        seed: int = typer.Option(settings.DEFAULT_SEED, "--seed"),
        threads: int = typer.Option(settings.THREADS, "--threads", min=1),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Rang plein de la jacobienne en chaque point du recensement"""
    config = RunConfig(command="certify", n=n, tol=tol, seed=seed, threads=threads,
                       **output_fields(fmt, output))
    minors = harvest_minors(n, seed=seed)
    report = enumerate_points(n, tol, minors=minors)
    certificates = certify_census(report.points, minors, CycleModel(n), threads)

    worst = min((c.sigma_ratio for c in certificates), default=None)
    failed = [c for c in certificates if not c.passed]
    show_table(f"Certificats n={n}", ["points", "mineurs", "échecs", "pire σ"],
               [(len(certificates), len(minors), len(failed), worst)])

    response = CertifyResponse(
        config=config,
        n=n,
        points_checked=len(certificates),
        all_pass=not failed,
        worst_sigma_ratio=worst,
        minor_count=len(minors),
        certificates=[c.to_response() for c in certificates],
    )
    emit(response, fmt.value, output)
    finish(not failed)
