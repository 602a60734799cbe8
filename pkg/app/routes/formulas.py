from pathlib import Path
from typing import Optional

import typer

from app.models.census_schemas import FormulaResponse, FormulaTableResponse
from app.models.schemas import RunConfig, parse_n_range
from app.routes.common import OutputFormat, finish, handle_errors, output_fields, show_table
from app.utils.export import emit
from app.utils.intersect import formula_table, ml_degree_formula, variety_degree_formula

router = typer.Typer()


# ============================================
# FORMULES FERMÉES
# ============================================

def _print_value(command: str, kind: str, n: int, value: int, fmt: Optional[OutputFormat],
                 output: Optional[Path]) -> None:
    if fmt is None and output is None:
        typer.echo(value)
        return
    fmt = fmt or OutputFormat.json
    config = RunConfig(command=command, n=n, **output_fields(fmt, output))
    response = FormulaResponse(config=config, n=n, kind=kind, value=value)
    emit(response, fmt.value, output)


@router.command("formula")
@handle_errors
def formula(
        n: int = typer.Option(..., "--n", help="Nombre de sommets du cycle (>= 3)"),
        fmt: Optional[OutputFormat] = typer.Option(None, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Degré de vraisemblance maximale (n-3)·2^(n-2)+1"""
    _print_value("formula", "ml_degree", n, ml_degree_formula(n), fmt, output)
    finish(True)


@router.command("degree")
@handle_errors
def degree(
        n: int = typer.Option(..., "--n", help="Nombre de sommets du cycle (>= 3)"),
        fmt: Optional[OutputFormat] = typer.Option(None, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Degré de la variété L⁻¹"""
    _print_value("degree", "variety_degree", n, variety_degree_formula(n), fmt, output)
    finish(True)


@router.command("table")
@handle_errors
def table(
        n_range: str = typer.Option("4..12", "--n-range", help="Plage A..B"),
        fmt: OutputFormat = typer.Option(OutputFormat.json, "--format"),
        output: Optional[Path] = typer.Option(None, "--output"),
):
    """Les deux formules sur une plage de n"""
    config = RunConfig(command="table", n_range=n_range, **output_fields(fmt, output))
    low, high = parse_n_range(n_range)
    rows = formula_table(range(low, high + 1))
    show_table("Formules", ["n", "degré ML", "degré de L⁻¹"],
               [(r.n, r.ml_degree, r.variety_degree) for r in rows])
    emit(FormulaTableResponse(config=config, rows=rows), fmt.value, output)
    finish(True)
