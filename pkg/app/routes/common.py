"""Briques communes des commandes : codes de sortie, format, tableau récapitulatif."""

import functools
import logging
from enum import Enum
from typing import Iterable, Sequence

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from app.utils.errors import CycleModelError, DomainError, InvalidArgumentError, NeedsMinorsError

logger = logging.getLogger(__name__)

# Le tableau part sur stderr : stdout reste réservé à la sortie machine
console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


def handle_errors(func):
    """Erreurs d'entrée → code 2, erreurs de calcul → code 1"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except typer.Exit:
            raise
        except (InvalidArgumentError, NeedsMinorsError, DomainError, ValidationError, OSError) as e:
            logger.error(f"❌ Entrée invalide : {e}")
            raise typer.Exit(code=EXIT_USAGE)
        except (CycleModelError, ArithmeticError) as e:
            logger.error(f"❌ Échec du calcul : {e}")
            raise typer.Exit(code=EXIT_FAILURE)
    return wrapper


def show_table(title: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*[_cell(v) for v in row])
    console.print(table)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "[green]✔[/green]" if value else "[red]✘[/red]"
    if isinstance(value, float):
        return f"{value:.3e}"
    return "" if value is None else str(value)


def finish(passed: bool) -> None:
    raise typer.Exit(code=EXIT_OK if passed else EXIT_FAILURE)


def output_fields(fmt: OutputFormat, output) -> dict:
    """Champs de sortie recopiés dans l'en-tête RunConfig"""
    return {"format": fmt.value, "output": None if output is None else str(output)}
