import logging
import sys
from typing import List, Optional

import click
import typer

from app.config import settings
from app.routes import census, formulas, identities, pipeline, statistics
from app.routes.common import EXIT_USAGE

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    stream=sys.stderr,
)

app = typer.Typer(
    name="cycleml",
    help=f"{settings.PROJECT_NAME} : recensement, certificats et oracle du modèle gaussien du cycle",
    add_completion=False,
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)

# Routes
app.add_typer(formulas.router)
app.add_typer(census.router)
app.add_typer(identities.router)
app.add_typer(statistics.router)
app.add_typer(pipeline.router)


def run(argv: Optional[List[str]] = None) -> int:
    """Point d'entrée programmatique : retourne le code de sortie au lieu de quitter"""
    try:
        code = app(args=argv, standalone_mode=False, prog_name="cycleml")
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(run())
