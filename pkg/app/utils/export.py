"""Sorties : JSON, résumé CSV d'une ligne, export CSV du recensement point par point."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")


def scalar_summary(response: BaseModel) -> Dict[str, Any]:
    """Champs scalaires de premier niveau, l'en-tête config aplati en config.<champ>"""
    data = response.model_dump(mode="json")
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        if key == "config" and isinstance(value, dict):
            for sub_key, sub_value in value.items():
                flat[f"config.{sub_key}"] = sub_value
        elif not isinstance(value, (list, dict)):
            flat[key] = value
    return flat


def render(response: BaseModel, fmt: str = "json") -> str:
    if fmt == "json":
        return response.model_dump_json(indent=2)
    if fmt == "csv":
        return pd.DataFrame([scalar_summary(response)]).to_csv(index=False)
    raise ValueError(f"Format inconnu : {fmt}")


def emit(response: BaseModel, fmt: str = "json", output: Optional[Path] = None) -> None:
    """Écrit sur stdout, ou dans `output` si fourni"""
    text = render(response, fmt)
    if output is None:
        print(text)
        return
    output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"✅ Sortie écrite : {output}")


def export_census(report, directory: Path) -> Path:
    """
    Un CSV par point (format long i, j, re, im) et un index.csv qui référence
    chaque fichier avec sa famille, x et ses signes.
    """
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for index, point in enumerate(report.points):
        filename = f"point_{index:05d}.csv"
        point.matrix.to_frame().to_csv(directory / filename, index=False)
        rows.append({
            "index": index,
            "family": point.family.value,
            "x_re": None if point.x is None else point.x.real,
            "x_im": None if point.x is None else point.x.imag,
            "signs": json.dumps(list(point.sign_pattern.signs)),
            "file": filename,
        })

    frame = pd.DataFrame(rows)
    index_path = directory / "index.csv"
    frame.to_csv(index_path, index=False)

    for family, group in frame.groupby("family"):
        logger.info(f"   {family} : {len(group)} point(s)")
    logger.info(f"✅ Recensement n={report.n} exporté dans {directory}")
    return index_path
