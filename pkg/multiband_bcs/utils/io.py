"""Result files: sweep CSV, gap profiles, JSON documents and two-column plot data, all written atomically"""

import csv
import io
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from multiband_bcs.exceptions import OutputNotWritable
from multiband_bcs.models.physics import ModelInstance, dispersion_eval
from multiband_bcs.schemas.models import SweepRecord


logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "run_id",
    "dimension",
    "n_bands",
    "lambda",
    "kappa",
    "tc",
    "tc_found",
    "min_eig_at_tc",
    "channel",
    "grid_points",
    "iterations",
    "log_ratio",
)
FLOAT_COLUMNS = ("lambda", "kappa", "tc", "min_eig_at_tc", "log_ratio")
INT_COLUMNS = ("dimension", "n_bands", "channel", "grid_points", "iterations")


def prepare_output(path: str | Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        raise OutputNotWritable(str(path))
    if not os.access(path, os.W_OK):
        raise OutputNotWritable(str(path))
    return path


def atomic_write(path: str | Path, text: str) -> Path:
    """Write to a temporary file next to path, then rename over it"""
    path = Path(path)
    try:
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="", dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as f:
            f.write(text)
        os.replace(f.name, path)
    except OSError as e:
        logger.error(f"Cannot write {path}: {e}")
        raise OutputNotWritable(str(path.parent))
    return path


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def sweep_csv(records: list[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        row = record.model_dump(by_alias=True)
        writer.writerow([format_value(row[column]) for column in CSV_COLUMNS])
    return buffer.getvalue()


def emit_csv(records: list[SweepRecord], path: str | Path) -> Path:
    return atomic_write(path, sweep_csv(records))


def _parse_value(column: str, text: str):
    if text == "":
        return None
    if column in FLOAT_COLUMNS:
        return float(text)
    if column in INT_COLUMNS:
        return int(text)
    if column == "tc_found":
        return text == "true"
    return text


def parse_csv(path: str | Path) -> list[SweepRecord]:
    with Path(path).open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            SweepRecord.model_validate({column: _parse_value(column, row[column]) for column in CSV_COLUMNS})
            for row in reader
        ]


def gap_csv(model: ModelInstance, solution) -> str:
    """Gap profile per band and grid point, headed by the solve parameters as comment lines"""
    buffer = io.StringIO()
    buffer.write(f"# T={format_value(float(solution.T))}\n")
    buffer.write(f"# lambda={format_value(float(solution.lam))}\n")
    buffer.write(f"# kappa={format_value(float(solution.kappa))}\n")
    buffer.write(f"# residual={format_value(float(solution.residual))}\n")
    buffer.write(f"# iterations={solution.iterations}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("band", "p", "delta", "epsilon", "E"))
    for a, band in enumerate(model.bands):
        p = solution.grid.band_nodes[a]
        delta = solution.band_values(a)
        epsilon = dispersion_eval(band, p)
        energy = np.sqrt(epsilon**2 + delta**2)
        for row in zip(p, delta, epsilon, energy):
            writer.writerow([a + 1, *(format_value(float(value)) for value in row)])
    return buffer.getvalue()


def write_json(path: str | Path, document: BaseModel) -> Path:
    return atomic_write(path, document.model_dump_json(indent=2, by_alias=True) + "\n")


def write_plot_data(path: str | Path, columns: tuple[str, str], x, y) -> Path:
    """Two whitespace-separated columns under a commented header"""
    lines = [f"# {columns[0]} {columns[1]}"]
    lines += [f"{format_value(float(u))} {format_value(float(v))}" for u, v in zip(x, y)]
    return atomic_write(path, "\n".join(lines) + "\n")
