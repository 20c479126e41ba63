"""CSV and manifest files for receiver time series.

CSV layout: a header ``t,<r_1>,<r_2>,...`` naming the receiver coordinates
in metres, then one row per time sample. Floats are written with 17
significant digits so a file round-trips exactly and identical runs give
identical bytes.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import FieldResult, Geometry
from .errors import EmptyInputError, ValidationError
from .excitation import SampledSignal

#: Relative spread of the time steps tolerated for a "uniform" grid.
UNIFORM_TOL = 1e-6


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Table:
    """Time column plus one column per receiver; the grid may be non-uniform."""

    times: np.ndarray
    receivers: tuple
    data: np.ndarray  # shape (n_times, n_receivers)

    @classmethod
    def from_result(cls, result: FieldResult) -> "Table":
        return cls(result.times, tuple(result.receivers), result.matrix())


def write_table_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_field_csv(result: FieldResult, path) -> Path:
    header = ["t"] + [fmt(r) for r in result.receivers]
    rows = np.column_stack([result.times, result.matrix()])
    return write_table_csv(path, header, rows)


def read_table(path) -> Table:
    """Parse a field CSV (ours or external)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyInputError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    if len(header) < 2:
        raise ValidationError(f"{path}: need a time column and at least one receiver column")
    try:
        receivers = tuple(float(h) for h in header[1:])
    except ValueError:
        raise ValidationError(
            f"{path}: receiver header entries must be numbers, got {header[1:]!r}"
        ) from None
    if not body:
        raise EmptyInputError(f"{path}: no data rows")
    try:
        values = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric data ({exc})") from None
    if values.ndim != 2 or values.shape[1] != len(header):
        raise ValidationError(f"{path}: every row needs {len(header)} columns")
    times = values[:, 0]
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValidationError(f"{path}: time column must be strictly increasing")
    return Table(times, receivers, values[:, 1:])


def read_field_csv(path, dim: int = 1, r0: float = 0.0, material: str = "external") -> FieldResult:
    """Read a CSV on a uniform grid back into a :class:`FieldResult`."""
    table = read_table(path)
    t = table.times
    if t.size < 2:
        raise ValidationError(f"{path}: need at least two samples to infer the sample rate")
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if np.max(np.abs(steps - dt)) > UNIFORM_TOL * dt:
        raise ValidationError(f"{path}: time grid is not uniform")
    fs = 1.0 / dt
    signals = [SampledSignal(fs, table.data[:, j], t[0]) for j in range(table.data.shape[1])]
    return FieldResult(Geometry(dim, table.receivers, r0), material, signals)


def manifest_path(output) -> Path:
    return Path(str(output) + ".manifest.json")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def write_manifest(primary, command: str, params: dict, material: dict | None,
                   outputs, extra: dict | None = None, timestamp: str | None = None) -> Path:
    """Write ``<primary>.manifest.json`` describing one run and all its outputs."""
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc = {
        "command": command,
        "parameters": params,
        "material": material,
        "outputs": [str(o) for o in outputs],
        "version": __version__,
        "timestamp": timestamp,
    }
    if extra:
        doc.update(extra)
    path = manifest_path(primary)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def output_dir(default: str | None = None) -> Path:
    """Directory for relative output paths: ``$EFBENCH_OUTPUT_DIR`` or ``default`` or cwd."""
    return Path(os.environ.get("EFBENCH_OUTPUT_DIR") or default or ".")
