"""CSV loading and schema checks for the simulator's artifact files.

Loaders are strict: a file with missing, extra or reordered columns is
rejected up front, naming the offending column, rather than silently
misreading data.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

SCHEMAS = {
    "bands": [
        "qx",
        "dgamma",
        "re_E_plus",
        "im_E_plus",
        "re_E_minus",
        "im_E_minus",
        "spin_plus",
        "spin_minus",
        "ep_flag",
    ],
    "speedsweep": ["speed", "band_index_final"],
    "pointsource": ["angle", "arclen", "qx", "dgamma", "band_index"],
    "natfront": ["angle", "radius_measured", "radius_predicted"],
    "phasediagram": ["x_m", "h", "band_index_final"],
    "boundary": ["x_m", "h_star"],
}


class SchemaError(Exception):
    """Input CSV does not match the documented schema."""


def load_table(path: Path, schema: str) -> dict[str, np.ndarray]:
    """Read a CSV into named float columns, enforcing the exact header."""
    expected = SCHEMAS[schema]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != expected:
            for col in expected:
                if col not in header:
                    raise SchemaError(f"{path}: missing column {col!r}")
            for col in header:
                if col not in expected:
                    raise SchemaError(f"{path}: unexpected column {col!r}")
            raise SchemaError(f"{path}: columns out of order: {header}")
        rows = [[float(cell) for cell in row] for row in reader]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(expected)}


def pivot_grid(x: np.ndarray, y: np.ndarray, values: dict[str, np.ndarray]):
    """Reshape outer-x, inner-y row order back into 2D arrays.

    Returns the unique axes plus each value column as an (nx, ny) array.
    """
    xs = np.unique(x)
    ys = np.unique(y)
    if xs.size * ys.size != x.size:
        raise SchemaError("rows do not form a complete grid")
    order = np.lexsort((y, x))
    grids = {}
    for name, col in values.items():
        grids[name] = col[order].reshape(xs.size, ys.size)
    return xs, ys, grids


def first_finite(values: np.ndarray) -> float:
    for v in values:
        if math.isfinite(v):
            return float(v)
    return float("nan")
