"""CSV ingestion and the two bundled example datasets."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .exceptions import DomainError
from .model import ModelData

__all__ = [
    "DatasetDescriptor",
    "load_csv",
    "load_dataset",
    "exclude_rows",
    "BUNDLED_DATASETS",
]


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    data: ModelData
    transform: str
    outlier_rows: tuple  # 1-based row indices conventionally treated as outliers

    @property
    def n_obs(self) -> int:
        return self.data.n_obs


def _parse_cell(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise DomainError(
            f"non-numeric value {text!r} at row {row}, column {col}"
        ) from None


def load_csv(
    path,
    response_column,
    covariate_columns,
    header: bool = True,
    add_intercept: bool = True,
    transform: str = "none",
) -> ModelData:
    """Read a comma-separated numeric table into model data.

    Columns may be named (requires ``header=True``) or given as 0-based
    positions.  ``transform="log_log"`` applies the natural logarithm to the
    response and to every covariate (intercept excluded); values must then
    be positive.  Missing values are not supported.

    Raises
    ------
    DomainError
        On non-numeric cells (with row/column location), unknown column
        names, or empty files.
    """
    if transform not in ("none", "log_log"):
        raise DomainError(f"unknown transform {transform!r}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DomainError(f"no data rows in {path}")
    names = None
    if header:
        names = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DomainError(f"no data rows in {path}")

    def column_index(spec):
        if isinstance(spec, (int, np.integer)):
            return int(spec)
        if names is None:
            raise DomainError(f"column {spec!r} named but the file has no header")
        if spec not in names:
            raise DomainError(f"no column named {spec!r} (have {names})")
        return names.index(spec)

    y_idx = column_index(response_column)
    x_idx = [column_index(c) for c in covariate_columns]
    n = len(rows)
    y = np.empty(n)
    x = np.empty((n, len(x_idx)))
    for r, row in enumerate(rows):
        for idx in [y_idx, *x_idx]:
            if idx >= len(row) or row[idx].strip() == "":
                raise DomainError(f"missing value at row {r + 1}, column {idx}")
        y[r] = _parse_cell(row[y_idx], r + 1, y_idx)
        for c, idx in enumerate(x_idx):
            x[r, c] = _parse_cell(row[idx], r + 1, idx)
    if transform == "log_log":
        if np.any(y <= 0) or np.any(x <= 0):
            raise DomainError("log transform requires strictly positive values")
        y = np.log(y)
        x = np.log(x)
    if add_intercept:
        x = np.column_stack([np.ones(n), x])
    return ModelData(design=x, response=y)


def _bundled_path(filename):
    return resources.files("renyireg.datasets").joinpath(filename)


def _load_brain_weight() -> DatasetDescriptor:
    with resources.as_file(_bundled_path("brain_weight.csv")) as path:
        data = load_csv(
            path,
            response_column="brain_g",
            covariate_columns=["body_kg"],
            transform="log_log",
        )
    return DatasetDescriptor(
        name="brain_weight", data=data, transform="log_log", outlier_rows=(6, 16, 25)
    )


def _load_first_word() -> DatasetDescriptor:
    with resources.as_file(_bundled_path("first_word.csv")) as path:
        data = load_csv(
            path, response_column="gesell_score", covariate_columns=["age_months"]
        )
    return DatasetDescriptor(
        name="first_word", data=data, transform="none", outlier_rows=(18,)
    )


BUNDLED_DATASETS = {
    "brain_weight": _load_brain_weight,
    "first_word": _load_first_word,
}


def load_dataset(name: str) -> DatasetDescriptor:
    """Load a bundled dataset by name; see datasets/PROVENANCE.md."""
    if name not in BUNDLED_DATASETS:
        raise DomainError(
            f"unknown dataset {name!r}; bundled: {sorted(BUNDLED_DATASETS)}"
        )
    return BUNDLED_DATASETS[name]()


def exclude_rows(data: ModelData, rows_1based) -> ModelData:
    """Drop the given 1-based rows (the bundled outlier convention)."""
    rows = sorted(set(int(r) for r in rows_1based))
    if not rows:
        return data
    if rows[0] < 1 or rows[-1] > data.n_obs:
        raise DomainError(f"row indices must lie in 1..{data.n_obs}, got {rows}")
    keep = np.ones(data.n_obs, dtype=bool)
    keep[[r - 1 for r in rows]] = False
    return data.subset(keep)
