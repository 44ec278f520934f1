"""Loading of qprob output artifacts.

Two shapes are accepted:
  * CSV with a header row and float columns (the CLI's .csv output);
  * JSON envelopes {"metadata": ..., "payload": {"columns", "rows", ...}}.

Both are reduced to a Dataset; the JSON route additionally keeps the
payload's normalization residual so renders can verify the file they were
handed is internally consistent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


class MissingColumn(KeyError):
    """A recipe referenced a column the input file does not carry."""

    def __init__(self, column, available):
        super().__init__(column)
        self.column = column
        self.available = list(available)

    def __str__(self):
        return (f"column {self.column!r} not found "
                f"(file has {', '.join(self.available)})")


@dataclass
class Dataset:
    path: str
    columns: list
    rows: np.ndarray                 # shape (n_rows, n_columns)
    kind: str = "sweep"
    residual: float = None           # normalization residual, JSON inputs only
    aleph: float = None

    def column(self, name) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumn(name, self.columns)
        return self.rows[:, self.columns.index(name)]

    def has(self, name) -> bool:
        return name in self.columns


def _load_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(path=str(path), columns=header,
                   rows=np.array(rows, dtype=float))


def _load_json(path) -> Dataset:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        payload = doc["payload"]
        columns = list(payload["columns"])
        rows = payload["rows"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a result envelope ({exc})") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(path=str(path), columns=columns,
                   rows=np.array(rows, dtype=float),
                   kind=payload.get("kind", "sweep"),
                   residual=payload.get("normalization_residual"),
                   aleph=payload.get("aleph"))


def load_dataset(path) -> Dataset:
    if str(path).endswith(".json"):
        return _load_json(path)
    return _load_csv(path)


def check_normalization(ds: Dataset, tol: float = 1e-9) -> None:
    """Re-derive the normalization sum from the file and compare it with the
    residual the producing tool embedded; mismatch means the rows and the
    metadata do not describe the same data."""
    if ds.residual is None:
        return
    if ds.kind == "distribution":
        total = complex(np.sum(ds.column("re_weight")),
                        np.sum(ds.column("im_weight")))
    elif ds.kind == "table":
        total = complex(np.sum(ds.column("re_q")), np.sum(ds.column("im_q")))
    else:
        return
    if abs(total - 1.0) > ds.residual + tol:
        raise ValueError(
            f"{ds.path}: recomputed sum {total} is off by "
            f"{abs(total - 1.0):.3e}, but the file claims a residual of "
            f"{ds.residual:.3e}"
        )
