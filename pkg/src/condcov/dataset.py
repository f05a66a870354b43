"""Observation triples (X, A, Y) and their CSV/JSON persistence."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class Dataset:
    """n observations of covariates, exposure and outcome.

    Attributes
    ----------
    x : ndarray of shape (n, d)
        Covariates. Built-in generators keep every coordinate in [0, 1].
    a : ndarray of shape (n,)
        Exposure / treatment.
    y : ndarray of shape (n,)
        Outcome.
    meta : dict
        Generator metadata (kind, seed, noise variance, true functional
        value, smoothness constant, ...). Free-form but JSON-serializable.
    """

    x: NDArray[np.float64]
    a: NDArray[np.float64]
    y: NDArray[np.float64]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        a = np.asarray(self.a, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"x must be 2-d, got shape {x.shape}")
        n = x.shape[0]
        if a.shape != (n,) or y.shape != (n,):
            raise ValueError(
                f"a and y must have shape ({n},), got {a.shape} and {y.shape}"
            )
        if n < 3:
            raise ValueError(f"need at least 3 observations for three folds, got {n}")
        if not (np.isfinite(x).all() and np.isfinite(a).all() and np.isfinite(y).all()):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def subset(self, idx: NDArray[np.intp]) -> "Dataset":
        """Row subset as a new Dataset (meta carried over)."""
        idx = np.asarray(idx)
        return Dataset(self.x[idx], self.a[idx], self.y[idx], dict(self.meta))

    @property
    def psi_true(self) -> Optional[float]:
        """True expected conditional covariance, when the generator knows it."""
        v = self.meta.get("psi_true")
        return None if v is None else float(v)


def write_csv(ds: Dataset, path: str | Path, sidecar: bool = True) -> None:
    """Write `x1,...,xd,a,y` rows; optionally a metadata JSON sidecar."""
    path = Path(path)
    header = [f"x{j + 1}" for j in range(ds.d)] + ["a", "y"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(ds.n):
            w.writerow(
                [repr(float(v)) for v in ds.x[i]]
                + [repr(float(ds.a[i])), repr(float(ds.y[i]))]
            )
    if sidecar:
        with open(path.with_suffix(path.suffix + ".meta.json"), "w") as fh:
            json.dump(ds.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


class DatasetFormatError(ValueError):
    """Raised when a CSV does not match the `x1,...,xd,a,y` schema."""


def read_csv(path: str | Path) -> Dataset:
    """Read a dataset written by :func:`write_csv` (sidecar optional)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file")
        expected_tail = ["a", "y"]
        if len(header) < 3 or [h.strip() for h in header[-2:]] != expected_tail:
            raise DatasetFormatError(
                f"{path}: header must be x1,...,xd,a,y, got {header}"
            )
        d = len(header) - 2
        for j, name in enumerate(header[:d]):
            if name.strip() != f"x{j + 1}":
                raise DatasetFormatError(
                    f"{path}: covariate column {j + 1} must be named x{j + 1}, got {name!r}"
                )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise DatasetFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {d + 2}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: row {lineno} contains a non-numeric cell"
                )
    if len(rows) < 3:
        raise DatasetFormatError(f"{path}: fewer than 3 data rows")
    arr = np.asarray(rows, dtype=float)
    meta: Dict[str, Any] = {}
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    if sidecar.exists():
        with open(sidecar) as fh:
            meta = json.load(fh)
    return Dataset(arr[:, :d], arr[:, d], arr[:, d + 1], meta)
