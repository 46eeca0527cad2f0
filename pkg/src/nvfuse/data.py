"""Historical sales tables: CSV loading, writing and row resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ValidationError(ValueError):
    """Bad input: malformed files, invalid configuration, unknown columns."""


class DataError(ValidationError):
    """A CSV file that cannot be turned into a Dataset."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Named numeric columns of equal length. Arrays are read-only."""

    columns: dict[str, np.ndarray]

    def __post_init__(self):
        if not self.columns:
            raise ValidationError("dataset has no columns")
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) != 1:
            raise ValidationError(f"columns have unequal lengths {sorted(lengths)}")
        if lengths.pop() < 2:
            raise ValidationError("a dataset needs at least 2 rows")
        frozen = {}
        for name, values in self.columns.items():
            arr = np.array(values, dtype=np.float64)
            if arr.ndim != 1:
                raise ValidationError(f"column {name!r} is not one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"column {name!r} has non-finite values")
            arr.flags.writeable = False
            frozen[name] = arr
        object.__setattr__(self, "columns", frozen)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ValidationError(f"unknown column {name!r}; have {self.names}") from None

    def column_index(self, name: str) -> int:
        self[name]
        return self.names.index(name)

    def matrix(self) -> np.ndarray:
        """Rows x columns float64 array in column order."""
        return np.column_stack([self.columns[k] for k in self.columns])

    def __eq__(self, other):
        if not isinstance(other, Dataset) or self.names != other.names:
            return NotImplemented if not isinstance(other, Dataset) else False
        return all(np.array_equal(self.columns[k], other.columns[k]) for k in self.columns)

    __hash__ = None


def load_csv(path: str | Path) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise DataError("missing header", line=1)
    header = [h.strip() for h in lines[0].split(",")]
    if any(not h for h in header):
        raise DataError("empty column name in header", line=1)
    seen = set()
    for h in header:
        if h in seen:
            raise DataError(f"duplicate column name {h!r}", line=1)
        seen.add(h)

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            # trailing blank lines are tolerated; interior ones are not
            if any(rest.strip() for rest in lines[lineno:]):
                raise DataError("blank line inside data", line=lineno)
            break
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(cells)}", line=lineno)
        row = []
        for name, cell in zip(header, cells):
            text = cell.strip()
            try:
                value = float(text)
            except ValueError:
                raise DataError(f"non-numeric value {text!r} in column {name!r}", line=lineno) from None
            if not math.isfinite(value):
                raise DataError(f"non-finite value {text!r} in column {name!r}", line=lineno)
            row.append(value)
        rows.append(row)
    if not rows:
        raise DataError("zero data rows", line=2)
    if len(rows) < 2:
        raise DataError("at least 2 data rows are required", line=2)
    arr = np.array(rows, dtype=np.float64)
    return Dataset({name: arr[:, j] for j, name in enumerate(header)})


def write_csv(d: Dataset, path: str | Path) -> None:
    # repr() round-trips doubles exactly
    with Path(path).open("w") as fh:
        fh.write(",".join(d.names) + "\n")
        for row in d.matrix():
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def resample_rows(d: Dataset, indices) -> Dataset:
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValidationError("indices must be a non-empty 1-d sequence")
    bad = (idx < 0) | (idx >= d.n_rows)
    if bad.any():
        raise IndexError(f"row index {int(idx[bad][0])} out of range [0, {d.n_rows})")
    return Dataset({k: v[idx] for k, v in d.columns.items()})
