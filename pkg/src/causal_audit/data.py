"""Tabular numeric datasets: validation, CSV round-trips, ordinal encodings."""

import csv
import io as _io
import json
from pathlib import Path as FsPath
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataFormat, UnknownColumn


class Dataset:
    """Named numeric columns of equal length.

    Values are stored as a read-only float64 matrix; all values must be
    finite and column names unique.  Datasets are immutable.
    """

    __slots__ = ("_names", "_matrix", "_index")

    def __init__(self, columns: Sequence):
        names = []
        arrays = []
        for name, values in columns:
            if not isinstance(name, str) or not name:
                raise DataFormat(f"column name must be a nonempty string, got {name!r}")
            arr = np.asarray(values, dtype=float)
            if arr.ndim != 1:
                raise DataFormat(f"column {name!r} must be one-dimensional")
            names.append(name)
            arrays.append(arr)
        if not names:
            raise DataFormat("a dataset needs at least one column")
        if len(set(names)) != len(names):
            raise DataFormat("column names must be unique")
        lengths = {len(a) for a in arrays}
        if len(lengths) != 1:
            raise DataFormat("all columns must have the same length")
        n = lengths.pop()
        if n < 1:
            raise DataFormat("a dataset needs at least one row")
        matrix = np.column_stack(arrays)
        if not np.all(np.isfinite(matrix)):
            raise DataFormat("dataset values must be finite (no NaN or infinity)")
        matrix.setflags(write=False)
        object.__setattr__(self, "_names", tuple(names))
        object.__setattr__(self, "_matrix", matrix)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    @property
    def names(self):
        return self._names

    @property
    def n_rows(self):
        return self._matrix.shape[0]

    @property
    def n_cols(self):
        return self._matrix.shape[1]

    def column(self, name) -> np.ndarray:
        if name not in self._index:
            raise UnknownColumn(f"unknown column {name!r}")
        return self._matrix[:, self._index[name]]

    def matrix(self, names=None) -> np.ndarray:
        """Columns stacked as an (n_rows, len(names)) read-only array."""
        if names is None:
            return self._matrix
        idx = []
        for name in names:
            if name not in self._index:
                raise UnknownColumn(f"unknown column {name!r}")
            idx.append(self._index[name])
        out = self._matrix[:, idx]
        out.setflags(write=False)
        return out

    def take(self, rows) -> "Dataset":
        """A new dataset containing the given row indices, in order."""
        sub = self._matrix[np.asarray(rows, dtype=int), :]
        return Dataset(list(zip(self._names, sub.T)))

    def __repr__(self):
        return f"Dataset({self.n_rows} rows x {self.n_cols} columns)"

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._names == other._names and np.array_equal(self._matrix, other._matrix)


def dataset_to_csv_text(d: Dataset) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.names)
    for row in d.matrix():
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def dataset_from_csv_text(text: str, ordinal: Optional[Mapping] = None) -> Dataset:
    """Parse CSV with a header row; ``ordinal`` maps columns to level lists.

    Cells in an ordinal column may be level names (encoded as their level
    index) or numbers.  All other cells must parse as floats with ``.`` as
    the decimal separator.
    """
    ordinal = dict(ordinal or {})
    reader = csv.reader(_io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise DataFormat("empty CSV input")
    header = rows[0]
    levels = {}
    for name, lv in ordinal.items():
        if name not in header:
            raise DataFormat(f"ordinal encoding names unknown column {name!r}")
        if not isinstance(lv, (list, tuple)) or not all(isinstance(x, str) for x in lv):
            raise DataFormat(f"ordinal levels for {name!r} must be a list of strings")
        levels[header.index(name)] = {level: float(i) for i, level in enumerate(lv)}
    columns = [[] for _ in header]
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormat(f"row {lineno} has {len(row)} cells, expected {len(header)}")
        for i, cell in enumerate(row):
            cell = cell.strip()
            if i in levels and cell in levels[i]:
                columns[i].append(levels[i][cell])
                continue
            try:
                columns[i].append(float(cell))
            except ValueError:
                raise DataFormat(f"row {lineno}, column {header[i]!r}: cannot parse {cell!r}")
    return Dataset(list(zip(header, columns)))


def save_csv(d: Dataset, path):
    FsPath(path).write_text(dataset_to_csv_text(d), encoding="utf-8")


def load_csv(path, ordinal: Optional[Mapping] = None) -> Dataset:
    return dataset_from_csv_text(FsPath(path).read_text(encoding="utf-8"), ordinal)


def load_ordinal_sidecar(path) -> dict:
    """Load an ordinal-encoding sidecar: ``{column: [level0, level1, ...]}``."""
    try:
        data = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormat(f"invalid JSON in encoding file: {exc}") from exc
    if not isinstance(data, dict):
        raise DataFormat("ordinal encoding file must be a JSON object")
    for name, lv in data.items():
        if not isinstance(lv, list) or not all(isinstance(x, str) for x in lv):
            raise DataFormat(f"ordinal levels for {name!r} must be a list of strings")
    return data


def as_dataset(obj, names=None) -> Dataset:
    """Coerce a Dataset, mapping, or 2-D array into a :class:`Dataset`."""
    if isinstance(obj, Dataset):
        return obj
    if isinstance(obj, Mapping):
        return Dataset(list(obj.items()))
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2:
        raise DataFormat("array input must be two-dimensional")
    if names is None:
        names = [f"x{i}" for i in range(arr.shape[1])]
    if len(names) != arr.shape[1]:
        raise DataFormat("number of names must match number of columns")
    return Dataset(list(zip(names, arr.T)))
