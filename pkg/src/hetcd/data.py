"""Column-oriented sample matrix with named variables, plus CSV round-tripping."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionError, UnknownVariable


@dataclass(frozen=True)
class Dataset:
    names: tuple
    values: np.ndarray  # shape (n, d)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise DimensionError(
                f"values of shape {values.shape} do not match {len(self.names)} names")
        if len(set(self.names)) != len(self.names):
            raise ConfigError("duplicate variable names")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.names)})

    @classmethod
    def from_columns(cls, columns: dict) -> "Dataset":
        names = list(columns)
        return cls(tuple(names), np.column_stack([np.asarray(columns[v], float) for v in names]))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def col_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.col_index(name)]

    def columns(self, names: Sequence[str]) -> np.ndarray:
        return self.values[:, [self.col_index(v) for v in names]]

    def select(self, names: Sequence[str]) -> "Dataset":
        return Dataset(tuple(names), self.columns(names))

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv_text(cls, text: str, source: str = "<csv>") -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ConfigError(f"{source}: empty file")
        names = [h.strip() for h in rows[0]]
        values = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise ConfigError(
                    f"{source}:{lineno}: expected {len(names)} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
            if not all(np.isfinite(vals)):
                raise ConfigError(f"{source}:{lineno}: non-finite value")
            values.append(vals)
        if not values:
            raise ConfigError(f"{source}: no data rows")
        return cls(tuple(names), np.array(values))

    @classmethod
    def read_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            return cls.from_csv_text(fh.read(), source=str(path))


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
