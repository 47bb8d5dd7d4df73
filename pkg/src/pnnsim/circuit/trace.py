"""Uniform-grid signal traces with CSV round-trip.

CSV format: header row, first column `time_s`, remaining columns named
probes in SI units, LF line endings, full double precision (%.17g) so a
written trace parses back bit-identically.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError


@dataclass
class Trace:
    t: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1:
            raise InvalidInputError("time grid must be one-dimensional")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0.0):
            raise InvalidInputError("time grid must be strictly increasing")
        for name, col in list(self.columns.items()):
            col = np.asarray(col, dtype=float)
            if col.shape != self.t.shape:
                raise InvalidInputError(
                    f"column {name!r} has length {col.size}, expected {self.t.size}")
            self.columns[name] = col

    def __len__(self):
        return self.t.size

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def dt(self) -> float:
        if len(self.t) < 2:
            raise InvalidInputError("trace too short to define a timestep")
        return float(self.t[1] - self.t[0])

    def names(self) -> list[str]:
        return list(self.columns.keys())

    def write_csv(self, path_or_file) -> None:
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            f = open(path_or_file, "w", newline="\n")
            close = True
        else:
            f = path_or_file
        try:
            names = self.names()
            f.write(",".join(["time_s"] + names) + "\n")
            cols = [self.t] + [self.columns[n] for n in names]
            for row in zip(*cols):
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")
        finally:
            if close:
                f.close()

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, path_or_file) -> "Trace":
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            f = open(path_or_file, "r")
            close = True
        else:
            f = path_or_file
        try:
            header = f.readline().strip().split(",")
            if not header or header[0] != "time_s":
                raise InvalidInputError("trace CSV must start with a time_s column")
            data = np.loadtxt(f, delimiter=",", ndmin=2)
        finally:
            if close:
                f.close()
        if data.shape[1] != len(header):
            raise InvalidInputError("trace CSV row width does not match header")
        cols = {name: data[:, i] for i, name in enumerate(header[1:], start=1)}
        return cls(t=data[:, 0], columns=cols)
