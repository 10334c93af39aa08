"""Two-or-more column numeric tables written as tab-separated text."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

__all__ = ["SweepTable", "format_number"]


def format_number(x):
    """17 significant digits, so a float survives a text round trip."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepTable:
    """Abscissa plus one or more value columns.

    Parameters
    ----------
    columns : tuple of str
        Column names, abscissa first.
    abscissa : ndarray, shape (n,)
        Strictly increasing.
    values : ndarray, shape (n, m)
        Finite values, one column per remaining name.
    """

    columns: tuple
    abscissa: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.abscissa, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != x.size or len(self.columns) != v.shape[1] + 1:
            raise DomainError("column names do not match table shape")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise DomainError("abscissa must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("table entries must be finite")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "values", v)

    def column(self, name):
        i = self.columns.index(name)
        return self.abscissa if i == 0 else self.values[:, i - 1]

    def to_tsv(self):
        lines = ["#" + "\t".join(self.columns)]
        for x, row in zip(self.abscissa, self.values):
            lines.append("\t".join([format_number(x)] + [format_number(r) for r in row]))
        return "\n".join(lines) + "\n"

    def write(self, path):
        Path(path).write_bytes(self.to_tsv().encode("ascii"))

    @classmethod
    def read(cls, path):
        text = Path(path).read_text()
        header, *rows = text.splitlines()
        names = tuple(header.lstrip("#").split("\t"))
        data = np.array([[float(c) for c in r.split("\t")] for r in rows if r], dtype=float)
        data = data.reshape(-1, len(names))
        return cls(names, data[:, 0], data[:, 1:])
