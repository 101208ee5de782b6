"""Dense matrices with an explicit real/complex field tag and a JSON form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCHEMA = "specdiag/1"


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        if np.iscomplexobj(a):
            if np.all(a.imag == 0):
                a = a.real.astype(float)
            else:
                a = a.astype(complex)
        else:
            a = a.astype(float)
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.data) else "real"

    @property
    def is_real(self) -> bool:
        return self.field == "real"

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.data).copy()

    def to_json(self) -> dict:
        flat = self.data.ravel()
        if self.is_real:
            entries = flat.tolist()
        else:
            entries = [[z.real, z.imag] for z in flat.tolist()]
        return {"schema": SCHEMA, "rows": self.rows, "cols": self.cols, "field": self.field, "entries": entries}

    @classmethod
    def from_json(cls, obj: dict) -> "DenseMatrix":
        for key in ("rows", "cols", "field", "entries"):
            if key not in obj:
                raise ValueError(f"matrix JSON is missing field '{key}'")
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
        if len(entries) != rows * cols:
            raise ValueError(f"field 'entries' has {len(entries)} values, expected {rows * cols}")
        if obj["field"] == "real":
            a = np.array(entries, dtype=float)
        elif obj["field"] == "complex":
            a = np.array([complex(e[0], e[1]) if isinstance(e, list) else complex(e) for e in entries])
        else:
            raise ValueError(f"field 'field' must be 'real' or 'complex', got {obj['field']!r}")
        return cls(a.reshape(rows, cols))


def as_array(A) -> np.ndarray:
    if isinstance(A, DenseMatrix):
        return A.data
    return np.asarray(A)


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b)) for b in blocks if np.asarray(b).size]
    if not blocks:
        return np.zeros((0, 0))
    dtype = np.result_type(*blocks)
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    out = np.zeros((n, m), dtype=dtype)
    i = j = 0
    for b in blocks:
        out[i : i + b.shape[0], j : j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out
