"""Plain-text matrix and vector formats.

Matrix text: ``n`` on the first line, then ``n`` rows of space-separated
integers.  Graph bitstring: ``n:BITS`` with the strict upper triangle in
row-major order, optionally followed by ``:LOOPS`` (one bit per vertex).
Vectors: one entry per line; rationals may be written ``p/q``.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .matgen import check_int_symmetric

__all__ = [
    "format_matrix",
    "parse_matrix",
    "to_bitstring",
    "from_bitstring",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "parse_vector",
]


def format_matrix(A) -> str:
    A = np.asarray(A)
    lines = [str(A.shape[0])]
    lines += [" ".join(str(int(v)) for v in row) for row in A]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty matrix text")
    if ":" in lines[0]:
        return from_bitstring(lines[0])
    n = int(lines[0])
    rows = [[int(tok) for tok in ln.split()] for ln in lines[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"expected {n} rows of {n} integers")
    return np.array(rows, dtype=np.int64).reshape(n, n)


def to_bitstring(A) -> str:
    """Compact form of a 0/1 adjacency matrix; loops appended only when present."""
    A = check_int_symmetric(A, adjacency=True)
    n = A.shape[0]
    bits = "".join(str(int(v)) for v in A[np.triu_indices(n, 1)])
    diag = np.diag(A)
    out = f"{n}:{bits}"
    if diag.any():
        out += ":" + "".join(str(int(v)) for v in diag)
    return out


def from_bitstring(s: str) -> np.ndarray:
    parts = s.strip().split(":")
    if len(parts) not in (2, 3):
        raise ValueError("bitstring must look like n:BITS or n:BITS:LOOPS")
    n = int(parts[0])
    bits = parts[1]
    if len(bits) != n * (n - 1) // 2 or set(bits) - {"0", "1"}:
        raise ValueError(f"need {n * (n - 1) // 2} bits for n={n}")
    A = np.zeros((n, n), dtype=np.int64)
    if bits:
        A[np.triu_indices(n, 1)] = [int(c) for c in bits]
    A = A + A.T
    if len(parts) == 3:
        loops = parts[2]
        if len(loops) != n or set(loops) - {"0", "1"}:
            raise ValueError(f"need {n} loop bits")
        A[np.diag_indices(n)] = [int(c) for c in loops]
    return A


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(A, path, fmt: str = "text") -> None:
    text = format_matrix(A) if fmt == "text" else to_bitstring(A) + "\n"
    Path(path).write_text(text)


def parse_vector(text: str, exact: bool = True) -> list:
    toks = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return [Fraction(t) for t in toks] if exact else [float(Fraction(t)) for t in toks]


def read_vector(path, exact: bool = True) -> list:
    return parse_vector(Path(path).read_text(), exact)
