"""Dense real matrix kernel: products, solves, least squares, numeric rank.

Thin wrappers around numpy's LAPACK bindings that add the shape and
singularity checks the rest of the package relies on, plus the plain-text
matrix format used by the command line tools.
"""

from __future__ import annotations

import numpy as np

DEFAULT_RANK_TOL = 1e-9


class ShapeMismatchError(ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Matrix is numerically rank deficient where full rank is required."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def numeric_rank(m, tol: float = DEFAULT_RANK_TOL, scale: float | None = None) -> int:
    """Count singular values above tol * scale.

    `scale` defaults to the largest singular value, giving the usual
    relative rank; passing an external scale makes near-zero blocks of a
    larger problem register as deficient instead of trivially full.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    m = _as_matrix(m)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    top = sv[0] if scale is None else max(scale, 0.0)
    if top == 0.0:
        return 0
    return int(np.sum(sv > tol * top))


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(_as_matrix(m), compute_uv=False)


def solve(a, b, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Solve a x = b for square full-rank a."""
    a, b = _as_matrix(a), np.asarray(b, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"solve needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatchError(f"rhs rows {b.shape[0]} != matrix order {a.shape[0]}")
    if numeric_rank(a, tol) < a.shape[0]:
        raise SingularMatrixError(f"matrix of order {a.shape[0]} is numerically singular")
    return np.linalg.solve(a, b)


def inverse(a, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"inverse needs a square matrix, got {a.shape}")
    if numeric_rank(a, tol) < a.shape[0]:
        raise SingularMatrixError(f"matrix of order {a.shape[0]} is numerically singular")
    return np.linalg.inv(a)


def lstsq(a, b) -> np.ndarray:
    """Minimum-residual (and among those, minimum-norm) solution of a x = b."""
    a, b = _as_matrix(a), np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatchError(f"rhs rows {b.shape[0]} != matrix rows {a.shape[0]}")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return x


def max_abs(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m))) if m.size else 0.0


def format_matrix(m) -> str:
    """Serialize as 'rows cols' header plus one whitespace row per matrix row.

    Entries use Python's shortest round-trip float representation, so
    parse_matrix(format_matrix(m)) reproduces m bit for bit.
    """
    m = _as_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(" ".join(repr(float(x)) for x in row) for row in m)
    return "\n".join(lines)


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"bad header {lines[0]!r}, expected 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} rows, found {len(lines) - 1}")
    data = []
    for ln in lines[1:]:
        row = [float(tok) for tok in ln.split()]
        if len(row) != cols:
            raise ValueError(f"expected {cols} columns, found {len(row)}")
        data.append(row)
    return np.array(data, dtype=float).reshape(rows, cols)
