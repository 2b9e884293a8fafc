"""Graded monomial bookkeeping for polynomials in d real variables.

Monomials are grouped by total degree.  Within a degree block they are
ordered descending-lexicographically on the exponent tuple, which for two
variables gives the row order x^n, x^(n-1)y, ..., y^n.  All coefficient
blocks elsewhere in the package are expressed against these ordered blocks,
so this module is the single source of truth for positions, block sizes and
the 0/1 shift matrices that encode multiplication by a coordinate.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np


def rank_count(d: int, n: int) -> int:
    """Number of monomials of total degree n in d variables, C(n+d-1, d-1)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    return comb(n + d - 1, d - 1)


def enumerate_indices(d: int, n: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree n, descending lexicographic.

    For d = 2 this is [(n,0), (n-1,1), ..., (0,n)].
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if d == 1:
        return [(n,)]
    out = []
    for v in range(n, -1, -1):
        out.extend((v,) + rest for rest in enumerate_indices(d - 1, n - v))
    return out


def joint_matrix(blocks) -> np.ndarray:
    """Stack matrices with a common column count vertically, in given order."""
    blocks = [np.asarray(b, dtype=float) for b in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    cols = blocks[0].shape[1]
    for b in blocks:
        if b.shape[1] != cols:
            raise ValueError(f"column mismatch: {b.shape[1]} != {cols}")
    return np.vstack(blocks)


class GradedBasis:
    """Ordered monomial basis of a fixed dimension with shift structure.

    Immutable after construction apart from internal memo tables, which only
    grow; safe for concurrent reads under CPython.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        self.d = d
        self._indices: dict[int, list[tuple[int, ...]]] = {}
        self._positions: dict[tuple[int, ...], int] = {}
        self._shift: dict[tuple[int, int], np.ndarray] = {}
        self._sum_table: dict[tuple[int, int], np.ndarray] = {}

    def size(self, n: int) -> int:
        return rank_count(self.d, n)

    def indices(self, n: int) -> list[tuple[int, ...]]:
        if n not in self._indices:
            idx = enumerate_indices(self.d, n)
            self._indices[n] = idx
            for pos, alpha in enumerate(idx):
                self._positions[alpha] = pos
        return self._indices[n]

    def position(self, alpha) -> int:
        """Position of a multi-index within its own degree block."""
        alpha = tuple(int(a) for a in alpha)
        if alpha not in self._positions:
            self.indices(sum(alpha))
        return self._positions[alpha]

    def shift_matrix(self, n: int, i: int) -> np.ndarray:
        """0/1 matrix S of shape (size(n), size(n+1)) with S X_{n+1} = x_i X_n.

        Row r carries a single 1 at the column of alpha_r + e_i, so
        S S^t is the identity.
        """
        if not 1 <= i <= self.d:
            raise ValueError(f"direction must be in 1..{self.d}, got {i}")
        key = (n, i)
        if key not in self._shift:
            src = self.indices(n)
            self.indices(n + 1)
            mat = np.zeros((self.size(n), self.size(n + 1)))
            for r, alpha in enumerate(src):
                shifted = list(alpha)
                shifted[i - 1] += 1
                mat[r, self._positions[tuple(shifted)]] = 1.0
            self._shift[key] = mat
        return self._shift[key]

    def joint_shift(self, n: int) -> np.ndarray:
        """Vertical stack of shift_matrix(n, i) over i = 1..d; full column rank."""
        return joint_matrix([self.shift_matrix(n, i) for i in range(1, self.d + 1)])

    def sum_table(self, j: int, k: int) -> np.ndarray:
        """Integer table T with T[a, b] = position of alpha_a + beta_b in degree j+k."""
        key = (j, k)
        if key not in self._sum_table:
            left = self.indices(j)
            right = self.indices(k)
            self.indices(j + k)
            table = np.empty((self.size(j), self.size(k)), dtype=np.intp)
            for a, alpha in enumerate(left):
                for b, beta in enumerate(right):
                    total = tuple(x + y for x, y in zip(alpha, beta))
                    table[a, b] = self._positions[total]
            self._sum_table[key] = table
        return self._sum_table[key]


@lru_cache(maxsize=None)
def basis_for(d: int) -> GradedBasis:
    """Shared per-dimension basis instance."""
    return GradedBasis(d)
