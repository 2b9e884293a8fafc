"""Construction of orthogonal polynomial systems from moment functionals.

A polynomial system is a graded sequence of column vectors of polynomials,
one vector per total degree, stored as coefficient blocks against the
ordered monomial basis: row vector n is sum_k G[n][k] X_k.  Systems are
built degree by degree through block Gram-Schmidt against the functional's
monomial pairing blocks; a rank-deficient Gram block means the functional
is not quasi-definite through that degree and construction stops with a
diagnosable error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import matrixkit as mk
from .indexing import GradedBasis, basis_for
from .moments import MomentFunctional, left_multiply


class QuasiDefiniteFailure(Exception):
    """The Gram block at some degree is numerically singular."""

    def __init__(self, degree: int, singular_values, label: str = ""):
        self.degree = degree
        self.singular_values = np.asarray(singular_values, dtype=float)
        self.label = label
        super().__init__(
            f"functional {label!r} is not quasi-definite at degree {degree}; "
            f"Gram singular values {self.singular_values}"
        )


class NotPositiveDefiniteError(Exception):
    """A Gram block has a non-positive eigenvalue where positivity is required."""

    def __init__(self, degree: int, eigenvalues):
        self.degree = degree
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        super().__init__(f"Gram block at degree {degree} is not positive definite")


class PolySystem:
    """Graded coefficient blocks of a polynomial system."""

    def __init__(self, d: int, blocks, monic: bool, label: str = ""):
        self.d = d
        self.blocks = [[np.asarray(g, dtype=float) for g in row] for row in blocks]
        self.monic = monic
        self.label = label

    @property
    def N(self) -> int:
        return len(self.blocks) - 1

    def block(self, n: int, k: int) -> np.ndarray:
        return self.blocks[n][k]

    def leading(self, n: int) -> np.ndarray:
        return self.blocks[n][n]

    def row_blocks(self, n: int) -> dict[int, np.ndarray]:
        return {k: self.blocks[n][k] for k in range(n + 1)}

    def size(self, n: int) -> int:
        return self.blocks[n][n].shape[0]

    def to_monic(self) -> "PolySystem":
        """Divide each degree vector by its leading coefficient block."""
        out = []
        for n in range(self.N + 1):
            lead = self.leading(n)
            row = [mk.solve(lead, self.block(n, k)) for k in range(n)]
            row.append(np.eye(lead.shape[0]))
            out.append(row)
        return PolySystem(self.d, out, monic=True, label=f"monic({self.label})")

    def transformed(self, mats) -> "PolySystem":
        """Left-multiply each degree vector by the given square matrices."""
        out = []
        for n in range(self.N + 1):
            s = np.asarray(mats[n], dtype=float)
            out.append([s @ self.block(n, k) for k in range(n + 1)])
        return PolySystem(self.d, out, monic=False, label=self.label)


@dataclass
class GramBlocks:
    """Per-degree pairing blocks H_n of a system against its functional."""

    blocks: list

    def h(self, n: int) -> np.ndarray:
        return self.blocks[n]

    @property
    def N(self) -> int:
        return len(self.blocks) - 1

    def scale(self) -> float:
        return max(mk.max_abs(h) for h in self.blocks)


def pair_blocks(u: MomentFunctional, rows_a: dict, rows_b: dict,
                basis: GradedBasis | None = None) -> np.ndarray:
    """Pairing <u, A B^t> of two block-coefficient polynomial vectors."""
    basis = basis or basis_for(u.d)
    out = None
    for j, ga in rows_a.items():
        for k, gb in rows_b.items():
            term = ga @ u.moment_matrix(j, k, basis) @ gb.T
            out = term if out is None else out + term
    return out


def shift_rows(rows: dict, i: int, basis: GradedBasis) -> dict:
    """Coefficient blocks of x_i times a block-coefficient vector."""
    return {k + 1: g @ basis.shift_matrix(k, i) for k, g in rows.items()}


def inner_block(u: MomentFunctional, P: PolySystem, n: int, Q: PolySystem, m: int) -> np.ndarray:
    """<u, P_n Q_m^t> by coefficient contraction against the moments."""
    if P.d != Q.d or P.d != u.d:
        raise ValueError("systems and functional must share the dimension")
    return pair_blocks(u, P.row_blocks(n), Q.row_blocks(m))


def gram_schmidt_monic(u: MomentFunctional, N: int,
                       rank_tol: float = mk.DEFAULT_RANK_TOL) -> tuple[PolySystem, GramBlocks]:
    """Unique monic orthogonal system of the functional through degree N.

    Each degree starts from the monomial vector and removes its projections
    onto all previous degrees, so leading blocks are exactly the identity.
    Raises QuasiDefiniteFailure at the first degree whose Gram block is
    numerically rank deficient (measured against the scale of the raw
    monomial pairing block, so genuinely tiny Gram blocks are caught).
    """
    if N < 0:
        raise ValueError("degree bound must be >= 0")
    basis = basis_for(u.d)
    blocks: list[list[np.ndarray]] = []
    grams: list[np.ndarray] = []
    for n in range(N + 1):
        row = [np.zeros((basis.size(n), basis.size(k))) for k in range(n)]
        row.append(np.eye(basis.size(n)))
        for j in range(n):
            s = pair_blocks(u, {n: row[n]}, {k: blocks[j][k] for k in range(j + 1)}, basis)
            coef = mk.solve(grams[j], s.T).T
            for k in range(j + 1):
                row[k] -= coef @ blocks[j][k]
        h = pair_blocks(u, dict(enumerate(row)), dict(enumerate(row)), basis)
        h = (h + h.T) / 2.0
        raw_scale = mk.max_abs(u.moment_matrix(n, n, basis))
        sv = mk.singular_values(h)
        if mk.numeric_rank(h, rank_tol, scale=max(raw_scale, sv[0])) < basis.size(n):
            raise QuasiDefiniteFailure(n, sv, u.label)
        blocks.append(row)
        grams.append(h)
    return (
        PolySystem(u.d, blocks, monic=True, label=f"mops({u.label})"),
        GramBlocks(grams),
    )


def gram_offdiag_residual(u: MomentFunctional, P: PolySystem, H: GramBlocks | None = None) -> float:
    """Largest off-diagonal pairing block entry, relative to the Gram scale."""
    worst = 0.0
    for n in range(P.N + 1):
        for m in range(n):
            worst = max(worst, mk.max_abs(inner_block(u, P, n, Q=P, m=m)))
    scale = H.scale() if H is not None else max(
        mk.max_abs(inner_block(u, P, n, P, n)) for n in range(P.N + 1)
    )
    return worst / max(scale, 1e-300)


def orthonormalize(P: PolySystem, H: GramBlocks) -> PolySystem:
    """Rescale a monic orthogonal system to unit Gram blocks.

    Uses the inverse symmetric square root of each Gram block, which fixes
    the rotation freedom of orthonormal bases; requires positive definite
    blocks.
    """
    mats = []
    for n in range(P.N + 1):
        w, v = np.linalg.eigh(H.h(n))
        if np.any(w <= 0):
            raise NotPositiveDefiniteError(n, w)
        mats.append(v @ np.diag(1.0 / np.sqrt(w)) @ v.T)
    out = P.transformed(mats)
    out.label = f"orthonormal({P.label})"
    return out


# ---------------------------------------------------------------------------
# Koornwinder's construction of bivariate systems from two 1-d weights


@dataclass(frozen=True)
class RhoMap:
    """Mapping rho(x) coupling the two 1-d weights.

    kind "linear": coeffs (c0, c1) give rho = c0 + c1 x.
    kind "sqrt": coeffs (q0, q1, q2) give rho^2 = q0 + q1 x + q2 x^2, the
    second weight must be symmetric, and the first-weight functional passed
    to koornwinder_system must carry the moments of rho(x) w1(x).
    """

    kind: str
    coeffs: tuple

    @staticmethod
    def linear(c0: float, c1: float = 0.0) -> "RhoMap":
        return RhoMap("linear", (float(c0), float(c1)))

    @staticmethod
    def sqrt_poly(q0: float, q1: float = 0.0, q2: float = 0.0) -> "RhoMap":
        return RhoMap("sqrt", (float(q0), float(q1), float(q2)))

    def rho_poly(self) -> np.ndarray:
        if self.kind != "linear":
            raise ValueError("rho itself is polynomial only in the linear case")
        return np.array(self.coeffs, dtype=float)

    def rho_sq_poly(self) -> np.ndarray:
        if self.kind == "linear":
            return npoly.polymul(self.coeffs, self.coeffs)
        return np.array(self.coeffs, dtype=float)


def _poly_map_1d(coeffs) -> dict[tuple[int], float]:
    return {(m,): float(c) for m, c in enumerate(coeffs) if c != 0.0}


def _monic_1d_coeffs(u: MomentFunctional, N: int) -> list[np.ndarray]:
    """Ascending coefficient arrays of the monic 1-d system of u."""
    sys1d, _ = gram_schmidt_monic(u, N)
    return [
        np.concatenate([sys1d.block(m, k)[0] for k in range(m + 1)])
        for m in range(N + 1)
    ]


def koornwinder_system(w1: MomentFunctional, w2: MomentFunctional, rho: RhoMap,
                       N: int) -> tuple[PolySystem, MomentFunctional]:
    """Bivariate orthogonal system from two 1-d weights and a mapping.

    Row k of the degree-n vector is q_(n-k)(x) rho(x)^k r_k(y / rho(x)),
    where q is the monic system of rho^(2k+1) w1 and r the monic system of
    w2.  Returns the system together with the bivariate functional it is
    orthogonal against.  With a constant mapping this reduces to tensor
    products of the univariate systems.
    """
    if w1.d != 1 or w2.d != 1:
        raise ValueError("koornwinder construction needs univariate weights")
    basis = basis_for(2)
    rho_sq = rho.rho_sq_poly()

    r_coeffs = _monic_1d_coeffs(w2, N)
    if rho.kind == "sqrt":
        # the symmetric second weight makes r_k share the parity of k
        for k, c in enumerate(r_coeffs):
            scale = max(1.0, float(np.max(np.abs(c))))
            for j in range(len(c)):
                if (j - k) % 2:
                    if abs(c[j]) > 1e-9 * scale:
                        raise ValueError("second weight must be symmetric for a sqrt mapping")
                    c[j] = 0.0

    q_coeffs = []
    for k in range(N + 1):
        if rho.kind == "linear":
            mult = npoly.polypow(rho.rho_poly(), 2 * k + 1)
        else:
            mult = npoly.polypow(rho_sq, k)
        u_k = left_multiply(_poly_map_1d(mult), w1, label=f"rho^{2 * k + 1}*w1")
        q_coeffs.append(_monic_1d_coeffs(u_k, N - k))

    blocks: list[list[np.ndarray]] = []
    for n in range(N + 1):
        row = [np.zeros((n + 1, basis.size(k))) for k in range(n + 1)]
        for k in range(n + 1):
            ysec = np.zeros((1, k + 1))  # grows as needed: [x powers, y power]
            for j, rc in enumerate(r_coeffs[k]):
                if rc == 0.0:
                    continue
                if rho.kind == "linear":
                    rpow = npoly.polypow(rho.rho_poly(), k - j)
                else:
                    rpow = npoly.polypow(rho_sq, (k - j) // 2)
                if ysec.shape[0] < len(rpow):
                    grown = np.zeros((len(rpow), k + 1))
                    grown[: ysec.shape[0]] = ysec
                    ysec = grown
                ysec[: len(rpow), j] += rc * rpow
            qc = q_coeffs[k][n - k]
            arr = np.zeros((len(qc) + ysec.shape[0] - 1, k + 1))
            for i, qv in enumerate(qc):
                if qv != 0.0:
                    arr[i : i + ysec.shape[0]] += qv * ysec
            for (ix, iy) in np.argwhere(arr):
                m = ix + iy
                row[m][k, basis.position((int(ix), int(iy)))] += arr[ix, iy]
        blocks.append(row)

    identity = all(np.array_equal(blocks[n][n], np.eye(n + 1)) for n in range(N + 1))

    def oracle(alpha):
        j, k = alpha
        myk = w2.moment((k,))
        if myk == 0.0:
            return 0.0
        if rho.kind == "linear":
            mult = npoly.polypow(rho.rho_poly(), k + 1)
        else:
            if k % 2:
                return 0.0
            mult = npoly.polypow(rho_sq, k // 2)
        mx = sum(c * w1.moment((j + m,)) for m, c in enumerate(mult) if c != 0.0)
        return myk * mx

    func = MomentFunctional(
        2, oracle, label=f"koornwinder({w1.label},{w2.label})", scale_note=w1.scale_note
    )
    system = PolySystem(
        2, blocks, monic=identity, label=f"koornwinder({w1.label},{w2.label})"
    )
    return system, func
