import numpy as np
import pytest

from mvops import matrixkit as mk, moments
from mvops.construct import (GramBlocks, gram_schmidt_monic, inner_block,
                             orthonormalize)
from mvops.indexing import basis_for
from mvops.linrel import counterexample
from mvops.ttr import (ThreeTermData, compute_ttr, fit_ttr, generate_from_ttr,
                       validate_rank_conditions)


@pytest.fixture(scope="module")
def disk_system():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 5)
    return u, P, H


def test_monic_a_blocks_are_structural_shifts(disk_system):
    u, P, H = disk_system
    T = compute_ttr(P, u, H)
    basis = basis_for(2)
    for n in range(5):
        for i in (1, 2):
            assert np.array_equal(T.a(n, i), basis.shift_matrix(n, i))


def test_centered_weight_has_zero_diagonal_blocks():
    # brute-force oracle: all odd moments vanish, so the diagonal pairing
    # <u, x_i P_n P_n^t> contracts odd-degree monomials only
    u = moments.product_chebyshev_functional(2)
    P, H = gram_schmidt_monic(u, 4)
    T = compute_ttr(P, u, H)
    for n in range(5):
        for i in (1, 2):
            assert mk.max_abs(T.b(n, i)) <= 1e-12


def test_orthonormal_c_is_a_transposed():
    u = moments.cube_jacobi_functional((0.0, 0.0), (0.0, 0.0))
    P, H = gram_schmidt_monic(u, 5)
    Pn = orthonormalize(P, H)
    Hn = GramBlocks([inner_block(u, Pn, n, Pn, n) for n in range(6)])
    T = compute_ttr(Pn, u, Hn)
    for n in range(1, 5):
        for i in (1, 2):
            assert mk.max_abs(T.c(n, i) - T.a(n - 1, i).T) <= 1e-8


def test_compute_ttr_rejects_non_orthogonal_input():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 4)
    broken = [[b.copy() for b in row] for row in P.blocks]
    broken[3][0] = broken[3][0] + 0.05
    from mvops.construct import PolySystem

    bad = PolySystem(2, broken, monic=True)
    with pytest.raises(ValueError):
        compute_ttr(bad, u, H)


@pytest.mark.parametrize("functional", [
    moments.disk_functional(0.0),
    moments.cube_jacobi_functional((0.0, 0.0), (0.0, 0.0)),
    moments.product_chebyshev_functional(2),
    moments.simplex_functional((0.5, 0.5, 0.5)),
    moments.simplex_functional((0.5, 0.5, 0.5, 0.5)),
    moments.multiple_laguerre_functional((0.0, 1.0)),
    moments.tensor(moments.krall_laguerre_functional(1.0, 1.0),
                   moments.laguerre_functional_1d(0.0)),
    moments.tensor(moments.krall_jacobi_functional(1.0, 0.0, 1.0),
                   moments.jacobi_functional_1d(0.0, 0.0)),
])
def test_forward_generation_roundtrip(functional):
    # extraction followed by regeneration is the identity across the catalog
    N = 5 if functional.d == 2 else 4
    P, H = gram_schmidt_monic(functional, N)
    T = compute_ttr(P, functional, H)
    G, residuals = generate_from_ttr(T)
    scale = max(mk.max_abs(P.block(n, k)) for n in range(N + 1) for k in range(n + 1))
    assert np.max(residuals) <= 1e-8 * max(scale, 1.0)
    for n in range(G.N + 1):
        for k in range(n + 1):
            gap = mk.max_abs(G.block(n, k) - P.block(n, k))
            assert gap <= 1e-8 * max(scale, 1.0)


def test_forward_generation_univariate_reduces_to_scalar_recurrence():
    rec = moments.jacobi_recurrence(5, 0.5, 1.5)
    basis = basis_for(1)
    A = [[basis.shift_matrix(n, 1)] for n in range(5)]
    B = [[np.array([[rec.b[n]]])] for n in range(6)]
    C: list = [None] + [[np.array([[rec.c[n]]])] for n in range(1, 6)]
    T = ThreeTermData(1, A, B, C)
    G, residuals = generate_from_ttr(T)
    assert np.max(residuals) <= 1e-13
    expected = rec.monic_coeffs()
    for n in range(6):
        got = np.concatenate([G.block(n, k)[0] for k in range(n + 1)])
        np.testing.assert_allclose(got, expected[n], atol=1e-12)


def test_forward_generation_flags_incompatible_blocks():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 4)
    T = compute_ttr(P, u, H)
    T.B[1][0] = T.B[1][0] + 0.1
    _, residuals = generate_from_ttr(T)
    assert np.max(residuals) > 1e-4


def test_forward_generation_requires_structural_a():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 3)
    T = compute_ttr(P, u, H)
    T.A[0][0] = 2.0 * T.A[0][0]
    with pytest.raises(ValueError):
        generate_from_ttr(T)


def test_rank_conditions_pass_for_quasi_definite_families(disk_system):
    u, P, H = disk_system
    T = compute_ttr(P, u, H)
    report = validate_rank_conditions(T)
    assert report.ok
    assert report.first_failure() is None


def test_rank_conditions_fail_for_zero_block():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 3)
    T = compute_ttr(P, u, H)
    T.C[2][0] = np.zeros_like(T.C[2][0])
    report = validate_rank_conditions(T)
    assert not report.ok
    first = report.first_failure()
    assert (first.kind, first.n, first.i) == ("C", 2, 1)
    assert first.rank == 0


def test_counterexample_recurrence_is_consistent():
    combined, _ = counterexample(8)
    _, residuals = generate_from_ttr(combined, 8)
    assert np.max(residuals) <= 1e-12


def test_fit_recovers_computed_blocks(disk_system):
    u, P, H = disk_system
    T = compute_ttr(P, u, H)
    fitted, residuals = fit_ttr(P)
    assert max(residuals.values()) <= 1e-9
    for n in range(4):
        for i in (1, 2):
            assert mk.max_abs(fitted.b(n, i) - T.b(n, i)) <= 1e-8
            if n >= 1:
                assert mk.max_abs(fitted.c(n, i) - T.c(n, i)) <= 1e-8


def test_fit_detects_broken_recurrence():
    u = moments.disk_functional(0.0)
    P, _ = gram_schmidt_monic(u, 4)
    rng = np.random.default_rng(11)
    broken = [[b.copy() for b in row] for row in P.blocks]
    broken[2][0] = broken[2][0] + rng.standard_normal(broken[2][0].shape)
    from mvops.construct import PolySystem

    bad = PolySystem(2, broken, monic=True)
    _, residuals = fit_ttr(bad)
    assert max(residuals.values()) > 1e-3


def test_fit_univariate_chebyshev_matches_classical():
    u = moments.chebyshev_functional_1d(1)
    P, _ = gram_schmidt_monic(u, 6)
    fitted, residuals = fit_ttr(P)
    assert max(residuals.values()) <= 1e-10
    rec = moments.chebyshev_recurrence(6, 1)
    for n in range(5):
        assert fitted.b(n, 1)[0, 0] == pytest.approx(rec.b[n], abs=1e-10)
        if n >= 1:
            assert fitted.c(n, 1)[0, 0] == pytest.approx(rec.c[n], abs=1e-10)


def test_fit_requires_monic():
    u = moments.disk_functional(0.0)
    P, H = gram_schmidt_monic(u, 3)
    with pytest.raises(ValueError):
        fit_ttr(orthonormalize(P, H))
