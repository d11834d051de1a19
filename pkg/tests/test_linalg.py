import numpy as np
import pytest

from sketch_anomaly.errors import (
    ConvergenceError,
    DegenerateSpectrumError,
    ShapeError,
)
from sketch_anomaly.linalg import (
    as_matrix,
    operator_norm,
    spectral_stats,
    svd_thin,
    sym_eig,
    truncate,
)


def char_poly_roots_3x3(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix by bisection on det(M - x I).

    Independent of the eigensolver under test: evaluates the monic cubic
    x^3 - tr x^2 + s2 x - det and bisects each sign change.
    """
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    s2 = (
        m[0, 0] * m[1, 1]
        - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2]
        - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2]
        - m[1, 2] * m[2, 1]
    )
    det = float(np.linalg.det(m))  # 3x3 determinant, not an eigen routine

    def poly(x):
        return x**3 - tr * x**2 + s2 * x - det

    radius = float(np.abs(m).sum(axis=1).max()) + 1.0
    grid = np.linspace(-radius, radius, 20001)
    vals = poly(grid)
    roots = []
    for i in range(len(grid) - 1):
        lo, hi = grid[i], grid[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi < 0:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fmid = poly(mid)
                if flo * fmid <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    return np.sort(np.asarray(roots))[::-1]


class TestSymEig:
    def test_identity(self):
        dec = sym_eig(np.eye(2))
        np.testing.assert_allclose(dec.values, [1.0, 1.0])
        np.testing.assert_allclose(np.abs(dec.right_vectors), np.eye(2), atol=1e-14)

    def test_diagonal(self):
        dec = sym_eig(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(dec.values, [4.0, 1.0])
        np.testing.assert_allclose(dec.right_vectors, np.eye(2), atol=1e-14)

    def test_char_poly_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = rng.standard_normal((3, 3))
            m = g + g.T
            expected = char_poly_roots_3x3(m)
            got = sym_eig(m).values
            assert expected.shape == (3,)
            np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_orthonormality_invariant(self):
        rng = np.random.default_rng(11)
        for n in (3, 17, 60):
            g = rng.standard_normal((n, n))
            dec = sym_eig(g + g.T)
            q = dec.right_vectors
            assert np.abs(q.T @ q - np.eye(n)).max() <= 1e-10

    def test_reconstruction_within_tol(self):
        rng = np.random.default_rng(4)
        g = rng.standard_normal((40, 40))
        m = g + g.T
        dec = sym_eig(m)
        resid = np.linalg.norm(
            (dec.right_vectors * dec.values) @ dec.right_vectors.T - m
        )
        assert resid <= 1e-13 * np.linalg.norm(m)

    def test_sign_convention(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((8, 8))
        dec = sym_eig(g + g.T)
        lead = np.abs(dec.right_vectors).argmax(axis=0)
        cols = np.arange(8)
        assert np.all(dec.right_vectors[lead, cols] >= 0)

    def test_values_descending(self):
        rng = np.random.default_rng(6)
        g = rng.standard_normal((12, 12))
        dec = sym_eig(g + g.T)
        assert np.all(np.diff(dec.values) <= 0)

    def test_determinism_bytes(self):
        rng = np.random.default_rng(7)
        g = rng.standard_normal((15, 15))
        m = g + g.T
        a = sym_eig(m)
        b = sym_eig(m.copy())
        assert a.values.tobytes() == b.values.tobytes()
        assert a.right_vectors.tobytes() == b.right_vectors.tobytes()

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            sym_eig(np.ones((2, 3)))

    def test_rejects_asymmetric(self):
        m = np.array([[1.0, 2.0], [0.5, 1.0]])
        with pytest.raises(ShapeError):
            sym_eig(m)

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            sym_eig(np.eye(2), tol=0.0)

    def test_impossible_tol_raises_convergence(self):
        rng = np.random.default_rng(8)
        g = rng.standard_normal((30, 30))
        with pytest.raises(ConvergenceError) as err:
            sym_eig(g + g.T, tol=1e-18)
        assert err.value.residual > 0


class TestSvdThin:
    def test_diagonal_example(self):
        a = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        dec = svd_thin(a)
        np.testing.assert_allclose(dec.values, [2.0, 1.0])
        np.testing.assert_allclose(dec.right_vectors, np.eye(2), atol=1e-14)

    def test_scaled_identity(self):
        for c in (3.0, -2.5):
            dec = svd_thin(c * np.eye(4))
            np.testing.assert_allclose(dec.values, np.full(4, abs(c)), atol=1e-12)

    def test_reconstruction_tall(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((6, 4))
        dec = svd_thin(a, compute_left=True)
        approx = (dec.left_vectors * dec.values[: dec.rank_used]) @ dec.right_vectors.T
        assert np.linalg.norm(a - approx) <= 1e-8 * np.linalg.norm(a)

    def test_reconstruction_wide(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((4, 9))
        dec = svd_thin(a, compute_left=True)
        approx = (dec.left_vectors * dec.values[: dec.rank_used]) @ dec.right_vectors.T
        assert np.linalg.norm(a - approx) <= 1e-8 * np.linalg.norm(a)
        v = dec.right_vectors
        assert np.abs(v.T @ v - np.eye(dec.rank_used)).max() <= 1e-10

    def test_left_vectors_lazy(self):
        a = np.eye(3)
        assert svd_thin(a).left_vectors is None
        assert svd_thin(a, compute_left=True).left_vectors is not None

    def test_zero_matrix_rank_zero(self):
        dec = svd_thin(np.zeros((3, 2)))
        assert dec.rank_used == 0
        np.testing.assert_allclose(dec.values, 0.0)

    def test_rejects_empty(self):
        with pytest.raises(ShapeError):
            svd_thin(np.zeros((0, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            as_matrix(np.array([[np.nan, 1.0]]))


class TestSpectralStats:
    def test_hand_computed_example(self):
        stats = spectral_stats(np.diag([2.0, 1.0, 0.0]), k=1, p=1)
        assert stats.separation_delta == pytest.approx(0.75, abs=1e-12)
        assert stats.condition_kappa_k == pytest.approx(1.0, abs=1e-12)
        assert stats.stable_rank == pytest.approx(1.25, abs=1e-12)
        assert stats.numeric_rank_p == pytest.approx(1.25, abs=1e-12)

    def test_degenerate_spectrum_delta_zero(self):
        stats = spectral_stats(np.eye(2), k=1, p=1)
        assert stats.separation_delta == pytest.approx(0.0, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((8, 5))
        s1 = spectral_stats(a, k=2, p=3)
        s2 = spectral_stats(3.7 * a, k=2, p=3)
        for field in (
            "separation_delta",
            "condition_kappa_k",
            "stable_rank",
            "numeric_rank_p",
        ):
            assert getattr(s1, field) == pytest.approx(getattr(s2, field), rel=1e-10)

    def test_numeric_rank_at_least_one(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            a = rng.standard_normal((10, 6))
            for p in (1, 3, 6):
                stats = spectral_stats(a, k=2, p=p)
                assert stats.numeric_rank_p >= 1.0 - 1e-12
                assert stats.numeric_rank_p >= p - 1e-9

    def test_zero_matrix_raises(self):
        with pytest.raises(DegenerateSpectrumError):
            spectral_stats(np.zeros((4, 3)), k=1, p=1)

    def test_k_range_validation(self):
        a = np.eye(3)
        with pytest.raises(ValueError):
            spectral_stats(a, k=3, p=1)
        with pytest.raises(ValueError):
            spectral_stats(a, k=0, p=1)
        with pytest.raises(ValueError):
            spectral_stats(a, k=1, p=0)


class TestTruncate:
    def test_full_rank_recovers_input(self):
        rng = np.random.default_rng(14)
        a = rng.standard_normal((6, 4))
        dec = svd_thin(a, compute_left=True)
        approx = truncate(dec, dec.rank_used)
        assert np.linalg.norm(a - approx) <= 1e-8 * np.linalg.norm(a)

    def test_diagonal_case(self):
        dec = svd_thin(np.diag([2.0, 1.0]), compute_left=True)
        np.testing.assert_allclose(
            truncate(dec, 1), [[2.0, 0.0], [0.0, 0.0]], atol=1e-12
        )

    def test_eckart_young_identity(self):
        rng = np.random.default_rng(15)
        a = rng.standard_normal((5, 3))
        dec = svd_thin(a, compute_left=True)
        resid = np.sum((a - truncate(dec, 1)) ** 2)
        expected = float(np.sum(dec.values[1:] ** 2))
        assert resid == pytest.approx(expected, rel=1e-9)

    def test_tail_mass_identity_all_k(self):
        rng = np.random.default_rng(16)
        a = rng.standard_normal((7, 5))
        dec = svd_thin(a, compute_left=True)
        for k in range(dec.rank_used + 1):
            resid = np.sum((a - truncate(dec, k)) ** 2)
            expected = float(np.sum(dec.values[k:] ** 2))
            assert resid == pytest.approx(expected, rel=1e-8, abs=1e-12)

    def test_k_out_of_range(self):
        dec = svd_thin(np.eye(3), compute_left=True)
        with pytest.raises(ValueError):
            truncate(dec, 4)

    def test_requires_left_vectors(self):
        dec = svd_thin(np.eye(3))
        with pytest.raises(ValueError):
            truncate(dec, 1)


class TestOperatorNorm:
    def test_diagonal(self):
        assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-12)

    def test_matches_svd_top(self):
        rng = np.random.default_rng(17)
        a = rng.standard_normal((9, 5))
        assert operator_norm(a) == pytest.approx(svd_thin(a).values[0], rel=1e-12)

    def test_weyl_property(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            c = rng.standard_normal((8, 6))
            n = 0.3 * rng.standard_normal((8, 6))
            sc = svd_thin(c).values
            sd = svd_thin(c + n).values
            assert np.max(np.abs(sc - sd)) <= operator_norm(n) + 1e-9
