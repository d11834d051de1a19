import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketch_anomaly.errors import ShapeError, ZeroMassError
from sketch_anomaly.linalg import operator_norm, svd_thin
from sketch_anomaly.sketches import (
    ColumnSamplePlan,
    FrequentDirections,
    SignProjector,
    apply_column_plan,
    column_sample_plan,
    row_sample,
)


def fd_ingest(matrix, ell):
    fd = FrequentDirections(ell, matrix.shape[1])
    for row in matrix:
        fd.update(row)
    return fd


class TestFrequentDirections:
    def test_no_shrink_is_lossless(self):
        rng = np.random.default_rng(41)
        a = rng.standard_normal((15, 5))
        fd = fd_ingest(a, ell=8)  # 15 <= 2*8 - 1
        assert fd.shrink_count == 0
        assert np.abs(a.T @ a - fd.covariance()).max() <= 1e-10

    def test_covariance_bound_every_k(self):
        # ||A^T A - S^T S|| <= ||A - A_k||_F^2 / (ell - k) for all k < ell.
        rng = np.random.default_rng(42)
        a = rng.standard_normal((150, 30)) @ np.diag(np.linspace(2.0, 0.2, 30))
        ell = 10
        fd = fd_ingest(a, ell)
        err = operator_norm(a.T @ a - fd.covariance())
        sigma_sq = svd_thin(a).values ** 2
        for k in range(ell):
            tail = float(sigma_sq[k:].sum())
            assert err <= tail / (ell - k) + 1e-9

    def test_frobenius_bound(self):
        rng = np.random.default_rng(43)
        a = rng.standard_normal((200, 40))
        ell = 15
        fd = fd_ingest(a, ell)
        err = operator_norm(a.T @ a - fd.covariance())
        assert err <= float(np.sum(a**2)) / ell

    def test_sketch_norm_monotone_throughout_stream(self):
        rng = np.random.default_rng(44)
        a = rng.standard_normal((60, 8))
        fd = FrequentDirections(4, 8)
        seen = 0.0
        for row in a:
            fd.update(row)
            seen += float(row @ row)
            assert fd.frobenius_sq() <= seen + 1e-9

    def test_buffer_rows_beyond_fill_are_zero(self):
        rng = np.random.default_rng(45)
        a = rng.standard_normal((40, 6))
        fd = fd_ingest(a, 4)
        assert fd.fill <= 2 * fd.ell
        assert np.all(fd.buffer[fd.fill :] == 0.0)
        assert fd.shrink_count > 0

    def test_width_mismatch(self):
        fd = FrequentDirections(4, 6)
        with pytest.raises(ShapeError):
            fd.update(np.ones(5))

    def test_ell_below_one_rejected(self):
        with pytest.raises(ValueError):
            FrequentDirections(0, 4)


class TestSignProjector:
    def test_entry_deterministic(self):
        p1 = SignProjector(42, 16, 10)
        p2 = SignProjector(42, 16, 10)
        assert p1.entry(3, 7) == p2.entry(3, 7)
        assert p1.entry(3, 7) == p1.entry(3, 7)

    def test_entry_magnitude(self):
        p = SignProjector(1, 25, 8)
        for i in range(8):
            for j in range(25):
                assert abs(p.entry(i, j)) == pytest.approx(1 / 5.0, abs=1e-15)

    def test_entry_matches_matrix(self):
        p = SignProjector(9, 12, 7)
        r = p.matrix()
        for i in range(7):
            for j in range(12):
                assert p.entry(i, j) == r[i, j]

    def test_monte_carlo_bias(self):
        # Mean of 1e5 entries, rescaled by sqrt(ell), should be near zero.
        p = SignProjector(7, 1000, 100)
        r = p.matrix()
        assert abs(r.mean()) * np.sqrt(1000) <= 0.02

    def test_pairwise_product_bias(self):
        # Products over fixed small index subsets should also be unbiased.
        p = SignProjector(11, 50000, 4)
        r = p.matrix() * np.sqrt(50000)
        for cols in [(0, 1), (0, 2), (1, 3), (0, 1, 2)]:
            prod = np.prod([r[c] for c in cols], axis=0)
            assert abs(prod.mean()) <= 0.02

    def test_numba_and_numpy_paths_agree(self):
        p = SignProjector(5, 40, 30)
        pos = np.arange(1200, dtype=np.uint64)
        assert np.array_equal(p._signs(pos), p._signs_vectorized(pos))

    def test_projection_of_zero_row(self):
        p = SignProjector(3, 10, 6)
        np.testing.assert_array_equal(p.project(np.zeros(6)), np.zeros(10))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32), st.integers(2, 40))
    def test_projection_linearity(self, seed, dim):
        p = SignProjector(seed, 11, dim)
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(dim)
        b = rng.standard_normal(dim)
        lhs = p.project(a + b)
        rhs = p.project(a) + p.project(b)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_gram_matches_matrix(self):
        p = SignProjector(21, 300, 45)
        r = p.matrix()
        assert np.abs(p.gram(block_cols=64) - r @ r.T).max() <= 1e-9

    def test_covariance_preservation_trials(self):
        # n=400, d=100, sr ~ 10, ell = 400: the projected covariance should
        # stay within 0.5 sigma_1^2 in at least 95 of 100 seeded trials.
        rng = np.random.default_rng(46)
        spectrum = np.concatenate([np.full(10, 3.0), np.full(90, 0.3)])
        a = rng.standard_normal((400, 100)) @ np.diag(spectrum)
        cov = a @ a.T
        sigma1_sq = svd_thin(a).values[0] ** 2
        hits = 0
        for seed in range(100):
            r = SignProjector(seed, 400, 100).matrix()
            proj = a @ r
            if operator_norm(cov - proj @ proj.T) <= 0.5 * sigma1_sq:
                hits += 1
        assert hits >= 95

    def test_psd_projected_covariance(self):
        rng = np.random.default_rng(47)
        a = rng.standard_normal((30, 12))
        r = SignProjector(2, 20, 12).matrix()
        proj = a @ r
        eigvals = np.linalg.eigvalsh(proj.T @ proj)
        assert eigvals.min() >= -1e-9


class TestRowSample:
    def test_identical_rows_exact(self):
        rng = np.random.default_rng(48)
        row = rng.standard_normal(6)
        a = np.tile(row, (20, 1))
        sketch = row_sample(a, 5, seed=9)
        assert np.abs(sketch.T @ sketch - a.T @ a).max() <= 1e-10

    def test_seeded_determinism(self):
        rng = np.random.default_rng(49)
        a = rng.standard_normal((25, 4))
        s1 = row_sample(a, 8, seed=123)
        s2 = row_sample(a, 8, seed=123)
        assert s1.tobytes() == s2.tobytes()
        s3 = row_sample(a, 8, seed=124)
        assert s1.tobytes() != s3.tobytes()

    def test_covariance_trials(self):
        # n=500, d=30, sr ~ 5, ell = 600 -> within 0.5 sigma_1^2 in >= 90/100.
        rng = np.random.default_rng(50)
        spectrum = np.concatenate([np.full(5, 2.0), np.full(25, 0.2)])
        a = rng.standard_normal((500, 30)) @ np.diag(spectrum)
        gram = a.T @ a
        sigma1_sq = svd_thin(a).values[0] ** 2
        hits = 0
        for seed in range(100):
            sketch = row_sample(a, 600, seed)
            if operator_norm(gram - sketch.T @ sketch) <= 0.5 * sigma1_sq:
                hits += 1
        assert hits >= 90

    def test_zero_mass_raises(self):
        with pytest.raises(ZeroMassError):
            row_sample(np.zeros((5, 3)), 4, seed=0)


class TestColumnSamplePlan:
    def test_single_nonzero_column_forced(self):
        m = np.zeros((4, 5))
        m[:, 2] = [1.0, 2.0, 0.5, 1.0]
        plan = column_sample_plan(m, 7, seed=3)
        assert np.all(plan.indices == 2)

    def test_reservoir_probability_oracle(self):
        # Columns with squared-mass ratio 3:1; the reservoir rule selects
        # column 0 with probability exactly 0.75 at stream end.
        t = np.array([[np.sqrt(3.0), 1.0]])
        ell = 4
        runs = 2000
        hits = 0
        for seed in range(runs):
            plan = column_sample_plan(t, ell, seed)
            hits += int(np.sum(plan.indices == 0))
        fraction = hits / (runs * ell)
        assert abs(fraction - 0.75) <= 0.03

    def test_seeded_determinism(self):
        rng = np.random.default_rng(51)
        a = rng.standard_normal((10, 6))
        p1 = column_sample_plan(a, 9, seed=7)
        p2 = column_sample_plan(a, 9, seed=7)
        assert np.array_equal(p1.indices, p2.indices)
        assert p1.running_mass == p2.running_mass

    def test_mass_accounting(self):
        rng = np.random.default_rng(52)
        a = rng.standard_normal((8, 5))
        plan = column_sample_plan(a, 3, seed=1)
        np.testing.assert_allclose(plan.column_masses, (a**2).sum(axis=0))
        assert plan.running_mass == pytest.approx(float(np.sum(a**2)))
        assert plan.entries_seen == 40

    def test_zero_mass_raises(self):
        with pytest.raises(ZeroMassError):
            column_sample_plan(np.zeros((3, 3)), 2, seed=0)


class TestApplyColumnPlan:
    def test_single_column_ell_one_exact(self):
        a = np.array([[3.0], [4.0]])
        plan = column_sample_plan(a, 1, seed=5)
        sketch = np.array([apply_column_plan(plan, row) for row in a])
        assert np.abs(sketch @ sketch.T - a @ a.T).max() <= 1e-12

    def test_homogeneity(self):
        rng = np.random.default_rng(53)
        a = rng.standard_normal((6, 4))
        plan1 = column_sample_plan(a, 5, seed=2)
        plan2 = column_sample_plan(2.0 * a, 5, seed=2)
        assert np.array_equal(plan1.indices, plan2.indices)
        out1 = apply_column_plan(plan1, a[0])
        out2 = apply_column_plan(plan2, 2.0 * a[0])
        np.testing.assert_allclose(out2, 2.0 * out1, rtol=1e-12)

    def test_defensive_zero_mass_error(self):
        plan = ColumnSamplePlan(
            ell=2,
            dim=3,
            seed=0,
            indices=np.array([0, 1]),
            column_masses=np.array([1.0, 0.0, 1.0]),
            running_mass=2.0,
            entries_seen=6,
        )
        with pytest.raises(ZeroMassError):
            apply_column_plan(plan, np.ones(3))

    def test_covariance_trials(self):
        # 200 x 50, ell = 2000 -> within 0.5 sigma_1^2 in >= 90/100 trials.
        rng = np.random.default_rng(54)
        spectrum = np.concatenate([np.full(5, 2.0), np.full(45, 0.25)])
        a = rng.standard_normal((200, 50)) @ np.diag(spectrum)
        cov = a @ a.T
        sigma1_sq = svd_thin(a).values[0] ** 2
        hits = 0
        for seed in range(100):
            plan = column_sample_plan(a, 2000, seed)
            sketch = a[:, plan.indices] * plan.scales()
            if seed == 0:
                row_api = apply_column_plan(plan, a[3])
                np.testing.assert_allclose(row_api, sketch[3], rtol=1e-12)
            if operator_norm(cov - sketch @ sketch.T) <= 0.5 * sigma1_sq:
                hits += 1
        assert hits >= 90
