import numpy as np
import pytest

from sketch_anomaly.errors import RankDeficientError, ShapeError
from sketch_anomaly.linalg import svd_thin
from sketch_anomaly.scores import (
    SeparationWarning,
    batch_scores,
    online_scores,
    ridge_identity_deviation,
    score_row,
    undefined_record,
)
from sketch_anomaly.synth import disj_matrix, separated_matrix

BASIS_MATRIX = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


class TestScoreRow:
    def test_row_in_principal_direction(self):
        basis = svd_thin(BASIS_MATRIX)
        rec = score_row(basis, 1, np.array([2.0, 0.0]))
        assert rec.rank_k_leverage == pytest.approx(1.0, abs=1e-12)
        assert rec.projection_distance == pytest.approx(0.0, abs=1e-12)
        assert rec.full_leverage == pytest.approx(1.0, abs=1e-12)

    def test_row_orthogonal_to_principal(self):
        basis = svd_thin(BASIS_MATRIX)
        rec = score_row(basis, 1, np.array([0.0, 1.0]))
        assert rec.rank_k_leverage == pytest.approx(0.0, abs=1e-12)
        assert rec.projection_distance == pytest.approx(1.0, abs=1e-12)
        assert rec.full_leverage == pytest.approx(1.0, abs=1e-12)

    def test_zero_row(self):
        basis = svd_thin(BASIS_MATRIX)
        rec = score_row(basis, 1, np.zeros(2), lam=0.5)
        assert rec.full_leverage == 0.0
        assert rec.rank_k_leverage == 0.0
        assert rec.projection_distance == 0.0
        assert rec.tail_leverage == 0.0
        assert rec.ridge_leverage == 0.0

    def test_rank_deficient_basis_rejected(self):
        basis = svd_thin(np.array([[1.0, 0.0], [2.0, 0.0]]))  # rank 1
        with pytest.raises(RankDeficientError):
            score_row(basis, 2, np.array([1.0, 0.0]))

    def test_lambda_must_be_positive(self):
        basis = svd_thin(BASIS_MATRIX)
        with pytest.raises(ValueError):
            score_row(basis, 1, np.array([1.0, 0.0]), lam=0.0)

    def test_ridge_matches_resolvent_oracle(self):
        # L_lam(i) = a_i^T (A^T A + lam I)^-1 a_i, computed via a linear solve.
        rng = np.random.default_rng(21)
        a = rng.standard_normal((12, 5))
        lam = 0.3
        basis = svd_thin(a)
        gram = a.T @ a + lam * np.eye(5)
        for i in range(12):
            rec = score_row(basis, 2, a[i], lam=lam)
            oracle = float(a[i] @ np.linalg.solve(gram, a[i]))
            assert rec.ridge_leverage == pytest.approx(oracle, rel=1e-8)

    def test_ridge_oracle_wide_matrix(self):
        # Wide case: stored basis spans only n directions, the rest of the
        # row mass is charged at 1/lam.
        rng = np.random.default_rng(22)
        a = rng.standard_normal((4, 9))
        lam = 0.7
        basis = svd_thin(a)
        gram = a.T @ a + lam * np.eye(9)
        probe = rng.standard_normal(9)
        rec = score_row(basis, 2, probe, lam=lam)
        oracle = float(probe @ np.linalg.solve(gram, probe))
        assert rec.ridge_leverage == pytest.approx(oracle, rel=1e-8)


class TestBatchScores:
    def test_disj_fixture_full_leverage(self):
        a = disj_matrix(t=2, distinct=2, d=4)
        records = batch_scores(a, k=1)
        lev = [r.full_leverage for r in records]
        assert lev[0] == pytest.approx(0.5, abs=1e-10)
        assert lev[1] == pytest.approx(0.5, abs=1e-10)
        assert lev[2] == pytest.approx(1.0, abs=1e-10)
        assert lev[3] == pytest.approx(1.0, abs=1e-10)

    def test_rank_k_leverage_sums_to_k(self):
        rng = np.random.default_rng(23)
        for k in (1, 3):
            a = rng.standard_normal((20, 7))
            records = batch_scores(a, k)
            total = sum(r.rank_k_leverage for r in records)
            assert total == pytest.approx(k, abs=1e-8)

    def test_projection_sums_to_tail_mass(self):
        rng = np.random.default_rng(24)
        a = rng.standard_normal((15, 6))
        k = 2
        records = batch_scores(a, k)
        sigma = svd_thin(a).values
        tail = float(np.sum(sigma[k:] ** 2))
        total = sum(r.projection_distance for r in records)
        assert total == pytest.approx(tail, rel=1e-8)

    def test_head_tail_split_of_full_leverage(self):
        rng = np.random.default_rng(25)
        a = rng.standard_normal((10, 5))
        for rec in batch_scores(a, 2):
            assert rec.rank_k_leverage + rec.tail_leverage == pytest.approx(
                rec.full_leverage, abs=1e-8
            )
            assert 0.0 <= rec.rank_k_leverage <= rec.full_leverage + 1e-12

    def test_projection_bounded_by_row_norm(self):
        rng = np.random.default_rng(26)
        a = rng.standard_normal((10, 5))
        for i, rec in enumerate(batch_scores(a, 2)):
            assert rec.projection_distance <= float(a[i] @ a[i]) + 1e-9

    def test_rotation_invariance(self):
        rng = np.random.default_rng(27)
        a = rng.standard_normal((12, 6))
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        base = batch_scores(a, 2, lam=0.4)
        rotated = batch_scores(a @ q, 2, lam=0.4)
        for r1, r2 in zip(base, rotated):
            assert r1.full_leverage == pytest.approx(r2.full_leverage, abs=1e-8)
            assert r1.rank_k_leverage == pytest.approx(r2.rank_k_leverage, abs=1e-8)
            assert r1.projection_distance == pytest.approx(
                r2.projection_distance, abs=1e-8
            )
            assert r1.ridge_leverage == pytest.approx(r2.ridge_leverage, abs=1e-8)

    def test_degenerate_separation_warns(self):
        a = np.vstack([np.eye(3), np.eye(3)])
        with pytest.warns(SeparationWarning):
            batch_scores(a, 1)

    def test_mode_field(self):
        recs = batch_scores(np.eye(3) * 2.0 + np.ones((3, 3)), 1)
        assert all(r.mode == "exact-batch" and r.defined for r in recs)


class TestRidgeDiagnostic:
    def test_ridge_relation_on_planted_data(self):
        # Rank-k signal plus white noise, sigma_k^2 >> lam >> sigma_{k+1}^2:
        # L_lam should track L^k + T^k / lam.  Diagnostic only; the margin
        # asserted here is a sanity envelope, not a proven bound.
        a = separated_matrix(300, 40, 3, seed=31, delta=0.6, kappa=1.1, tail_sr=1e-4)
        sigma = svd_thin(a).values
        lam = float(np.sqrt(sigma[2] ** 2 * sigma[3] ** 2))  # geometric middle
        deviation = ridge_identity_deviation(a, 3, lam)
        assert np.isfinite(deviation)
        assert deviation < 0.2

    def test_identity_deviation_nonnegative(self):
        rng = np.random.default_rng(32)
        a = rng.standard_normal((10, 4))
        assert ridge_identity_deviation(a, 1, 0.5) >= 0.0


def prefix_svd_oracle(matrix: np.ndarray, k: int):
    """Online scores recomputed from scratch per prefix (independent path)."""
    out = []
    for i in range(matrix.shape[0]):
        prefix = matrix[:i]
        if i == 0:
            out.append(None)
            continue
        dec = svd_thin(prefix)
        if dec.rank_used < k:
            out.append(None)
        else:
            out.append(score_row(dec, k, matrix[i], mode="exact-online", row_index=i))
    return out


class TestOnlineScores:
    def test_first_rows_are_sentinels(self):
        rng = np.random.default_rng(33)
        a = rng.standard_normal((10, 4))
        records = online_scores(iter(a), k=3)
        for rec in records[:3]:
            assert not rec.defined
            assert rec.full_leverage is None
        assert records[3].defined

    def test_matches_prefix_svd_oracle(self):
        rng = np.random.default_rng(34)
        a = rng.standard_normal((30, 6))
        records = online_scores(iter(a), k=2)
        oracle = prefix_svd_oracle(a, 2)
        for rec, exp in zip(records, oracle):
            if exp is None:
                assert not rec.defined
                continue
            assert rec.defined
            assert rec.rank_k_leverage == pytest.approx(
                exp.rank_k_leverage, abs=1e-8
            )
            assert rec.projection_distance == pytest.approx(
                exp.projection_distance, abs=1e-8
            )
            assert rec.full_leverage == pytest.approx(exp.full_leverage, abs=1e-8)

    def test_orthogonal_row_scores_unit_distance(self):
        e1 = np.array([1.0, 0.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0, 0.0])
        records = online_scores(iter([e1, e1, e1, e2]), k=1)
        assert records[3].projection_distance == pytest.approx(1.0, abs=1e-10)

    def test_width_mismatch_raises(self):
        rows = [np.ones(3), np.ones(4)]
        with pytest.raises(ShapeError):
            online_scores(iter(rows), k=1)

    def test_sentinel_serialization_shape(self):
        rec = undefined_record(5, "exact-online")
        d = rec.to_dict()
        assert d["row_index"] == 5
        assert d["defined"] is False
        assert d["full_leverage"] is None
