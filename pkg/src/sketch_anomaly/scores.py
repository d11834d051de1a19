"""Exact subspace anomaly scores, batch and online.

Batch scores are computed against the SVD of the whole matrix; online
scores for row i are computed against only rows 1..i-1 (maintained as a
d x d covariance accumulator).  Score definitions, for a row ``a`` with
spectrum ``sigma`` and right singular vectors ``v_j``:

* full leverage        ``L    = sum_j (a.v_j)^2 / sigma_j^2``
* rank-k leverage      ``L^k  = sum_{j<=k} (a.v_j)^2 / sigma_j^2``
* projection distance  ``T^k  = |a|^2 - sum_{j<=k} (a.v_j)^2``
* tail leverage        ``L^{>k} = L - L^k``
* ridge leverage       ``L_lam = sum_j (a.v_j)^2 / (sigma_j^2 + lam)``

Directions with ``sigma_j`` at or below the relative rank floor contribute
zero to leverage sums rather than exploding; for ridge leverage the mass
outside the stored basis is charged at ``1/lam`` (its true weight at
sigma = 0).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError, ShapeError
from .linalg import (
    RANK_FLOOR,
    SpectralDecomposition,
    as_matrix,
    as_row,
    effective_rank,
    svd_thin,
    sym_eig,
)

MODE_EXACT_BATCH = "exact-batch"
MODE_EXACT_ONLINE = "exact-online"
MODE_SKETCHED_BATCH = "sketched-batch"
MODE_SKETCHED_ONLINE = "sketched-online"

SEPARATION_WARN_FLOOR = 1e-6


class SeparationWarning(UserWarning):
    """Spectrum gap at k is numerically degenerate; scores are fragile."""


@dataclass(frozen=True)
class ScoreRecord:
    """Per-row anomaly scores with provenance.

    ``defined`` is False for online rows whose prefix had rank < k; all
    score fields are then None (the sentinel the early stream gets).
    ``projection_distance_raw`` preserves the unclamped estimator value in
    sketched modes, where projection can push it slightly negative.
    """

    row_index: int
    full_leverage: float | None
    rank_k_leverage: float | None
    projection_distance: float | None
    tail_leverage: float | None
    ridge_leverage: float | None
    mode: str
    defined: bool = True
    projection_distance_raw: float | None = None

    def to_dict(self) -> dict:
        return {
            "row_index": self.row_index,
            "full_leverage": self.full_leverage,
            "rank_k_leverage": self.rank_k_leverage,
            "projection_distance": self.projection_distance,
            "tail_leverage": self.tail_leverage,
            "ridge_leverage": self.ridge_leverage,
            "mode": self.mode,
            "defined": self.defined,
            "projection_distance_raw": self.projection_distance_raw,
        }


def undefined_record(row_index: int, mode: str) -> ScoreRecord:
    """Sentinel for rows scored against a basis of insufficient rank."""
    return ScoreRecord(
        row_index=row_index,
        full_leverage=None,
        rank_k_leverage=None,
        projection_distance=None,
        tail_leverage=None,
        ridge_leverage=None,
        mode=mode,
        defined=False,
    )


def _check_basis_rank(basis: SpectralDecomposition, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sigma = basis.values
    if basis.rank_used < k or sigma[0] <= 0.0:
        raise RankDeficientError(
            f"basis rank {basis.rank_used} is below requested k={k}"
        )
    if sigma[k - 1] <= RANK_FLOOR * sigma[0]:
        raise RankDeficientError(
            f"sigma_k = {sigma[k - 1]:.3e} is at the rank floor "
            f"({RANK_FLOOR:.0e} * sigma_1)"
        )


def score_row(
    basis: SpectralDecomposition,
    k: int,
    row,
    lam: float | None = None,
    mode: str = MODE_EXACT_BATCH,
    row_index: int = 0,
) -> ScoreRecord:
    """Score a single row against a fixed spectral basis."""
    _check_basis_rank(basis, k)
    if lam is not None and lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    a = as_row(row, basis.dim)
    sigma = basis.values[: basis.rank_used]
    alpha = basis.right_vectors.T @ a
    alpha_sq = alpha**2
    sigma_sq = sigma**2
    row_sq = float(a @ a)

    rank_k = float(np.sum(alpha_sq[:k] / sigma_sq[:k]))
    proj = max(row_sq - float(np.sum(alpha_sq[:k])), 0.0)
    full = float(np.sum(alpha_sq / sigma_sq))
    tail = max(full - rank_k, 0.0)
    ridge = None
    if lam is not None:
        residual = max(row_sq - float(np.sum(alpha_sq)), 0.0)
        ridge = float(np.sum(alpha_sq / (sigma_sq + lam))) + residual / lam
    return ScoreRecord(
        row_index=row_index,
        full_leverage=full,
        rank_k_leverage=rank_k,
        projection_distance=proj,
        tail_leverage=tail,
        ridge_leverage=ridge,
        mode=mode,
    )


def _warn_if_degenerate(sigma: np.ndarray, k: int) -> None:
    if sigma.size > k and sigma[0] > 0:
        delta = float((sigma[k - 1] ** 2 - sigma[k] ** 2) / sigma[0] ** 2)
        if delta < SEPARATION_WARN_FLOOR:
            warnings.warn(
                f"separation delta at k={k} is {delta:.3e}; the principal "
                "subspace is numerically degenerate and scores depend on "
                "tie-breaking",
                SeparationWarning,
                stacklevel=3,
            )


def batch_scores(matrix, k: int, lam: float | None = None) -> list[ScoreRecord]:
    """Exact scores for every row of the matrix against its own SVD."""
    a = as_matrix(matrix)
    basis = svd_thin(a)
    _check_basis_rank(basis, k)
    _warn_if_degenerate(basis.values, k)
    if lam is not None and lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")

    sigma = basis.values[: basis.rank_used]
    sigma_sq = sigma**2
    alpha = a @ basis.right_vectors
    alpha_sq = alpha**2
    row_sq = np.einsum("ij,ij->i", a, a)

    rank_k = alpha_sq[:, :k] @ (1.0 / sigma_sq[:k])
    proj = np.maximum(row_sq - alpha_sq[:, :k].sum(axis=1), 0.0)
    full = alpha_sq @ (1.0 / sigma_sq)
    tail = np.maximum(full - rank_k, 0.0)
    ridge = None
    if lam is not None:
        residual = np.maximum(row_sq - alpha_sq.sum(axis=1), 0.0)
        ridge = alpha_sq @ (1.0 / (sigma_sq + lam)) + residual / lam

    records = []
    for i in range(a.shape[0]):
        records.append(
            ScoreRecord(
                row_index=i,
                full_leverage=float(full[i]),
                rank_k_leverage=float(rank_k[i]),
                projection_distance=float(proj[i]),
                tail_leverage=float(tail[i]),
                ridge_leverage=float(ridge[i]) if ridge is not None else None,
                mode=MODE_EXACT_BATCH,
            )
        )
    return records


def _basis_from_covariance(cov: np.ndarray) -> SpectralDecomposition:
    """Spectral basis (sigma, V) of the matrix whose Gram is ``cov``."""
    decomp = sym_eig(cov)
    sigma = np.sqrt(np.clip(decomp.values, 0.0, None))
    rank = effective_rank(sigma)
    return SpectralDecomposition(
        values=sigma,
        right_vectors=np.ascontiguousarray(decomp.right_vectors[:, :rank]),
        rank_used=rank,
    )


def online_scores(row_stream, k: int, lam: float | None = None) -> list[ScoreRecord]:
    """Score each row against the prefix that preceded it.

    Rows arriving while the prefix rank is still below k get sentinel
    records (``defined=False``); there is no principal subspace to measure
    against yet.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    records: list[ScoreRecord] = []
    cov: np.ndarray | None = None
    width: int | None = None
    for i, row in enumerate(row_stream):
        a = as_row(row, width)
        if cov is None:
            width = a.shape[0]
            cov = np.zeros((width, width))
        basis = _basis_from_covariance(cov)
        if basis.rank_used < k:
            records.append(undefined_record(i, MODE_EXACT_ONLINE))
        else:
            records.append(
                score_row(basis, k, a, lam=lam, mode=MODE_EXACT_ONLINE, row_index=i)
            )
        cov += np.outer(a, a)
    return records


def ridge_identity_deviation(matrix, k: int, lam: float) -> float:
    """Diagnostic: how far ridge leverage strays from L^k + T^k / lambda.

    The approximation holds when the data is a rank-k signal plus white
    noise and ``sigma_k^2 >> lam >> sigma_{k+1}^2``.  Returns the maximum
    relative deviation over rows; reported, never asserted as a bound.
    """
    records = batch_scores(matrix, k, lam=lam)
    worst = 0.0
    for rec in records:
        predicted = rec.rank_k_leverage + rec.projection_distance / lam
        denom = max(abs(rec.ridge_leverage), 1e-30)
        worst = max(worst, abs(rec.ridge_leverage - predicted) / denom)
    return worst
