"""End-to-end streaming score pipelines.

Every pipeline takes a ``row_source``: a zero-argument callable returning
a fresh iterable of rows.  Each call is one pass over the data, so pass
discipline is observable from outside:

* ``run_fd_pipeline``        - 2 passes (sketch, then score)
* ``run_rproj_pipeline``     - 2 passes (projected covariance, then score)
* ``run_colsample_pipeline`` - 3 passes (sampling plan, covariance, score)
* ``run_rowsample_pipeline`` - 2 passes (reservoirs, then score)
* ``run_online_pipeline``    - 1 pass (score against the sketch so far,
  then fold the row in)

Row-space sketches (fd, rowsample) support the full score set; projected
sketches (rproj, colsample) support only the two estimators defined in
projected coordinates (rank-k leverage and projection distance), the rest
are None.  Projection distance estimates are clamped at zero, with the raw
value kept in ``projection_distance_raw``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import RankDeficientError, ShapeError
from .linalg import (
    RANK_FLOOR,
    SpectralDecomposition,
    as_row,
    effective_rank,
    svd_thin,
    sym_eig,
)
from .scores import (
    MODE_SKETCHED_BATCH,
    MODE_SKETCHED_ONLINE,
    ScoreRecord,
    undefined_record,
)
from .sketches import (
    ColumnSamplePlan,
    FrequentDirections,
    SignProjector,
    apply_column_plan,
    column_sample_plan,
    row_sample,
)
from .util import thread_cap

RowSource = Callable[[], Iterable]

PIPELINE_MODES = ("fd", "rproj", "colsample", "rowsample", "online-fd")

_CHUNK = 512

ROW_SPACE = "row-space"
PROJECTED_SPACE = "projected-space"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared by all pipelines."""

    k: int
    ell: int
    seed: int = 0
    lam: float | None = None
    mode: str = "fd"
    rank_floor: float = RANK_FLOOR
    independence_w: int = 32

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.ell < 2:
            raise ValueError(f"ell must be >= 2, got {self.ell}")
        if self.k >= self.ell:
            raise ValueError(f"need k < ell, got k={self.k}, ell={self.ell}")
        if self.mode not in PIPELINE_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.lam is not None and self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True)
class ApproxBasis:
    """Top-k spectral basis extracted from a sketch."""

    values: np.ndarray
    right_vectors: np.ndarray
    space: str

    def __post_init__(self):
        self.values.setflags(write=False)
        self.right_vectors.setflags(write=False)


def _sketch_decomp_or_raise(
    decomp: SpectralDecomposition, cfg: PipelineConfig
) -> SpectralDecomposition:
    sigma = decomp.values
    usable = min(decomp.rank_used, effective_rank(sigma, cfg.rank_floor))
    if usable < cfg.k:
        raise RankDeficientError(
            f"sketch retains only {usable} usable direction(s) but k={cfg.k}; "
            f"increase ell from {cfg.ell} to at least "
            f"{cfg.ell + 2 * (cfg.k - usable)}"
        )
    return decomp


def approx_basis(decomp: SpectralDecomposition, k: int, space: str) -> ApproxBasis:
    return ApproxBasis(
        values=decomp.values[:k].copy(),
        right_vectors=decomp.right_vectors[:, :k].copy(),
        space=space,
    )


def _chunks(rows: Iterable, width_hint: int | None = None):
    """Group a row stream into 2-D blocks, validating width as we go."""
    block: list[np.ndarray] = []
    width = width_hint
    for row in rows:
        a = as_row(row, width)
        width = a.shape[0]
        block.append(a)
        if len(block) >= _CHUNK:
            yield np.asarray(block)
            block = []
    if block:
        yield np.asarray(block)


def _map_ordered(fn, blocks):
    """Apply fn to blocks, possibly in a thread pool, preserving order."""
    workers = thread_cap()
    if workers <= 1:
        for b in blocks:
            yield fn(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = []
        for b in blocks:
            pending.append(pool.submit(fn, b))
            # Keep a bounded window so we do not buffer the whole stream.
            while len(pending) > 2 * workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def _rowspace_records(
    rows: Iterable,
    decomp: SpectralDecomposition,
    cfg: PipelineConfig,
    mode: str,
) -> list[ScoreRecord]:
    sigma = decomp.values[: decomp.rank_used]
    sigma_sq = sigma**2
    v = decomp.right_vectors
    inv_sigma_sq = 1.0 / sigma_sq
    lam = cfg.lam
    k = cfg.k

    def score_block(block: np.ndarray):
        alpha_sq = (block @ v) ** 2
        row_sq = np.einsum("ij,ij->i", block, block)
        lev_k = alpha_sq[:, :k] @ inv_sigma_sq[:k]
        raw_t = row_sq - alpha_sq[:, :k].sum(axis=1)
        full = alpha_sq @ inv_sigma_sq
        tail = np.maximum(full - lev_k, 0.0)
        ridge = None
        if lam is not None:
            residual = np.maximum(row_sq - alpha_sq.sum(axis=1), 0.0)
            ridge = alpha_sq @ (1.0 / (sigma_sq + lam)) + residual / lam
        return lev_k, raw_t, full, tail, ridge

    records: list[ScoreRecord] = []
    idx = 0
    for lev_k, raw_t, full, tail, ridge in _map_ordered(
        score_block, _chunks(rows, decomp.dim)
    ):
        for j in range(lev_k.shape[0]):
            records.append(
                ScoreRecord(
                    row_index=idx,
                    full_leverage=float(full[j]),
                    rank_k_leverage=float(lev_k[j]),
                    projection_distance=max(float(raw_t[j]), 0.0),
                    tail_leverage=float(tail[j]),
                    ridge_leverage=float(ridge[j]) if ridge is not None else None,
                    mode=mode,
                    projection_distance_raw=float(raw_t[j]),
                )
            )
            idx += 1
    return records


def _projected_records(
    rows: Iterable,
    project_block: Callable[[np.ndarray], np.ndarray],
    decomp: SpectralDecomposition,
    cfg: PipelineConfig,
    width: int,
) -> list[ScoreRecord]:
    sigma = decomp.values[: decomp.rank_used]
    v_k = decomp.right_vectors[:, : cfg.k]
    inv_sigma_sq_k = 1.0 / sigma[: cfg.k] ** 2

    def score_block(block: np.ndarray):
        projected = project_block(block)
        alpha_sq = (projected @ v_k) ** 2
        row_sq = np.einsum("ij,ij->i", block, block)
        lev_k = alpha_sq @ inv_sigma_sq_k
        raw_t = row_sq - alpha_sq.sum(axis=1)
        return lev_k, raw_t

    records: list[ScoreRecord] = []
    idx = 0
    for lev_k, raw_t in _map_ordered(score_block, _chunks(rows, width)):
        for j in range(lev_k.shape[0]):
            records.append(
                ScoreRecord(
                    row_index=idx,
                    full_leverage=None,
                    rank_k_leverage=float(lev_k[j]),
                    projection_distance=max(float(raw_t[j]), 0.0),
                    tail_leverage=None,
                    ridge_leverage=None,
                    mode=MODE_SKETCHED_BATCH,
                    projection_distance_raw=float(raw_t[j]),
                )
            )
            idx += 1
    return records


def run_fd_pipeline(
    row_source: RowSource,
    cfg: PipelineConfig,
    state: FrequentDirections | None = None,
) -> list[ScoreRecord]:
    """Two passes: Frequent Directions sketch, then score all rows.

    An externally built ``state`` (e.g. reloaded from a snapshot) skips
    pass one, turning this into the resume path for multi-invocation runs.
    """
    fd = state
    if fd is None:
        for block in _chunks(row_source()):
            if fd is None:
                fd = FrequentDirections(cfg.ell, block.shape[1])
            for row in block:
                fd.update(row)
        if fd is None:
            raise ShapeError("row source produced no rows")
    decomp = _sketch_decomp_or_raise(svd_thin(fd.sketch()), cfg)
    return _rowspace_records(row_source(), decomp, cfg, MODE_SKETCHED_BATCH)


def run_rowsample_pipeline(
    row_source: RowSource, cfg: PipelineConfig
) -> list[ScoreRecord]:
    """Two passes: length-squared row reservoirs, then score all rows."""
    sketch = row_sample(row_source(), cfg.ell, cfg.seed)
    decomp = _sketch_decomp_or_raise(svd_thin(sketch), cfg)
    return _rowspace_records(row_source(), decomp, cfg, MODE_SKETCHED_BATCH)


def _covariance_decomp(cov: np.ndarray, cfg: PipelineConfig) -> SpectralDecomposition:
    eig = sym_eig(cov)
    sigma = np.sqrt(np.clip(eig.values, 0.0, None))
    rank = effective_rank(sigma, cfg.rank_floor)
    decomp = SpectralDecomposition(
        values=sigma,
        right_vectors=np.ascontiguousarray(eig.right_vectors[:, :rank]),
        rank_used=rank,
    )
    return _sketch_decomp_or_raise(decomp, cfg)


def run_rproj_pipeline(
    row_source: RowSource, cfg: PipelineConfig
) -> list[ScoreRecord]:
    """Two passes: covariance of sign-projected rows, then score."""
    projector: SignProjector | None = None
    cov: np.ndarray | None = None
    for block in _chunks(row_source()):
        if projector is None:
            projector = SignProjector(
                cfg.seed, cfg.ell, block.shape[1], cfg.independence_w
            )
            cov = np.zeros((cfg.ell, cfg.ell))
        projected = block @ projector.matrix()
        cov += projected.T @ projected
    if projector is None:
        raise ShapeError("row source produced no rows")
    decomp = _covariance_decomp(cov, cfg)
    r = projector.matrix()
    return _projected_records(
        row_source(), lambda block: block @ r, decomp, cfg, projector.dim
    )


def run_colsample_pipeline(
    row_source: RowSource,
    cfg: PipelineConfig,
    plan: ColumnSamplePlan | None = None,
) -> list[ScoreRecord]:
    """Three passes: sampling plan, sampled covariance, then score.

    A pre-built ``plan`` (reloaded from a snapshot) skips pass zero.
    """
    if plan is None:
        plan = column_sample_plan(row_source(), cfg.ell, cfg.seed)
    scales = plan.scales()
    indices = plan.indices

    def project_block(block: np.ndarray) -> np.ndarray:
        return block[:, indices] * scales

    cov = np.zeros((cfg.ell, cfg.ell))
    width: int | None = None
    for block in _chunks(row_source(), plan.dim):
        width = block.shape[1]
        projected = project_block(block)
        cov += projected.T @ projected
    if width is None:
        raise ShapeError("row source produced no rows")
    decomp = _covariance_decomp(cov, cfg)
    return _projected_records(row_source(), project_block, decomp, cfg, plan.dim)


def run_online_pipeline(
    row_source: RowSource, cfg: PipelineConfig
) -> list[ScoreRecord]:
    """One pass: score each row against the sketch of rows before it.

    Score-then-update ordering: row i never sees itself.  While the sketch
    still has rank < k the row gets a sentinel record.
    """
    fd: FrequentDirections | None = None
    records: list[ScoreRecord] = []
    lam = cfg.lam
    for i, row in enumerate(row_source()):
        a = as_row(row, fd.dim if fd is not None else None)
        if fd is None:
            fd = FrequentDirections(cfg.ell, a.shape[0])
        decomp = svd_thin(fd.sketch()) if fd.fill else None
        usable = 0
        if decomp is not None:
            usable = min(
                decomp.rank_used, effective_rank(decomp.values, cfg.rank_floor)
            )
        if usable < cfg.k:
            records.append(undefined_record(i, MODE_SKETCHED_ONLINE))
        else:
            sigma = decomp.values[: decomp.rank_used]
            sigma_sq = sigma**2
            alpha_sq = (decomp.right_vectors.T @ a) ** 2
            row_sq = float(a @ a)
            lev_k = float(alpha_sq[: cfg.k] @ (1.0 / sigma_sq[: cfg.k]))
            raw_t = row_sq - float(alpha_sq[: cfg.k].sum())
            full = float(alpha_sq @ (1.0 / sigma_sq))
            ridge = None
            if lam is not None:
                residual = max(row_sq - float(alpha_sq.sum()), 0.0)
                ridge = float(alpha_sq @ (1.0 / (sigma_sq + lam))) + residual / lam
            records.append(
                ScoreRecord(
                    row_index=i,
                    full_leverage=full,
                    rank_k_leverage=lev_k,
                    projection_distance=max(raw_t, 0.0),
                    tail_leverage=max(full - lev_k, 0.0),
                    ridge_leverage=ridge,
                    mode=MODE_SKETCHED_ONLINE,
                    projection_distance_raw=raw_t,
                )
            )
        fd.update(a)
    if fd is None:
        raise ShapeError("row source produced no rows")
    return records


def run_pipeline(row_source: RowSource, cfg: PipelineConfig) -> list[ScoreRecord]:
    """Dispatch on cfg.mode."""
    if cfg.mode == "fd":
        return run_fd_pipeline(row_source, cfg)
    if cfg.mode == "rproj":
        return run_rproj_pipeline(row_source, cfg)
    if cfg.mode == "colsample":
        return run_colsample_pipeline(row_source, cfg)
    if cfg.mode == "rowsample":
        return run_rowsample_pipeline(row_source, cfg)
    if cfg.mode == "online-fd":
        return run_online_pipeline(row_source, cfg)
    raise ValueError(f"unknown mode {cfg.mode!r}")


# --- sketch-size translation helpers -----------------------------------
#
# The guarantees prescribe a covariance error level mu; these translate it
# into a sketch size for each construction.  They are conveniences for
# test harnesses: pipelines accept ell directly and bounds are always
# gated on the *measured* mu, never on these formulas.


def fd_ell_for_mu(mu: float, tail_stable_rank: float, k: int) -> int:
    """Frequent Directions size for target mu, given sum_{i>k} s_i^2/s_1^2."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return int(np.ceil(k + tail_stable_rank / mu))


def rproj_ell_for_mu(mu: float, stable_rank: float, fail_prob: float = 0.05) -> int:
    """Sign-projection width for target mu (unit-constant reading)."""
    if mu <= 0 or not 0 < fail_prob < 1:
        raise ValueError("mu must be positive and fail_prob in (0, 1)")
    return int(np.ceil((stable_rank + np.log(1.0 / fail_prob)) / mu**2))


def colsample_ell_for_mu(mu: float, stable_rank: float) -> int:
    """Column-subsample count for target mu (unit-constant reading)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    sr = max(stable_rank, 2.0)
    return int(np.ceil(sr * np.log(sr / mu**2) / mu**2))


def mu_for_pointwise_t(eps: float, delta: float) -> float:
    """Covariance error making |T^k - ~T^k| <= eps * |a|^2 pointwise."""
    return eps**2 * delta


def mu_for_pointwise_l(eps: float, k: int, stable_rank: float, kappa: float) -> float:
    """Covariance error for the pointwise rank-k leverage guarantee."""
    return eps**3 * k**2 / (1e3 * stable_rank**3 * kappa**4)


def mu_for_average_l(eps: float, delta: float) -> float:
    """Covariance error for the average rank-k leverage guarantee."""
    return eps**2 * delta / 16.0


def mu_for_average_t(eps: float, stable_rank: float, k: int) -> float:
    """Covariance error for the average projection-distance guarantee."""
    return eps**3 * stable_rank**3 / (125.0 * k**4)
