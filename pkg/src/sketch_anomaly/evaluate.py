"""Ground-truth labeling and F1 evaluation of approximate anomaly scores.

Methodology: exact scores (full SVD) define the ground truth by labeling
the top eta fraction of rows anomalous.  An approximate scorer is then
judged by thresholding its scores at the top eta' fraction, sweeping eta'
over a grid and reporting the best F1 (harmonic mean of precision and
recall).  Randomized sketches are averaged over several seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .pipelines import PipelineConfig, run_pipeline
from .scores import ScoreRecord, batch_scores
from .util import thread_cap

SCORE_KINDS = ("leverage-k", "projection-k", "ridge", "tail", "full")

_KIND_TO_FIELD = {
    "leverage-k": "rank_k_leverage",
    "projection-k": "projection_distance",
    "ridge": "ridge_leverage",
    "tail": "tail_leverage",
    "full": "full_leverage",
}

RANDOMIZED_MODES = ("rproj", "colsample", "rowsample")


def default_sweep_grid(eta: float, points: int = 40) -> tuple[float, ...]:
    """Log-spaced candidate fractions in [eta/4, 4*eta], clipped to (0, 1)."""
    lo, hi = eta / 4.0, min(4.0 * eta, 0.999)
    grid = np.geomspace(lo, hi, points)
    return tuple(float(g) for g in grid if 0.0 < g < 1.0)


@dataclass(frozen=True)
class EvalConfig:
    """Parameters of one evaluation run."""

    k: int
    eta: float
    score_kind: str = "projection-k"
    sweep_grid: tuple[float, ...] = ()
    lam: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {self.eta}")
        if self.score_kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.score_kind!r}")
        if self.score_kind == "ridge" and (self.lam is None or self.lam <= 0):
            raise ValueError("ridge scoring needs a positive lambda")
        grid = self.sweep_grid or default_sweep_grid(self.eta)
        if not grid:
            raise ValueError("sweep grid is empty")
        if any(not 0.0 < g < 1.0 for g in grid):
            raise ValueError("sweep grid fractions must lie in (0, 1)")
        object.__setattr__(self, "sweep_grid", tuple(grid))


@dataclass(frozen=True)
class EvalReport:
    """Best-threshold F1 result; per_seed carries one entry per seed when
    a randomized scorer was averaged.  The harmonic-mean identity between
    f1, precision, and recall holds per individual run."""

    f1: float
    best_eta_prime: float
    precision: float
    recall: float
    per_seed: list | None = None

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "best_eta_prime": self.best_eta_prime,
            "precision": self.precision,
            "recall": self.recall,
            "per_seed": self.per_seed,
        }


def record_score(record: ScoreRecord, kind: str) -> float:
    """Extract one score kind from a record; sentinels rank lowest."""
    if not record.defined:
        return -math.inf
    value = getattr(record, _KIND_TO_FIELD[kind])
    if value is None:
        raise ValueError(
            f"score kind {kind!r} is not available in mode {record.mode!r}"
        )
    return value


def scores_vector(records: list[ScoreRecord], kind: str) -> np.ndarray:
    return np.asarray([record_score(r, kind) for r in records])


def top_fraction_mask(scores: np.ndarray, fraction: float) -> np.ndarray:
    """Boolean mask of the top ceil(fraction * n) scores.

    Ties broken toward the lower row index, so the selection is a pure
    function of the score vector.
    """
    n = scores.shape[0]
    m = math.ceil(fraction * n)
    if m <= 0:
        raise ValueError(
            f"fraction {fraction} selects an empty positive class (n={n})"
        )
    order = np.lexsort((np.arange(n), -scores))
    mask = np.zeros(n, dtype=bool)
    mask[order[:m]] = True
    return mask


def ground_truth(matrix, cfg: EvalConfig) -> np.ndarray:
    """Label the top eta fraction of rows by exact score as anomalous."""
    a = as_matrix(matrix)
    records = batch_scores(a, cfg.k, lam=cfg.lam)
    exact = scores_vector(records, cfg.score_kind)
    return top_fraction_mask(exact, cfg.eta)


def f1_at_mask(labels: np.ndarray, predicted: np.ndarray) -> tuple[float, float, float]:
    """(f1, precision, recall); empty predicted set scores 0."""
    true_pos = int(np.count_nonzero(labels & predicted))
    pred_pos = int(np.count_nonzero(predicted))
    actual_pos = int(np.count_nonzero(labels))
    if pred_pos == 0 or actual_pos == 0 or true_pos == 0:
        return 0.0, 0.0 if pred_pos == 0 else true_pos / pred_pos, 0.0
    precision = true_pos / pred_pos
    recall = true_pos / actual_pos
    return 2.0 * precision * recall / (precision + recall), precision, recall


def f1_sweep(approx_scores, labels, sweep_grid) -> EvalReport:
    """Best F1 over the threshold grid."""
    scores = np.asarray(approx_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("scores and labels length mismatch")
    if not np.any(labels):
        raise ValueError("label vector has no positives")
    best = None
    for eta_prime in sweep_grid:
        mask = top_fraction_mask(scores, eta_prime)
        f1, precision, recall = f1_at_mask(labels, mask)
        if best is None or f1 > best[0]:
            best = (f1, float(eta_prime), precision, recall)
    return EvalReport(
        f1=best[0], best_eta_prime=best[1], precision=best[2], recall=best[3]
    )


def evaluate_pipeline(
    matrix,
    mode: str,
    ell: int,
    cfg: EvalConfig,
    seeds: tuple[int, ...] = (0,),
) -> EvalReport:
    """Score with one sketch pipeline and report F1 against exact labels.

    Randomized modes are averaged over the given seeds (one full pipeline
    run per seed, concurrently when the thread cap allows); top-level
    fields are the per-seed means with the median best threshold.
    """
    a = as_matrix(matrix)
    labels = ground_truth(a, cfg)

    if mode == "exact":
        records = batch_scores(a, cfg.k, lam=cfg.lam)
        return f1_sweep(scores_vector(records, cfg.score_kind), labels, cfg.sweep_grid)

    def run_one(seed: int) -> EvalReport:
        pipe_cfg = PipelineConfig(
            k=cfg.k, ell=ell, seed=seed, lam=cfg.lam, mode=mode
        )
        records = run_pipeline(lambda: iter(a), pipe_cfg)
        return f1_sweep(
            scores_vector(records, cfg.score_kind), labels, cfg.sweep_grid
        )

    if mode not in RANDOMIZED_MODES:
        seeds = seeds[:1]
    if len(seeds) == 1:
        single = run_one(seeds[0])
        if mode not in RANDOMIZED_MODES:
            return single
        reports = [single]
    else:
        workers = min(thread_cap(), len(seeds))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reports = list(pool.map(run_one, seeds))
        else:
            reports = [run_one(s) for s in seeds]

    per_seed = [
        {"seed": int(s), **rep.to_dict() | {"per_seed": None}}
        for s, rep in zip(seeds, reports)
    ]
    for entry in per_seed:
        entry.pop("per_seed")
    return EvalReport(
        f1=float(np.mean([r.f1 for r in reports])),
        best_eta_prime=float(np.median([r.best_eta_prime for r in reports])),
        precision=float(np.mean([r.precision for r in reports])),
        recall=float(np.mean([r.recall for r in reports])),
        per_seed=per_seed,
    )
