"""Dense symmetric eigendecomposition, thin SVD, and spectral statistics.

Matrices are plain ``numpy.ndarray`` in float64, row-major.  ``as_matrix``
is the boundary validator: every public operation accepts anything
array-like and rejects non-finite entries.

Decompositions are deterministic: eigenvalues are sorted descending with
ties broken by the solver's original order (stable sort), and every stored
vector is sign-normalized so that its largest-magnitude entry is
nonnegative.  Two calls on identical input bytes return identical output
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateSpectrumError, ShapeError

RANK_FLOOR = 1e-12
DEFAULT_EIG_TOL = 1e-13
_SYMMETRY_RTOL = 1e-12


def as_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D float64 C-contiguous array."""
    arr = np.ascontiguousarray(obj, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ShapeError(f"{name} must be nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_row(obj, width: int | None = None, name: str = "row") -> np.ndarray:
    """Validate a 1-D float64 vector, optionally of fixed width."""
    vec = np.ascontiguousarray(obj, dtype=np.float64)
    if vec.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got ndim={vec.ndim}")
    if width is not None and vec.shape[0] != width:
        raise ShapeError(f"{name} has width {vec.shape[0]}, expected {width}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} contains non-finite entries")
    return vec


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ordered eigen/singular system.

    ``values`` are sorted non-increasing.  For SVD results they are
    singular values (nonnegative, full length ``min(n, d)``) while
    ``right_vectors`` keeps only the ``rank_used`` columns above the
    relative floor ``RANK_FLOOR * values[0]``.  For plain symmetric
    eigendecompositions, ``values`` are eigenvalues (possibly negative)
    and ``right_vectors`` holds all eigenvectors.

    ``left_vectors`` is None unless explicitly materialized.
    """

    values: np.ndarray
    right_vectors: np.ndarray
    rank_used: int
    left_vectors: np.ndarray | None = None

    def __post_init__(self):
        self.values.setflags(write=False)
        self.right_vectors.setflags(write=False)
        if self.left_vectors is not None:
            self.left_vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.right_vectors.shape[0]


@dataclass(frozen=True)
class SpectralStats:
    """Spectrum-derived scalars used by separation and sketch-size bounds."""

    k: int
    p: int
    sigma_sq: np.ndarray
    separation_delta: float
    condition_kappa_k: float
    stable_rank: float
    numeric_rank_p: float


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is nonnegative."""
    if vectors.shape[1] == 0:
        return vectors
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(matrix, tol: float = DEFAULT_EIG_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Backed by LAPACK's symmetric solver on the explicitly symmetrized
    input.  The reconstruction residual is verified against
    ``tol * ||M||_F`` so a silently inaccurate factorization raises
    ``ConvergenceError`` instead of propagating.
    """
    m = as_matrix(matrix, "symmetric matrix")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n, d = m.shape
    if n != d:
        raise ShapeError(f"expected square matrix, got {n}x{d}")
    norm_f = float(np.linalg.norm(m))
    asym = float(np.linalg.norm(m - m.T))
    if asym > _SYMMETRY_RTOL * max(norm_f, 1e-300):
        raise ShapeError(
            f"matrix is not symmetric: ||M - M^T||_F = {asym:.3e} "
            f"exceeds {_SYMMETRY_RTOL:.0e} * ||M||_F"
        )
    sym = 0.5 * (m + m.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.ascontiguousarray(eigvals[order])
    eigvecs = np.ascontiguousarray(_fix_signs(eigvecs[:, order]))

    residual = float(np.linalg.norm((eigvecs * eigvals) @ eigvecs.T - m))
    if residual > tol * max(norm_f, 1e-300):
        raise ConvergenceError(
            f"eigendecomposition residual {residual:.3e} exceeds "
            f"{tol:.1e} * ||M||_F = {tol * norm_f:.3e}",
            residual=residual,
        )
    return SpectralDecomposition(
        values=eigvals, right_vectors=eigvecs, rank_used=d
    )


def svd_thin(matrix, compute_left: bool = False) -> SpectralDecomposition:
    """Thin SVD via the smaller Gram matrix.

    Uses ``A^T A`` when d <= n, else ``A A^T``.  Singular values cover the
    full ``min(n, d)`` spectrum; stored singular vectors stop at the rank
    boundary (``sigma_i > RANK_FLOOR * sigma_1``).
    """
    a = as_matrix(matrix)
    n, d = a.shape
    if d <= n:
        gram = a.T @ a
        decomp = sym_eig(gram)
        sigma = np.sqrt(np.clip(decomp.values, 0.0, None))
        rank = _rank_from_sigma(sigma)
        right = np.ascontiguousarray(decomp.right_vectors[:, :rank])
        left = None
        if compute_left and rank > 0:
            left = np.ascontiguousarray((a @ right) / sigma[:rank])
    else:
        gram = a @ a.T
        decomp = sym_eig(gram)
        sigma = np.sqrt(np.clip(decomp.values, 0.0, None))
        rank = _rank_from_sigma(sigma)
        u0 = decomp.right_vectors[:, :rank]
        if rank > 0:
            raw = (a.T @ u0) / sigma[:rank]
            # Dividing by small sigma erodes orthogonality; one QR pass
            # restores it without moving the well-conditioned columns.
            q, r = np.linalg.qr(raw)
            diag_signs = np.sign(np.diag(r))
            diag_signs[diag_signs == 0] = 1.0
            right = np.ascontiguousarray(_fix_signs(q * diag_signs))
        else:
            right = np.zeros((d, 0))
        left = None
        if compute_left and rank > 0:
            left = np.ascontiguousarray((a @ right) / sigma[:rank])
    return SpectralDecomposition(
        values=sigma, right_vectors=right, rank_used=rank, left_vectors=left
    )


def effective_rank(sigma: np.ndarray, floor: float = RANK_FLOOR) -> int:
    """Count singular values above the usable floor.

    The configured relative floor is combined with the Gram-route noise
    level: eigenvalues of A^T A below ~m*eps*lambda_1 are indistinguishable
    from rounding, so sigma below sqrt(m*eps)*sigma_1 cannot be trusted
    regardless of how small the configured floor is.
    """
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    gram_noise = np.sqrt(sigma.size * np.finfo(np.float64).eps)
    thresh = max(floor, gram_noise) * sigma[0]
    return int(np.count_nonzero(sigma > thresh))


def _rank_from_sigma(sigma: np.ndarray) -> int:
    return effective_rank(sigma)


def spectral_stats(matrix, k: int, p: int) -> SpectralStats:
    """Separation, condition number, stable rank, and p-th numeric rank."""
    a = as_matrix(matrix)
    n, d = a.shape
    m = min(n, d)
    if not 1 <= k < m:
        raise ValueError(f"k must satisfy 1 <= k < min(n, d) = {m}, got {k}")
    if not 1 <= p <= m:
        raise ValueError(f"p must satisfy 1 <= p <= min(n, d) = {m}, got {p}")
    sigma = svd_thin(a).values
    sigma_sq = sigma**2
    top = float(sigma_sq[0])
    if top <= 0.0:
        raise DegenerateSpectrumError("zero matrix has no spectral statistics")
    total = float(sigma_sq.sum())
    delta = float((sigma_sq[k - 1] - sigma_sq[k]) / top)
    kappa = float(top / sigma_sq[k - 1]) if sigma_sq[k - 1] > 0 else np.inf
    head_p = float(sigma_sq[:p].sum())
    numeric_rank = p * total / head_p if head_p > 0 else np.inf
    return SpectralStats(
        k=k,
        p=p,
        sigma_sq=sigma_sq,
        separation_delta=delta,
        condition_kappa_k=kappa,
        stable_rank=total / top,
        numeric_rank_p=numeric_rank,
    )


def truncate(decomp: SpectralDecomposition, k: int) -> np.ndarray:
    """Best rank-k reconstruction ``sum_{i<=k} sigma_i u_i v_i^T``."""
    if decomp.left_vectors is None:
        raise ValueError("truncate requires materialized left vectors")
    if not 0 <= k <= decomp.rank_used:
        raise ValueError(
            f"k must be within [0, rank_used={decomp.rank_used}], got {k}"
        )
    u = decomp.left_vectors[:, :k]
    v = decomp.right_vectors[:, :k]
    return (u * decomp.values[:k]) @ v.T


def operator_norm(matrix) -> float:
    """Largest singular value, via the top eigenvalue of the smaller Gram."""
    m = as_matrix(matrix, "matrix")
    n, d = m.shape
    gram = m.T @ m if d <= n else m @ m.T
    gram = 0.5 * (gram + gram.T)
    top = float(np.linalg.eigvalsh(gram)[-1])
    return float(np.sqrt(max(top, 0.0)))


def singular_values(matrix) -> np.ndarray:
    """All min(n, d) singular values, descending."""
    return svd_thin(matrix).values
