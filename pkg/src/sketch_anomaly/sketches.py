"""Streaming sketch constructions.

Four sketches, all single-writer streaming accumulators:

* ``FrequentDirections`` - deterministic row-space sketch with a doubled
  buffer: rows accumulate until the buffer holds 2*ell of them, then an
  SVD shrink subtracts the ell-th squared singular value from every
  direction and keeps the surviving rows.
* ``SignProjector`` - pseudorandom +-1/sqrt(ell) projection whose entries
  come from a degree-(w-1) polynomial hash over GF(2**61 - 1); entry (i, j)
  is a pure function of (seed, i, j).
* ``row_sample`` - length-squared row sampling via ell independent
  single-slot reservoirs, rescaled so the sketch covariance is unbiased.
* ``ColumnSamplePlan`` - the zero-th pass of column subsampling: reservoir
  sampling over squared entries in row-major order, plus the per-column
  masses needed to rescale on later passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ZeroMassError
from .linalg import as_matrix, as_row, svd_thin
from .rng import mix64, mod61, mulmod61, uniform01

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the numpy fallback test
    HAVE_NUMBA = False

_LANE_ROW_SAMPLER = 0x521AF00D
_LANE_COL_SAMPLER = 0x0C01F00D
_LANE_SIGN_COEFF = 0x516EC0EF

DEFAULT_INDEPENDENCE = 32

# uint64 constants for the jitted hash kernel; numba silently promotes
# mixed uint64/int64 arithmetic to float64, so every operand stays uint64.
_U64_MASK61 = np.uint64((1 << 61) - 1)
_U64_LO32 = np.uint64(0xFFFFFFFF)
_U64_LO29 = np.uint64(0x1FFFFFFF)
_U64_S3 = np.uint64(3)
_U64_S29 = np.uint64(29)
_U64_S32 = np.uint64(32)
_U64_S61 = np.uint64(61)
_U64_ONE = np.uint64(1)
_U64_ZERO = np.uint64(0)


def _poly_signs_loop(positions, coeffs, scale, out):
    w = coeffs.shape[0]
    for idx in range(positions.shape[0]):
        x = positions[idx]
        x = (x & _U64_MASK61) + (x >> _U64_S61)
        if x >= _U64_MASK61:
            x -= _U64_MASK61
        acc = coeffs[w - 1]
        for t in range(w - 2, -1, -1):
            # acc * x mod 2**61-1 via 32-bit splits; partials fit in uint64.
            a1 = acc >> _U64_S32
            a0 = acc & _U64_LO32
            b1 = x >> _U64_S32
            b0 = x & _U64_LO32
            mid = a1 * b0 + a0 * b1
            lo = a0 * b0
            acc = (
                ((a1 * b1) << _U64_S3)
                + (mid >> _U64_S29)
                + ((mid & _U64_LO29) << _U64_S32)
                + (lo & _U64_MASK61)
                + (lo >> _U64_S61)
            )
            acc = (acc & _U64_MASK61) + (acc >> _U64_S61)
            acc += coeffs[t]
            acc = (acc & _U64_MASK61) + (acc >> _U64_S61)
            if acc >= _U64_MASK61:
                acc -= _U64_MASK61
        out[idx] = scale if (acc & _U64_ONE) == _U64_ZERO else -scale
    return out


if HAVE_NUMBA:
    _poly_signs_kernel = _njit(cache=True, nogil=True)(_poly_signs_loop)
else:
    _poly_signs_kernel = None


class FrequentDirections:
    """Frequent Directions with a 2*ell buffer and shrink-by-sigma_ell^2.

    After any prefix of the stream, ``sketch()`` is a matrix with at most
    2*ell - 1 rows whose Gram satisfies, for every k < ell,

        ||A^T A - S^T S|| <= ||A - A_k||_F^2 / (ell - k).
    """

    def __init__(self, ell: int, dim: int):
        if ell < 1:
            raise ValueError(f"ell must be >= 1, got {ell}")
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.ell = ell
        self.dim = dim
        self.buffer = np.zeros((2 * ell, dim))
        self.fill = 0
        self.shrink_count = 0

    def update(self, row) -> None:
        """Append one row; shrink when the buffer reaches 2*ell rows."""
        a = as_row(row, self.dim)
        self.buffer[self.fill] = a
        self.fill += 1
        if self.fill == 2 * self.ell:
            self._shrink()

    def _shrink(self) -> None:
        decomp = svd_thin(self.buffer)
        sigma = decomp.values
        shift = sigma[self.ell - 1] ** 2 if sigma.size >= self.ell else 0.0
        kept = np.sqrt(
            np.clip(sigma[: decomp.rank_used] ** 2 - shift, 0.0, None)
        )
        nonzero = kept > 0.0
        count = int(np.count_nonzero(nonzero))
        self.buffer[:] = 0.0
        if count:
            self.buffer[:count] = (
                kept[nonzero, None] * decomp.right_vectors[:, nonzero].T
            )
        self.fill = count
        self.shrink_count += 1

    def sketch(self) -> np.ndarray:
        """Current sketch rows (copy)."""
        return self.buffer[: self.fill].copy()

    def covariance(self) -> np.ndarray:
        s = self.buffer[: self.fill]
        return s.T @ s

    def frobenius_sq(self) -> float:
        return float(np.sum(self.buffer[: self.fill] ** 2))


class SignProjector:
    """Limited-independence pseudorandom sign matrix R in R^{dim x ell}.

    Entry (i, j) is ``+-1/sqrt(ell)``, the sign being the low bit of a
    degree-(w-1) polynomial over GF(2**61 - 1) evaluated at the entry's
    global position.  State is the seed plus w field coefficients, so the
    projector itself costs O(w) words; ``matrix()`` materializes all
    dim * ell entries for fast dense products and is cached.
    """

    def __init__(
        self,
        seed: int,
        ell: int,
        dim: int,
        independence_w: int = DEFAULT_INDEPENDENCE,
    ):
        if ell < 1 or dim < 1:
            raise ValueError("ell and dim must be >= 1")
        if independence_w < 2:
            raise ValueError("independence_w must be >= 2")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.ell = ell
        self.dim = dim
        self.independence_w = independence_w
        self.coefficients = mod61(
            mix64(self.seed, _LANE_SIGN_COEFF, np.arange(independence_w, dtype=np.uint64))
        )
        self._scale = 1.0 / np.sqrt(ell)
        self._matrix: np.ndarray | None = None

    def _hash(self, positions: np.ndarray) -> np.ndarray:
        """Horner evaluation of the coefficient polynomial at positions."""
        x = mod61(positions)
        coeffs = self.coefficients
        acc = np.broadcast_to(coeffs[-1], x.shape).copy()
        with np.errstate(over="ignore"):
            for t in range(self.independence_w - 2, -1, -1):
                acc = mod61(mulmod61(acc, x) + coeffs[t])
        return acc

    def _signs_vectorized(self, positions: np.ndarray) -> np.ndarray:
        bits = self._hash(positions) & np.uint64(1)
        return np.where(bits == 0, self._scale, -self._scale)

    def _signs(self, positions: np.ndarray) -> np.ndarray:
        if _poly_signs_kernel is None:
            return self._signs_vectorized(positions)
        out = np.empty(positions.shape[0], dtype=np.float64)
        return _poly_signs_kernel(
            np.ascontiguousarray(positions, dtype=np.uint64),
            self.coefficients,
            self._scale,
            out,
        )

    def entry(self, i: int, j: int) -> float:
        """R[i, j] for input dimension i, projection column j."""
        if not (0 <= i < self.dim and 0 <= j < self.ell):
            raise IndexError(f"entry index ({i}, {j}) out of range")
        pos = np.uint64(j) * np.uint64(self.dim) + np.uint64(i)
        return float(self._signs(np.asarray([pos], dtype=np.uint64))[0])

    def matrix(self) -> np.ndarray:
        """The full dim x ell matrix (cached; read-only)."""
        if self._matrix is None:
            positions = np.arange(self.ell * self.dim, dtype=np.uint64)
            mat = self._signs(positions).reshape(self.ell, self.dim).T
            mat = np.ascontiguousarray(mat)
            mat.setflags(write=False)
            self._matrix = mat
        return self._matrix

    def project(self, row) -> np.ndarray:
        """R^T a for a single row a in R^dim."""
        a = as_row(row, self.dim)
        return self.matrix().T @ a

    def gram(self, block_cols: int = 65536) -> np.ndarray:
        """R R^T (dim x dim), accumulated in column blocks.

        Lets callers with very large ell evaluate sketch covariances
        ``(A R)(A R)^T = A (R R^T) A^T`` without holding R.
        """
        g = np.zeros((self.dim, self.dim))
        for start in range(0, self.ell, block_cols):
            stop = min(start + block_cols, self.ell)
            positions = np.arange(
                start * self.dim, stop * self.dim, dtype=np.uint64
            )
            block = self._signs(positions).reshape(stop - start, self.dim)
            g += block.T @ block
        return g


def _iter_rows(rows):
    if isinstance(rows, np.ndarray):
        mat = as_matrix(rows, "rows")
        return iter(mat)
    return iter(rows)


def row_sample(rows, ell: int, seed: int) -> np.ndarray:
    """Sample ell rows proportional to squared length, rescaled.

    Each of the ell output slots runs an independent single-slot reservoir
    (sampling with replacement); a kept row is rescaled by
    ``||A||_F / (sqrt(ell) * ||row||)`` so the sketch covariance is an
    unbiased estimate of A^T A.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    lanes = np.arange(ell, dtype=np.uint64)
    chosen: np.ndarray | None = None
    chosen_mass = np.zeros(ell)
    total = 0.0
    width: int | None = None
    for pos, row in enumerate(_iter_rows(rows)):
        a = as_row(row, width)
        if chosen is None:
            width = a.shape[0]
            chosen = np.zeros((ell, width))
        w = float(a @ a)
        total += w
        if w == 0.0 or total == 0.0:
            continue
        u = uniform01(seed, _LANE_ROW_SAMPLER, lanes, np.uint64(pos))
        take = u < (w / total)
        if np.any(take):
            chosen[take] = a
            chosen_mass[take] = w
    if chosen is None:
        raise ShapeError("empty row stream")
    if total == 0.0:
        raise ZeroMassError("all rows have zero length; nothing to sample")
    scale = np.sqrt(total) / (np.sqrt(ell) * np.sqrt(chosen_mass))
    return chosen * scale[:, None]


@dataclass
class ColumnSamplePlan:
    """Output of the zero-th column-subsampling pass.

    ``indices[t]`` is the column the t-th reservoir settled on,
    ``column_masses[j]`` the squared mass of column j seen during the
    pass, and ``running_mass`` their total (= ||A||_F^2).
    """

    ell: int
    dim: int
    seed: int
    indices: np.ndarray
    column_masses: np.ndarray
    running_mass: float
    entries_seen: int

    def scales(self) -> np.ndarray:
        """Per-slot rescaling ||A||_F / (sqrt(ell) * ||column S_t||)."""
        masses = self.column_masses[self.indices]
        if np.any(masses <= 0.0):
            raise ZeroMassError(
                "reservoir holds a column with zero recorded mass"
            )
        return np.sqrt(self.running_mass) / (np.sqrt(self.ell) * np.sqrt(masses))


def column_sample_plan(rows, ell: int, seed: int) -> ColumnSamplePlan:
    """Zero-th pass: reservoir-sample ell column indices by squared entry.

    Entries are consumed in row-major order.  On entry (i, j) with value a,
    every slot t independently resets to column j with probability
    ``a^2 / s`` where s is the running sum of squared entries.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    lanes = np.arange(ell, dtype=np.uint64)[:, None]
    indices = np.zeros(ell, dtype=np.int64)
    col_masses: np.ndarray | None = None
    total = 0.0
    width: int | None = None
    pos = 0
    for row in _iter_rows(rows):
        a = as_row(row, width)
        if col_masses is None:
            width = a.shape[0]
            col_masses = np.zeros(width)
        sq = a**2
        col_masses += sq
        cumulative = total + np.cumsum(sq)
        total = float(cumulative[-1])
        with np.errstate(invalid="ignore", divide="ignore"):
            thresholds = np.where(cumulative > 0.0, sq / cumulative, 0.0)
        positions = np.arange(pos, pos + width, dtype=np.uint64)[None, :]
        u = uniform01(seed, _LANE_COL_SAMPLER, lanes, positions)
        hits = u < thresholds[None, :]
        any_hit = hits.any(axis=1)
        last_hit = width - 1 - np.argmax(hits[:, ::-1], axis=1)
        indices[any_hit] = last_hit[any_hit]
        pos += width
    if col_masses is None:
        raise ShapeError("empty entry stream")
    if total == 0.0:
        raise ZeroMassError("zero total mass; cannot sample columns")
    return ColumnSamplePlan(
        ell=ell,
        dim=width,
        seed=seed,
        indices=indices,
        column_masses=col_masses,
        running_mass=total,
        entries_seen=pos,
    )


def apply_column_plan(
    plan: ColumnSamplePlan, row, col_masses: np.ndarray | None = None
) -> np.ndarray:
    """First-pass projection of one row through the sampling plan.

    ``out[t] = row[S_t] * ||A||_F / (sqrt(ell) * ||column S_t||)`` using
    the column masses recorded in pass zero (or an explicit override).
    """
    a = as_row(row, plan.dim)
    if col_masses is None:
        scales = plan.scales()
    else:
        masses = np.asarray(col_masses, dtype=np.float64)[plan.indices]
        if np.any(masses <= 0.0):
            raise ZeroMassError("sampled column has zero recorded mass")
        scales = np.sqrt(plan.running_mass) / (np.sqrt(plan.ell) * np.sqrt(masses))
    return a[plan.indices] * scales
