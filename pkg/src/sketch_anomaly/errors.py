"""Exception types shared across the package."""

from __future__ import annotations


class ShapeError(ValueError):
    """Input has the wrong shape (non-square, asymmetric, width mismatch)."""


class ConvergenceError(RuntimeError):
    """Eigensolver failed to reach the requested tolerance.

    Carries the achieved relative residual so callers can decide whether
    the partial result is still usable.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class DegenerateSpectrumError(ValueError):
    """Spectrum too degenerate for the requested statistic (e.g. zero matrix)."""


class RankDeficientError(ValueError):
    """Basis or sketch has fewer usable directions than the requested rank."""


class ZeroMassError(ValueError):
    """Sampler saw no mass (all-zero input stream)."""


class DataFormatError(ValueError):
    """Malformed input file (CSV cell, ragged row, bad snapshot header)."""
