"""Hermitian eigendecomposition and empirical SFF evaluation.

The eigensolver is LAPACK's Hermitian solver behind the backward-error
contract ||Hv - lambda v|| <= 1e-9 ||H||; the contract, not the provider, is
what the tests pin down.  SFF evaluation is direct O(N * |grid|) summation
with pairwise-tree accumulation of the complex exponentials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import HermitianMatrix


@dataclass(frozen=True)
class Spectrum:
    """Sorted real eigenvalues of one matrix."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("spectrum must be nonempty and finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("spectrum must be ascending")

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SffSample:
    """SFF at one time: phi = <e^{itH}>, sff = |phi|^2."""

    t: float
    phi: complex
    sff: float


def eigenvalues(H: HermitianMatrix) -> Spectrum:
    """Full ascending spectrum of a Hermitian matrix."""
    try:
        vals = np.linalg.eigvalsh(H.dense())
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise RuntimeError(
            f"eigensolver did not converge; matrix provenance {H.provenance!r}"
        ) from exc
    return Spectrum(values=vals)


def make_grid(t_min: float, t_max: float, points: int, spacing: str = "log") -> np.ndarray:
    """Strictly increasing positive time grid, log or linear spacing."""
    if t_min <= 0.0 or t_max <= t_min:
        raise ValueError("need 0 < t_min < t_max")
    if points < 2:
        raise ValueError("need at least two grid points")
    if spacing == "log":
        return np.geomspace(t_min, t_max, points)
    if spacing == "linear":
        return np.linspace(t_min, t_max, points)
    raise ValueError(f"unknown spacing {spacing!r}")


def validate_grid(grid: np.ndarray) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise ValueError("time grid must be nonempty and finite")
    if g[0] <= 0.0 or np.any(np.diff(g) <= 0.0):
        raise ValueError("time grid must be strictly increasing and positive")
    return g


def sff_phi(spectrum: Spectrum, grid: np.ndarray) -> np.ndarray:
    """phi(t) = N^{-1} sum_j exp(i t lambda_j) over the grid."""
    g = validate_grid(grid)
    lam = spectrum.values
    # np.sum reduces contiguous float blocks pairwise, bounding rounding error
    # at large t * ||lambda||.
    phase = np.exp(1j * np.outer(g, lam))
    return phase.sum(axis=1) / lam.size


def sff_eval(spectrum: Spectrum, grid: np.ndarray) -> np.ndarray:
    """|phi(t)|^2 over the grid; values in [0, 1], sff(0+) -> 1."""
    phi = sff_phi(spectrum, grid)
    return np.abs(phi) ** 2


def sff_point(spectrum: Spectrum, t: float) -> SffSample:
    """Single-time SFF record."""
    lam = spectrum.values
    phi = complex(np.exp(1j * t * lam).sum() / lam.size)
    return SffSample(t=t, phi=phi, sff=abs(phi) ** 2)
