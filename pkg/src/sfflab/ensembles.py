"""Reproducible samplers for Wigner matrices and parameter distributions.

Entry laws are normalized so off-diagonal entries have mean zero and
E|h|^2 = 1/N (with E h^2 = 0 in the complex class) and diagonal entries have
variance 2/(beta N).  The catalog spans negative, zero, and positive fourth
cumulant: gaussian (kappa4 = 0), rademacher / uniform (kappa4 < 0), and a
two-point mixture (kappa4 > 0) behind the same interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import standard_normals, substream

_LAW_KINDS = ("gaussian", "rademacher", "uniform", "mixture")
_MIXTURE_P = 0.125  # atom weight of the two-point mixture law


@dataclass(frozen=True)
class EntryLaw:
    """Distribution family of the independent matrix entries."""

    kind: str
    beta: int

    def __post_init__(self):
        if self.kind not in _LAW_KINDS:
            raise ValueError(f"unknown entry law {self.kind!r}")
        if self.beta not in (1, 2):
            raise ValueError(f"beta must be 1 or 2, got {self.beta}")

    def real_draws(self, rng: np.random.Generator, size: int, var: float) -> np.ndarray:
        """Mean-zero real variates with variance var."""
        if self.kind == "gaussian":
            return math.sqrt(var) * standard_normals(rng, size)
        if self.kind == "rademacher":
            signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return math.sqrt(var) * signs
        if self.kind == "uniform":
            return math.sqrt(3.0 * var) * (2.0 * rng.random(size) - 1.0)
        hit = rng.random(size) < _MIXTURE_P
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return np.where(hit, math.sqrt(var / _MIXTURE_P) * signs, 0.0)

    def complex_draws(self, rng: np.random.Generator, size: int, var: float) -> np.ndarray:
        """Complex variates with E h = 0, E|h|^2 = var, E h^2 = 0."""
        if self.kind == "gaussian":
            z = math.sqrt(var / 2.0) * standard_normals(rng, 2 * size)
            return z[:size] + 1j * z[size:]
        if self.kind == "rademacher":
            phase = 1j ** rng.integers(0, 4, size)
            return math.sqrt(var) * phase
        if self.kind == "uniform":
            b = math.sqrt(3.0 * var / 2.0)
            return b * ((2.0 * rng.random(size) - 1.0) + 1j * (2.0 * rng.random(size) - 1.0))
        hit = rng.random(size) < _MIXTURE_P
        phase = 1j ** rng.integers(0, 4, size)
        return np.where(hit, math.sqrt(var / _MIXTURE_P) * phase, 0.0 + 0.0j)


def kurtosis_of(law: EntryLaw) -> float:
    """Fourth cumulant kappa4 = N^2 E|h_12|^4 - 1 - 2/beta, exact per law."""
    fourth = {
        "gaussian": 1.0 + 2.0 / law.beta,  # kappa4 = 0 by construction
        "rademacher": 1.0,
        "uniform": 9.0 / 5.0 if law.beta == 1 else 7.0 / 5.0,
        "mixture": 1.0 / _MIXTURE_P,
    }[law.kind]
    return fourth - 1.0 - 2.0 / law.beta


@dataclass(frozen=True)
class EnsembleSpec:
    """One Wigner ensemble: dimension, entry law, and master seed."""

    n: int
    law: EntryLaw
    seed: int
    kappa4: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got {self.n}")
        exact = kurtosis_of(self.law)
        if self.kappa4 is None:
            object.__setattr__(self, "kappa4", exact)
        elif abs(self.kappa4 - exact) > 1e-12:
            raise ValueError(f"kappa4 {self.kappa4} inconsistent with law (expected {exact})")

    @property
    def beta(self) -> int:
        return self.law.beta


@dataclass(frozen=True)
class HermitianMatrix:
    """Hermitian matrix stored as its lower triangle.

    `re` holds the real parts on the lower triangle including the diagonal;
    `im` holds imaginary parts on the strict lower triangle (absent for
    beta = 1).  Hermiticity is exact by construction.
    """

    n: int
    re: np.ndarray
    im: np.ndarray | None = None
    provenance: tuple = ()

    def dense(self) -> np.ndarray:
        sym = self.re + self.re.T - np.diag(np.diag(self.re))
        if self.im is None:
            return sym
        return sym + 1j * (self.im - self.im.T)

    def trace(self) -> float:
        return float(np.trace(self.re))


def _strict_lower_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.tril_indices(n, k=-1)


def sample_wigner(spec: EnsembleSpec, stream) -> HermitianMatrix:
    """Draw one Wigner matrix; deterministic given (spec.seed, stream)."""
    key = stream if isinstance(stream, tuple) else (stream,)
    rng = substream(spec.seed, *key)
    n = spec.n
    beta = spec.beta
    diag = spec.law.real_draws(rng, n, 2.0 / (beta * n))
    rows, cols = _strict_lower_indices(n)
    re = np.zeros((n, n))
    re[np.arange(n), np.arange(n)] = diag
    if beta == 1:
        off = spec.law.real_draws(rng, rows.size, 1.0 / n)
        re[rows, cols] = off
        return HermitianMatrix(n=n, re=re, im=None, provenance=(spec.seed, *key))
    off = spec.law.complex_draws(rng, rows.size, 1.0 / n)
    im = np.zeros((n, n))
    re[rows, cols] = off.real
    im[rows, cols] = off.imag
    return HermitianMatrix(n=n, re=re, im=im, provenance=(spec.seed, *key))


def combine(matrices: list[HermitianMatrix], s: "ParamPoint") -> HermitianMatrix:
    """Linear combination sum_i s_i H_i of equal-size Hermitian matrices."""
    coords = np.asarray(s.coords, dtype=float)
    if len(matrices) != coords.size:
        raise ValueError(f"{len(matrices)} matrices but parameter of length {coords.size}")
    n = matrices[0].n
    if any(m.n != n for m in matrices):
        raise ValueError("matrices must share one dimension")
    re = sum(c * m.re for c, m in zip(coords, matrices))
    has_im = any(m.im is not None for m in matrices)
    im = None
    if has_im:
        im = sum(c * (m.im if m.im is not None else 0.0) for c, m in zip(coords, matrices))
        if np.isscalar(im):
            im = np.zeros((n, n))
    return HermitianMatrix(n=n, re=re, im=im)


@dataclass(frozen=True)
class ParamPoint:
    """A parameter vector selecting one combined matrix."""

    coords: np.ndarray
    normalized: bool

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        if c.size < 1:
            raise ValueError("parameter vector must be nonempty")
        if self.normalized and abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise ValueError("normalized parameter point must have unit 2-norm")

    @property
    def k(self) -> int:
        return int(self.coords.size)


_PARAM_KINDS = ("uniform_sphere", "density_table", "plane_density", "point")


@dataclass(frozen=True)
class ParamLaw:
    """Distribution of the parameter vector.

    uniform_sphere: uniform on S^(k-1), k >= 2.
    density_table:  angle density on S^1 given by an inverse-CDF table.
    plane_density:  rotation-invariant density on R^2 with compact radial
                    support and vanishing density at the origin; the radius is
                    drawn from an inverse-CDF table.
    point:          degenerate law at a fixed parameter (test/collapse plumbing).
    """

    kind: str
    k: int
    table: tuple[np.ndarray, np.ndarray] | None = None  # (cdf grid, values)
    support: tuple[float, float] | None = None
    atom: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _PARAM_KINDS:
            raise ValueError(f"unknown parameter law {self.kind!r}")
        if self.k < 2:
            raise ValueError("parameter dimension must be >= 2")
        if self.kind in ("density_table", "plane_density") and self.table is None:
            raise ValueError(f"{self.kind} law requires an inverse-CDF table")

    @staticmethod
    def uniform_sphere(k: int = 2) -> "ParamLaw":
        return ParamLaw(kind="uniform_sphere", k=k)

    @staticmethod
    def from_angle_density(density, m: int = 4096) -> "ParamLaw":
        """S^1 law with angle density proportional to `density` on [0, 2 pi)."""
        ang = np.linspace(0.0, 2.0 * np.pi, m + 1)
        pdf = np.asarray([max(float(density(a)), 0.0) for a in ang])
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(ang))])
        if cdf[-1] <= 0.0:
            raise ValueError("angle density must have positive mass")
        cdf /= cdf[-1]
        return ParamLaw(kind="density_table", k=2, table=(cdf, ang))

    @staticmethod
    def plane_annulus(r_lo: float = 0.5, r_hi: float = 1.5, m: int = 4096) -> "ParamLaw":
        """Radially symmetric C^1 bump density on the annulus r_lo <= |s| <= r_hi."""
        if not 0.0 < r_lo < r_hi:
            raise ValueError("need 0 < r_lo < r_hi")
        r = np.linspace(r_lo, r_hi, m + 1)
        pdf = r * (r - r_lo) ** 2 * (r_hi - r) ** 2  # radius density ~ sigma * rho(sigma)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(r))])
        cdf /= cdf[-1]
        return ParamLaw(kind="plane_density", k=2, table=(cdf, r), support=(r_lo, r_hi))

    @staticmethod
    def degenerate(coords) -> "ParamLaw":
        c = np.asarray(coords, dtype=float)
        return ParamLaw(kind="point", k=c.size, atom=c)

    def radial_pdf(self, sigma: np.ndarray) -> np.ndarray:
        """Normalized density of |s| for plane laws (used by quadrature paths)."""
        if self.kind != "plane_density":
            raise ValueError("radial_pdf is defined for plane laws only")
        cdf, r = self.table
        lo, hi = self.support
        pdf = np.where((sigma >= lo) & (sigma <= hi),
                       sigma * (sigma - lo) ** 2 * (hi - sigma) ** 2, 0.0)
        mass = np.trapezoid(r * (r - lo) ** 2 * (hi - r) ** 2, r)
        return pdf / mass


def sample_param(law: ParamLaw, rng: np.random.Generator) -> ParamPoint:
    """Draw one parameter point from `law` using the supplied substream."""
    if law.kind == "uniform_sphere":
        while True:
            z = standard_normals(rng, law.k)
            norm = np.linalg.norm(z)
            if norm > 1e-12:
                return ParamPoint(coords=z / norm, normalized=True)
    if law.kind == "density_table":
        cdf, ang = law.table
        a = float(np.interp(rng.random(), cdf, ang))
        return ParamPoint(coords=np.array([math.cos(a), math.sin(a)]), normalized=True)
    if law.kind == "plane_density":
        cdf, r = law.table
        radius = float(np.interp(rng.random(), cdf, r))
        a = 2.0 * math.pi * rng.random()
        return ParamPoint(coords=radius * np.array([math.cos(a), math.sin(a)]), normalized=False)
    return ParamPoint(coords=law.atom.copy(), normalized=bool(abs(np.linalg.norm(law.atom) - 1.0) <= 1e-12))


def sample_param_stream(law: ParamLaw, seed: int, stream) -> ParamPoint:
    """sample_param with the per-sample substream contract."""
    key = stream if isinstance(stream, tuple) else (stream,)
    return sample_param(law, substream(seed, *key))
