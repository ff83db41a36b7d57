"""Deterministic evaluation of every SFF prediction formula.

Covariance functions v_{+/-}(t, U) are evaluated three ways: closed Bessel
forms at U = 1, a power series (2/beta) sum_k k U^k J_k(2t)^2 for general U,
and an adaptive 2D quadrature of the oscillatory log-kernel integral that
serves as the independent oracle for the series.  Parameter averages over
rotation-invariant laws reduce to moments of U = <s, r>, which are known in
closed form; second moments use an FFT self-convolution so the reduction is
exact at every truncation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .ensembles import ParamLaw, ParamPoint
from .rng import substream
from .specfun import (
    QuadratureNonConvergence,
    bessel_j_array,
    gauss_chebyshev,
    log_kernel_V_grid,
)
from .spectral import validate_grid

_SIGNS = ("+", "-")


def kmax_for(t: float) -> int:
    """Series truncation index: super-exponential Bessel decay beyond 2t."""
    return int(math.ceil(2.0 * t + 12.0 * (2.0 * t) ** (1.0 / 3.0) + 25.0))


@lru_cache(maxsize=256)
def _series_weights(t: float) -> tuple[np.ndarray, np.ndarray]:
    # orders 1..K and J_k(2t)^2
    K = kmax_for(t)
    j = bessel_j_array(K, 2.0 * t)
    k = np.arange(1, K + 1, dtype=float)
    return k, j[1:] ** 2


@lru_cache(maxsize=64)
def _j012(t: float) -> tuple[float, float, float]:
    j = bessel_j_array(2, 2.0 * t)
    return float(j[0]), float(j[1]), float(j[2])


def _check_sign(sign: str) -> None:
    if sign not in _SIGNS:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def e_slope(t: float) -> float:
    """Slope function J_1(2t)/t, continuously extended to 1 at t = 0."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t < 1e-4:
        return 1.0 - t * t / 2.0 + t ** 4 / 12.0
    _, j1, _ = _j012(t)
    return j1 / t


@dataclass(frozen=True)
class KernelParams:
    """Reduced pair statistics feeding the covariance formulas."""

    u: float       # <s, r>
    w: float       # <s o s, r o r>
    q4_s: float    # ||s||_4^4
    q4_r: float

    @staticmethod
    def from_points(s: ParamPoint, r: ParamPoint) -> "KernelParams":
        a, b = s.coords, r.coords
        return KernelParams(
            u=float(a @ b),
            w=float((a * a) @ (b * b)),
            q4_s=float((a ** 4).sum()),
            q4_r=float((b ** 4).sum()),
        )


_VARIANTS = ("normalized_k2", "normalized_k", "unnormalized_plane")


@dataclass(frozen=True)
class ModelConfig:
    """Ensemble-level inputs to the prediction formulas."""

    n: int
    beta: int = 2
    kappa4: float = 0.0
    variant: str = "normalized_k2"
    param_law: ParamLaw | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        if self.beta not in (1, 2):
            raise ValueError("beta must be 1 or 2")
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        law = self.param_law
        if law is not None:
            if self.variant == "unnormalized_plane" and law.kind != "plane_density":
                raise ValueError("unnormalized_plane requires a plane_density law")
            if self.variant == "normalized_k2" and law.kind == "plane_density":
                raise ValueError("normalized_k2 requires a law on the sphere")
            if self.variant == "normalized_k" and law.kind != "uniform_sphere":
                raise ValueError("normalized_k requires a uniform sphere law")


@dataclass
class PredictionCurve:
    """(t-grid, named value columns); theory and empirical outputs share it."""

    grid: np.ndarray
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        self.grid = validate_grid(self.grid)
        for name, col in self.columns.items():
            if len(col) != len(self.grid):
                raise ValueError(f"column {name!r} length mismatch")


def mean_finite_n(t: float, cfg: ModelConfig, q4: float) -> float:
    """Finite-N mean of <e^{itH^s}>: slope plus 1/N cumulant and beta=1 terms.

    The kappa4 correction (1 - 6/t^2) J_0(2t) + (6/t^3 - 4/t) J_1(2t) is
    summed as J_4(2t), its algebraically identical stable form.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    j = bessel_j_array(4, 2.0 * t)
    corr = cfg.kappa4 * q4 * j[4]
    if cfg.beta == 1:
        corr -= (j[0] - math.cos(2.0 * t)) / 2.0
    return e_slope(t) + corr / cfg.n


def v_pm_series(t: float, U: float, sign: str, beta: int = 2) -> float:
    """Series form of v_{+/-}(t, U): (2/beta) sum_k k u^k J_k(2t)^2.

    u = U for the '-' pairing (all-positive terms) and u = -U for '+', so
    v_+(U) = v_-(-U) holds exactly, term by term.
    """
    _check_sign(sign)
    if not -1.0 <= U <= 1.0:
        raise ValueError("U must lie in [-1, 1]")
    u = U if sign == "-" else -U
    k, jsq = _series_weights(t)
    with np.errstate(divide="ignore"):
        powers = np.power(u, k) if u >= 0 else np.power(u, k.astype(int))
    return float((2.0 / beta) * np.sum(k * jsq * powers))


def _v_minus_on_nodes(t: float, u_nodes: np.ndarray, beta: int) -> np.ndarray:
    """Vectorized v_-(t, u) over an array of u values in [-1, 1]."""
    k, jsq = _series_weights(t)
    c = k * jsq
    u = np.asarray(u_nodes, dtype=float)
    out = np.empty(u.size)
    chunk = max(1, int(4e6 // max(k.size, 1)))
    au = np.abs(u)
    sgn_neg = np.where(np.arange(1, k.size + 1) % 2 == 1, -1.0, 1.0)
    for lo in range(0, u.size, chunk):
        hi = min(lo + chunk, u.size)
        with np.errstate(divide="ignore"):
            la = np.log(au[lo:hi])
        powers = np.exp(la[:, None] * k[None, :])
        powers[au[lo:hi] == 0.0] = 0.0
        neg = u[lo:hi] < 0
        if neg.any():
            powers[neg] *= sgn_neg[None, :]
        out[lo:hi] = powers @ c
    return (2.0 / beta) * out


def v_ss_closed(t: float, sign: str, beta: int = 2) -> float:
    """Closed forms at U = 1, scaled by 2/beta:

    v_-(t) = t^2 [J_0(2t)^2 + 2 J_1(2t)^2 - J_0(2t) J_2(2t)]
    v_+(t) = -t J_0(2t) J_1(2t)
    """
    _check_sign(sign)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    j0, j1, j2 = _j012(t)
    if sign == "-":
        val = t * t * (j0 * j0 + 2.0 * j1 * j1 - j0 * j2)
    else:
        val = -t * j0 * j1
    return (2.0 / beta) * val


# ---------------------------------------------------------------------------
# Oscillatory 2D quadrature oracle


# Corner-avoiding floor: keeps x = a + b and y = a - b distinct as floats, so
# the kernel's exact singular point is never sampled; the dropped sliver
# contributes O(1e-12), far below the quadrature tolerance.
_CORNER_FLOOR = 4e-14


def _graded_edges_both(hi: float, depth: int) -> np.ndarray:
    f = 0.5 ** np.arange(1, depth + 1)
    left = hi * f[::-1]
    right = hi - hi * f[1:]
    edges = np.concatenate([left, right, [hi]])
    edges = edges[edges > _CORNER_FLOOR]
    return np.concatenate([[_CORNER_FLOOR], edges])


def _panel_integrate(f_vec, edges: np.ndarray, order: int) -> float:
    xs, ws = np.polynomial.legendre.leggauss(order)
    a = edges[:-1]
    b = edges[1:]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    nodes = mid + half * xs[None, :]
    vals = f_vec(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(vals * ws[None, :] * half))


def _v_quad_once(t: float, U: float, sign: str, beta: int,
                 order: int, depth: int, limit: int) -> float:
    # Rotated coordinates a = (x + y)/2, b = (x - y)/2; the kernel is even in
    # both, so integration runs over the quarter domain.  The oscillation
    # cos(2tb) ('-' pairing) or cos(2ta) ('+') rides on the outer variable and
    # is handled by weighted Clenshaw-Curtis/QAWO; the inner variable crosses
    # the kernel's near-singular line and is integrated on panels graded
    # toward both endpoints (open nodes, so the corner is never sampled).
    if sign == "-":
        def outer(b: float) -> float:
            b = max(b, _CORNER_FLOOR)
            hi = 2.0 - b
            if hi <= 0.0:
                return 0.0
            return _panel_integrate(
                lambda a: log_kernel_V_grid(U, a + b, a - b),
                _graded_edges_both(hi, depth), order)
        scale = 8.0 * t * t / (beta * math.pi ** 2)
    else:
        def outer(a: float) -> float:
            a = max(a, _CORNER_FLOOR)
            hi = 2.0 - a
            if hi <= 0.0:
                return 0.0
            return _panel_integrate(
                lambda b: log_kernel_V_grid(U, a + b, a - b),
                _graded_edges_both(hi, depth), order)
        scale = -8.0 * t * t / (beta * math.pi ** 2)
    val, _ = quad(outer, 0.0, 2.0, weight="cos", wvar=2.0 * t,
                  limit=limit, epsabs=1e-11, epsrel=1e-10)
    return scale * val


def v_pm_quadrature(t: float, U: float, sign: str, beta: int = 2,
                    rel_tol: float = 1e-6) -> float:
    """Adaptive quadrature of v_{+/-}(t, U) from the log-kernel integral.

    Independent oracle for v_pm_series (the kernel is evaluated pointwise by
    complex arithmetic, never through the series).  Raises
    QuadratureNonConvergence when two refinement levels disagree beyond
    rel_tol.  Oscillation budget: t <= 50.
    """
    _check_sign(sign)
    if t <= 0.0 or t > 50.0:
        raise ValueError("quadrature oracle covers 0 < t <= 50")
    if not (abs(U) <= 1.0 - 1e-9 or abs(U) == 1.0):
        raise ValueError("need |U| <= 1 - 1e-9, or exactly +/-1 (corner-avoiding nodes)")
    coarse = _v_quad_once(t, U, sign, beta, order=12, depth=40, limit=200)
    fine = _v_quad_once(t, U, sign, beta, order=16, depth=48, limit=400)
    achieved = abs(fine - coarse)
    if achieved > rel_tol * max(abs(fine), 1e-3):
        raise QuadratureNonConvergence(
            f"v_{sign} quadrature at t={t}, U={U} did not converge", achieved)
    return fine


def v_pm_kappa(t: float, kp: KernelParams, cfg: ModelConfig, sign: str) -> float:
    """v_{+/-,kappa} = series value plus kappa4 <s o s, r o r> J_2(2t)^2."""
    _, _, j2 = _j012(t)
    return v_pm_series(t, kp.u, sign, cfg.beta) + cfg.kappa4 * kp.w * j2 * j2


# ---------------------------------------------------------------------------
# Wigner curves


def _wig_parts(t: float, cfg: ModelConfig) -> tuple[float, float, float]:
    # (e, v_{-,kappa}^{ee}, v_{+,kappa}^{ee}) with e = (1, 0): U = w = 1.
    _, _, j2 = _j012(t)
    kc = cfg.kappa4 * j2 * j2
    return e_slope(t), v_ss_closed(t, "-", cfg.beta) + kc, v_ss_closed(t, "+", cfg.beta) + kc


def e_wig(t: float, cfg: ModelConfig) -> float:
    e, vm, _ = _wig_parts(t, cfg)
    return e * e + vm / cfg.n ** 2


def s_wig(t: float, cfg: ModelConfig) -> float:
    e, vm, vp = _wig_parts(t, cfg)
    n2 = float(cfg.n) ** 2
    return math.sqrt((vp * vp + vm * vm) / n2 ** 2 + 2.0 * e * e * (vp + vm) / n2)


def curve_E_wig(grid: np.ndarray, cfg: ModelConfig) -> PredictionCurve:
    grid = validate_grid(grid)
    return PredictionCurve(grid, {"e_wig": np.array([e_wig(t, cfg) for t in grid])})


def curve_S_wig(grid: np.ndarray, cfg: ModelConfig) -> PredictionCurve:
    grid = validate_grid(grid)
    return PredictionCurve(grid, {"s_wig": np.array([s_wig(t, cfg) for t in grid])})


# ---------------------------------------------------------------------------
# Parameter-averaged (residual) curves


@lru_cache(maxsize=32)
def _u_moments(mmax: int, k: int) -> np.ndarray:
    # mu_m = E[U^m] for U = <s, r>, s, r uniform on S^(k-1):
    # mu_0 = 1, odd moments 0, mu_{m+2} = mu_m (m + 1) / (m + k).
    mu = np.zeros(mmax + 1)
    mu[0] = 1.0
    for m in range(0, mmax - 1, 2):
        mu[m + 2] = mu[m] * (m + 1) / (m + k)
    return mu


def _self_convolve(c: np.ndarray) -> np.ndarray:
    L = 2 * c.size - 1
    nfft = 1 << (L - 1).bit_length()
    F = np.fft.rfft(c, nfft)
    return np.fft.irfft(F * F, nfft)[:L]


def _sphere_v_moments(t: float, beta: int, k_dim: int) -> tuple[float, float]:
    """(E[v_-], E[v_-^2]) over independent uniform points on S^(k_dim - 1).

    Exact reduction: only even moments of U survive, so the same values hold
    for v_+; the first moment is a weighted moment sum and the second uses an
    FFT self-convolution of c_k = k J_k(2t)^2.
    """
    k, jsq = _series_weights(t)
    c = np.concatenate([[0.0], k * jsq])  # index = order
    mu = _u_moments(2 * (c.size - 1), k_dim)
    ev = (2.0 / beta) * float(c @ mu[: c.size])
    conv = _self_convolve(c)
    ev2 = (2.0 / beta) ** 2 * float(conv @ mu[: conv.size])
    return ev, ev2


def _table_u_density(law: ParamLaw, m: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    # Angle-difference density of an S^1 table law via circular autocorrelation.
    cdf, ang = law.table
    grid = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    cvals = np.interp(grid, ang, cdf)
    rho = np.gradient(cvals, grid, edge_order=1)
    rho = np.clip(rho, 0.0, None)
    rho /= rho.sum() * (2.0 * np.pi / m)
    F = np.fft.rfft(rho)
    auto = np.fft.irfft(F * np.conj(F), m).real * (2.0 * np.pi / m) ** 2
    pdf = auto / (2.0 * np.pi / m)  # density of the angle difference on grid
    return grid, pdf


def _table_v_moment(t: float, beta: int, law: ParamLaw, order: int) -> float:
    grid, pdf = _table_u_density(law)
    u = np.cos(grid)
    vals = _v_minus_on_nodes(t, u, beta) ** order
    return float(np.sum(vals * pdf) * (2.0 * np.pi / grid.size))


class MonteCarloNonConvergence(RuntimeError):
    """Pairwise Monte Carlo reduction missed its standard-error target."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative SE {achieved:.3e})")
        self.achieved = achieved


def _sample_pair_stats(law: ParamLaw, seed: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    from .ensembles import sample_param

    rng = substream(seed, "sres_pairs")
    u = np.empty(n_pairs)
    w = np.empty(n_pairs)
    for i in range(n_pairs):
        s = sample_param(law, rng)
        r = sample_param(law, rng)
        u[i] = s.coords @ r.coords
        w[i] = (s.coords ** 2) @ (r.coords ** 2)
    return u, w


def curve_S_res(grid: np.ndarray, cfg: ModelConfig, n_pairs: int = 100_000,
                rel_se: float = 0.01, seed: int = 0) -> PredictionCurve:
    """Residual standard deviation S_res(t) for normalized parameter laws.

    Uniform-sphere laws with kappa4 = 0 use the exact U-moment reduction (the
    analytic completion of Gauss-Chebyshev quadrature in U); anything needing
    the joint (U, w) statistics falls back to Monte Carlo over parameter
    pairs with a reported standard-error target.
    """
    grid = validate_grid(grid)
    law = cfg.param_law
    if law is None:
        raise ValueError("curve_S_res requires cfg.param_law")
    n2 = float(cfg.n) ** 2
    if law.kind == "point":
        a = law.atom
        kp = KernelParams(u=1.0, w=float((a ** 4).sum()),
                          q4_s=float((a ** 4).sum()), q4_r=float((a ** 4).sum()))
        vals = []
        for t in grid:
            e = e_slope(t)
            vm = v_pm_kappa(t, kp, cfg, "-")
            vp = v_pm_kappa(t, kp, cfg, "+")
            vals.append(math.sqrt((vp ** 2 + vm ** 2) / n2 ** 2 + 2 * e * e * (vp + vm) / n2))
        return PredictionCurve(grid, {"s_res": np.array(vals)})
    if law.kind == "uniform_sphere" and cfg.kappa4 == 0.0:
        vals = []
        for t in grid:
            ev, ev2 = _sphere_v_moments(t, cfg.beta, law.k)
            e = e_slope(t)
            vals.append(math.sqrt(2.0 * ev2 / n2 ** 2 + 4.0 * e * e * ev / n2))
        return PredictionCurve(grid, {"s_res": np.array(vals)})
    if law.kind == "density_table" and cfg.kappa4 == 0.0:
        vals = []
        for t in grid:
            ev = _table_v_moment(t, cfg.beta, law, 1)
            ev2 = _table_v_moment(t, cfg.beta, law, 2)
            e = e_slope(t)
            vals.append(math.sqrt(2.0 * ev2 / n2 ** 2 + 4.0 * e * e * ev / n2))
        return PredictionCurve(grid, {"s_res": np.array(vals)})
    # General path: Monte Carlo over (s, r) pairs, joint (U, w) statistics.
    u, w = _sample_pair_stats(law, seed, n_pairs)
    vals = np.empty(grid.size)
    ses = np.empty(grid.size)
    worst = 0.0
    for i, t in enumerate(grid):
        _, _, j2 = _j012(t)
        vm = _v_minus_on_nodes(t, u, cfg.beta) + cfg.kappa4 * w * j2 * j2
        vp = _v_minus_on_nodes(t, -u, cfg.beta) + cfg.kappa4 * w * j2 * j2
        e = e_slope(t)
        g = (vp ** 2 + vm ** 2) / n2 ** 2 + 2.0 * e * e * (vp + vm) / n2
        m = float(g.mean())
        se = float(g.std(ddof=1) / math.sqrt(n_pairs))
        vals[i] = math.sqrt(max(m, 0.0))
        ses[i] = se / (2.0 * vals[i]) if vals[i] > 0 else 0.0
        worst = max(worst, se / m if m > 0 else 0.0)
    if worst > 2.0 * rel_se:
        raise MonteCarloNonConvergence("S_res pair sampling under-resolved", worst)
    return PredictionCurve(grid, {"s_res": vals, "s_res_se": ses})


def _pair_u_moments(t: float, sa: float, sb: float, beta: int,
                    mu: np.ndarray) -> tuple[float, float]:
    # (E_U[v~_-], E_U[v~_-^2]) at fixed radii; the ||s|| ||r|| prefactor of the
    # rescaled kernel cancels against the Chebyshev coefficients of the
    # rescaled test functions, leaving (2/beta) sum_n n U^n J_n(2t sa) J_n(2t sb).
    K = kmax_for(t * max(sa, sb))
    A = bessel_j_array(K, 2.0 * t * sa)
    B = bessel_j_array(K, 2.0 * t * sb)
    c = np.arange(K + 1, dtype=float) * A * B
    pref = 2.0 / beta
    ev = pref * float(c @ mu[: c.size])
    conv = _self_convolve(c)
    ev2 = pref * pref * float(conv @ mu[: conv.size])
    return ev, ev2


def _strip_d_edges(t: float, width: float) -> np.ndarray:
    # Radius-difference panels: fine core over the coherence strip |d| ~ 1/t,
    # then geometric growth out to the support width.
    core = (math.pi / (4.0 * t)) * np.arange(9, dtype=float)
    edges = list(core)
    while edges[-1] < width:
        edges.append(edges[-1] * 1.6)
    edges = np.asarray(edges)
    edges = edges[edges < width]
    return np.concatenate([edges, [width]])


def curve_S_res_unnormalized(grid: np.ndarray, cfg: ModelConfig,
                             n_center: int = 16, gl_order: int = 8) -> PredictionCurve:
    """Residual curve for the un-normalized plane model (kappa4 = 0).

    For rotation-invariant laws the angle variable factorizes from the radii
    and is integrated exactly through its moments; the radius pair is
    integrated by a quadrature graded around the coherence strip
    |sigma_s - sigma_r| ~ 1/t that carries the dominant mass (plain pair
    sampling cannot resolve that strip at large t; see
    curve_S_res_unnormalized_mc for the sampling estimator at small t).
    Also returns E_s S_wig(||s|| t) for the ratio-decay diagnostics.
    """
    grid = validate_grid(grid)
    law = cfg.param_law
    if law is None or law.kind != "plane_density":
        raise ValueError("curve_S_res_unnormalized requires a plane_density law")
    if cfg.kappa4 != 0.0:
        raise ValueError("plane-model reduction is defined for kappa4 = 0")
    lo, hi = law.support
    xs, ws = np.polynomial.legendre.leggauss(n_center)
    s_nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xs
    s_weights = 0.5 * (hi - lo) * ws
    xd, wd = np.polynomial.legendre.leggauss(gl_order)
    n2 = float(cfg.n) ** 2
    s_res = np.empty(grid.size)
    es_swig = np.empty(grid.size)
    for it, t in enumerate(grid):
        mu = _u_moments(2 * kmax_for(t * hi) + 2, 2)
        total = 0.0
        for s, w_s in zip(s_nodes, s_weights):
            half_width = min(s - lo, hi - s)
            if half_width <= 0.0:
                continue
            acc = 0.0
            edges = _strip_d_edges(t, 2.0 * half_width)
            for a, b in zip(edges[:-1], edges[1:]):
                dm = 0.5 * (a + b) + 0.5 * (b - a) * xd
                dw = 0.5 * (b - a) * wd
                for d, w_d in zip(dm, dw):
                    sa, sb = s + 0.5 * d, s - 0.5 * d
                    ev, ev2 = _pair_u_moments(t, sa, sb, cfg.beta, mu)
                    ee = e_slope(t * sa) * e_slope(t * sb)
                    dens = float(law.radial_pdf(np.array([sa]))[0]) * \
                        float(law.radial_pdf(np.array([sb]))[0])
                    acc += w_d * dens * (2.0 * ev2 / n2 ** 2 + 4.0 * ee * ev / n2)
            total += w_s * 2.0 * acc  # integrand even in d
        s_res[it] = math.sqrt(max(total, 0.0))
        dens_s = law.radial_pdf(s_nodes)
        swig_vals = np.empty(n_center)
        for q, sig in enumerate(s_nodes):
            j = bessel_j_array(2, 2.0 * t * sig)
            swig_vals[q] = _s_wig_from_j(t * sig, j[0], j[1], j[2], cfg)
        es_swig[it] = float(np.sum(s_weights * dens_s * swig_vals))
    return PredictionCurve(grid, {"s_res_unnorm": s_res, "es_s_wig": es_swig})


def curve_S_res_unnormalized_mc(grid: np.ndarray, cfg: ModelConfig,
                                n_pairs: int = 4000, seed: int = 0) -> PredictionCurve:
    """Plain pair-sampling estimator of the un-normalized residual curve.

    Usable at small t only (the strip of dominant mass has probability ~ 1/t
    per pair); reported with its standard error.
    """
    grid = validate_grid(grid)
    law = cfg.param_law
    if law is None or law.kind != "plane_density":
        raise ValueError("needs a plane_density law")
    from .ensembles import sample_param

    rng = substream(seed, "sres_unnorm_mc")
    pairs = [(sample_param(law, rng), sample_param(law, rng)) for _ in range(n_pairs)]
    n2 = float(cfg.n) ** 2
    vals = np.empty(grid.size)
    ses = np.empty(grid.size)
    for it, t in enumerate(grid):
        g = np.empty(n_pairs)
        for p, (sp, rp) in enumerate(pairs):
            sa = float(np.linalg.norm(sp.coords))
            sb = float(np.linalg.norm(rp.coords))
            u = float(sp.coords @ rp.coords) / (sa * sb)
            u = min(1.0, max(-1.0, u))
            K = kmax_for(t * max(sa, sb))
            A = bessel_j_array(K, 2.0 * t * sa)
            B = bessel_j_array(K, 2.0 * t * sb)
            n = np.arange(K + 1, dtype=float)
            with np.errstate(divide="ignore"):
                powers = np.power(u, n.astype(int)) if u < 0 else np.power(u, n)
            vm = (2.0 / cfg.beta) * float(np.sum(n * powers * A * B))
            vp = (2.0 / cfg.beta) * float(np.sum(n * powers * A * B * np.where(n.astype(int) % 2 == 1, -1.0, 1.0)))
            ee = e_slope(t * sa) * e_slope(t * sb)
            g[p] = (vp * vp + vm * vm) / n2 ** 2 + 2.0 * ee * (vp + vm) / n2
        m = max(float(g.mean()), 0.0)
        vals[it] = math.sqrt(m)
        ses[it] = float(g.std(ddof=1) / math.sqrt(n_pairs))
    return PredictionCurve(grid, {"s_res_unnorm": vals, "s_res_unnorm_var_se": ses})


def _s_wig_from_j(t: float, j0: float, j1: float, j2: float, cfg: ModelConfig) -> float:
    if t == 0.0:
        return 0.0
    e = j1 / t
    vm = (2.0 / cfg.beta) * t * t * (j0 * j0 + 2.0 * j1 * j1 - j0 * j2)
    vp = (2.0 / cfg.beta) * (-t * j0 * j1)
    n2 = float(cfg.n) ** 2
    return math.sqrt((vp * vp + vm * vm) / n2 ** 2 + 2.0 * e * e * (vp + vm) / n2)


# ---------------------------------------------------------------------------
# Unfolded references, residual moments, exponent fits


def k_unfolded(tau: float, n: int, cls: str) -> float:
    """Unfolded SFF reference curves at tau = t / T_H.

    GUE: min(tau, 1)/N.  GOE: (2 tau - tau log(1 + 2 tau))/N for tau <= 1 and
    (2 - tau log((2 tau + 1)/(2 tau - 1)))/N beyond; continuous at tau = 1.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if cls == "GUE":
        return min(tau, 1.0) / n
    if cls == "GOE":
        if tau <= 1.0:
            return (2.0 * tau - tau * math.log(1.0 + 2.0 * tau)) / n
        return (2.0 - tau * math.log((2.0 * tau + 1.0) / (2.0 * tau - 1.0))) / n
    raise ValueError(f"class must be GUE or GOE, got {cls!r}")


def residual_moment(t: float, order: int, law: ParamLaw, beta: int = 2) -> float:
    """E_s E_r [v_-(t, <s, r>)^order] for order 1 or 2."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if law.kind == "uniform_sphere":
        ev, ev2 = _sphere_v_moments(t, beta, law.k)
        return ev if order == 1 else ev2
    if law.kind == "density_table":
        return _table_v_moment(t, beta, law, order)
    raise ValueError("residual_moment handles uniform or tabulated sphere laws")


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r2: float


def _geometric_smooth(y: np.ndarray, width: int = 5) -> np.ndarray:
    # Windowed geometric mean: moving average of log y.  Windows shrink
    # symmetrically at the edges so exact power laws on log-spaced grids pass
    # through unchanged.
    logs = np.log(y)
    half = width // 2
    out = np.empty_like(logs)
    for i in range(logs.size):
        h = min(half, i, logs.size - 1 - i)
        out[i] = logs[i - h : i + h + 1].mean()
    return np.exp(out)


def fit_power_law(t: np.ndarray, y: np.ndarray, window: tuple[float, float] | None = None,
                  smooth: bool = True) -> PowerLawFit:
    """Least-squares exponent of y ~ C t^alpha on log-log axes.

    Oscillatory (Bessel-modulated) columns are pre-smoothed by a width-5
    windowed geometric mean before the fit.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, y = t[mask], y[mask]
    if t.size < 10:
        raise ValueError("power-law fit needs at least 10 points in the window")
    if np.any(y <= 0.0):
        raise ValueError("power-law fit needs positive values")
    if smooth:
        y = _geometric_smooth(y)
    lx = np.log(t)
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    total = ly - ly.mean()
    denom = float(total @ total)
    r2 = 1.0 - float(resid @ resid) / denom if denom > 0 else 1.0
    return PowerLawFit(exponent=float(slope), intercept=float(intercept), r2=r2)


# ---------------------------------------------------------------------------
# Prediction bundle for the CLI


def build_prediction(grid: np.ndarray, cfg: ModelConfig) -> PredictionCurve:
    """Columns t -> e, E_wig, S_wig, S_res, K_GUE, K_GOE for one config."""
    grid = validate_grid(grid)
    cols: dict[str, np.ndarray] = {}
    cols["e"] = np.array([e_slope(t) for t in grid])
    cols["e_wig"] = curve_E_wig(grid, cfg).columns["e_wig"]
    cols["s_wig"] = curve_S_wig(grid, cfg).columns["s_wig"]
    if cfg.param_law is not None:
        if cfg.variant == "unnormalized_plane":
            cols["s_res"] = curve_S_res_unnormalized(grid, cfg).columns["s_res_unnorm"]
        else:
            cols["s_res"] = curve_S_res(grid, cfg).columns["s_res"]
    heisenberg = math.pi * cfg.n / 2.0
    cols["k_gue"] = np.array([k_unfolded(t / heisenberg, cfg.n, "GUE") for t in grid])
    cols["k_goe"] = np.array([k_unfolded(t / heisenberg, cfg.n, "GOE") for t in grid])
    return PredictionCurve(grid, cols)
