"""Deterministic special functions and singular-kernel primitives.

Everything here is a pure function of its arguments: Bessel functions of the
first kind, the semicircle law and its Stieltjes transform, Gauss-Chebyshev
quadrature, the logarithmic covariance kernel, and the bilinear-form identity
check that ties the kernel to its difference-quotient representation.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

# Power series below this |x|, Miller downward recurrence above.  The series
# is summed in 80-bit precision so cancellation at the switch point stays
# below 1e-13.
_SERIES_CUTOFF = 12.0

_RESCALE_LIMIT = 1e250
_RESCALE_FACTOR = 1e-250


def _series_jk(k: int, x: float) -> float:
    # Ascending series sum_m (-1)^m (x/2)^(k+2m) / (m! (k+m)!), x > 0.
    half = np.longdouble(x) / 2
    term = np.longdouble(1.0)
    for i in range(1, k + 1):
        term *= half / i
        if term == 0.0:
            return 0.0
    q = half * half
    total = term
    m = 0
    while True:
        m += 1
        term *= -q / (m * (k + m))
        total += term
        if abs(term) <= 1e-25 * abs(total) + np.longdouble(1e-4940) or m > 400:
            return float(total)


def _miller_jarray(kmax: int, x: float) -> np.ndarray:
    # Downward three-term recurrence from above the turning point, normalized
    # by the even-order sum rule J_0 + 2*sum_j J_{2j} = 1.
    top = max(kmax, int(math.ceil(x)))
    start = top + int(math.ceil(16.0 * max(x, 1.0) ** (1.0 / 3.0))) + 50
    vals = np.zeros(start + 2)
    vals[start + 1] = 0.0
    vals[start] = 1e-30
    two_over_x = 2.0 / x
    jp1 = 0.0
    jc = 1e-30
    for n in range(start, 0, -1):
        jm1 = n * two_over_x * jc - jp1
        jp1 = jc
        jc = jm1
        vals[n - 1] = jc
        if abs(jc) > _RESCALE_LIMIT:
            jc *= _RESCALE_FACTOR
            jp1 *= _RESCALE_FACTOR
            vals[n - 1 :] *= _RESCALE_FACTOR
    norm = vals[0] + 2.0 * vals[2 : start + 1 : 2].sum()
    return vals[: kmax + 1] / norm


def bessel_j(k: int, x: float) -> float:
    """Bessel function J_k(x) of the first kind, integer order k >= 0."""
    if k < 0 or k != int(k):
        raise ValueError(f"order must be a nonnegative integer, got {k}")
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    ax = abs(x)
    if ax == 0.0:
        return 1.0 if k == 0 else 0.0
    if ax <= _SERIES_CUTOFF:
        v = _series_jk(int(k), ax)
    else:
        v = float(_miller_jarray(int(k), ax)[int(k)])
    if x < 0.0 and k % 2 == 1:
        v = -v
    return v


def bessel_j_array(kmax: int, x: float) -> np.ndarray:
    """All orders J_0(x), ..., J_kmax(x) in one pass, x >= 0."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    if x < 0.0 or not math.isfinite(x):
        raise ValueError(f"argument must be finite and nonnegative, got {x}")
    if x == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    return _miller_jarray(kmax, x)


def semicircle_density(x: float) -> float:
    """Semicircle density sqrt((4 - x^2)_+) / (2 pi); zero outside [-2, 2]."""
    d = 4.0 - x * x
    if d <= 0.0:
        return 0.0
    return math.sqrt(d) / (2.0 * math.pi)


def stieltjes_msc(z: complex) -> complex:
    """Stieltjes transform of the semicircle law.

    Solves m^2 + z*m + 1 = 0 picking the root with |m| <= 1 and
    sign(Im m) = sign(Im z).  Real z in (-2, 2) returns the boundary value
    (-x + i*sqrt(4 - x^2)) / 2 (limit from the upper half plane); real z with
    |z| >= 2 is rejected.
    """
    z = complex(z)
    if z.imag == 0.0:
        x = z.real
        if abs(x) >= 2.0:
            raise ValueError(f"real spectral parameter must satisfy |z| < 2, got {x}")
        return complex(-x, math.sqrt(4.0 - x * x)) / 2.0
    w = cmath.sqrt(z - 2.0) * cmath.sqrt(z + 2.0)
    # Larger root computed cancellation-free; the roots multiply to 1, so the
    # Stieltjes branch is its exact reciprocal.
    if (z.conjugate() * w).real >= 0.0:
        big = -(z + w) / 2.0
    else:
        big = -(z - w) / 2.0
    return 1.0 / big


def _msc_boundary(x: float) -> complex:
    return complex(-x, math.sqrt(4.0 - x * x)) / 2.0


def log_kernel_V(U: float, x: float, y: float) -> float:
    """Covariance log-kernel log|1 - U m(x) m(y)| - log|1 - U m(x) conj(m(y))|.

    Evaluated with boundary values of the Stieltjes transform; symmetric in
    (x, y), antisymmetric under (U, y) -> (-U, -y), and positive near the
    coincidence corner: V -> +inf as U -> 1 with x -> y (the convention under
    which the bilinear form f'(x) g'(y) V(x, y) is a covariance).  The exact
    corner |U| = 1, x = +/-y returns an infinite sentinel.
    """
    if not (-1.0 <= U <= 1.0):
        raise ValueError(f"U must lie in [-1, 1], got {U}")
    mx = _msc_boundary(x)
    my = _msc_boundary(y)
    # products formed before the U scaling keep the evaluation bitwise
    # symmetric in (x, y)
    same = 1.0 - U * (mx * my)
    mixed = 1.0 - U * (mx * my.conjugate())
    a2 = same.real * same.real + same.imag * same.imag
    b2 = mixed.real * mixed.real + mixed.imag * mixed.imag
    if b2 == 0.0:
        return math.inf
    if a2 == 0.0:
        return -math.inf
    return 0.5 * (math.log(a2) - math.log(b2))


def log_kernel_V_grid(U: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized log_kernel_V over broadcastable arrays of x, y in (-2, 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mx = (-x + 1j * np.sqrt(4.0 - x * x)) / 2.0
    my = (-y + 1j * np.sqrt(4.0 - y * y)) / 2.0
    same = 1.0 - U * (mx * my)
    mixed = 1.0 - U * (mx * np.conj(my))
    with np.errstate(divide="ignore"):
        return 0.5 * (np.log(np.abs(same) ** 2) - np.log(np.abs(mixed) ** 2))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (strictly increasing) and positive weights of a 1D rule."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str


def gauss_chebyshev(n: int) -> QuadratureRule:
    """Gauss-Chebyshev rule for the weight (1 - U^2)^(-1/2) on [-1, 1].

    Nodes cos(pi (2j - 1) / (2n)), equal weights pi / n; exact for
    polynomials up to degree 2n - 1.
    """
    if n < 1:
        raise ValueError("rule size must be >= 1")
    j = np.arange(n, 0, -1)
    nodes = np.cos(np.pi * (2 * j - 1) / (2 * n))
    weights = np.full(n, np.pi / n)
    return QuadratureRule(nodes=nodes, weights=weights, kind="gauss_chebyshev")


class QuadratureNonConvergence(RuntimeError):
    """Adaptive quadrature failed to meet its tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _graded_panels(lo: float, hi: float, depth: int) -> np.ndarray:
    # Geometric subdivision toward lo; panel edges lo + (hi-lo)/2^p.
    frac = 0.5 ** np.arange(depth + 1)
    return lo + (hi - lo) * frac[::-1]


def _integrate_log_singular(f_vec, hi: float, depth: int = 44, order: int = 16) -> float:
    # integral_0^hi f, integrable (log-type) singularity at 0.
    edges = _graded_panels(0.0, hi, depth)
    xs, ws = _gl_nodes(order)
    a = edges[:-1]
    b = edges[1:]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    nodes = mid + half * xs[None, :]
    vals = f_vec(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(vals * ws[None, :] * half))


def _poly_diff_quotient(coeffs: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # (f(X) - f(Y)) / (X - Y) through the homogeneous sums
    # h_j = sum_{i<j} X^i Y^(j-1-i); exact for polynomials, stable on X = Y.
    D = np.zeros(np.broadcast(X, Y).shape)
    h = np.zeros_like(D)
    ypow = np.ones_like(D)
    for j in range(1, len(coeffs)):
        h = X * h + ypow
        ypow = ypow * Y
        D += coeffs[j] * h
    return D


def _poly_deriv(coeffs: np.ndarray) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    if len(c) <= 1:
        return np.zeros(1)
    return c[1:] * np.arange(1, len(c))


def _kernel_lhs(fp: np.ndarray, gp: np.ndarray, depth: int) -> float:
    # (1 / 2 pi^2) iint f'(x) g'(y) V(1, x, y) dx dy in rotated angle
    # coordinates alpha = (tx + ty)/2, delta = (tx - ty)/2 where x = 2 cos tx.
    # V(1, x, y) = log sin(alpha) - log sin(delta) splits the singularity off.
    def inner(alpha: float) -> float:
        m = min(alpha, math.pi - alpha)
        if m <= 0.0:
            return 0.0
        la = math.log(math.sin(alpha))

        def f_vec(delta: np.ndarray) -> np.ndarray:
            tx = alpha + delta
            ty = alpha - delta
            x = 2.0 * np.cos(tx)
            y = 2.0 * np.cos(ty)
            fx = np.polynomial.polynomial.polyval(x, fp)
            gy = np.polynomial.polynomial.polyval(y, gp)
            fy = np.polynomial.polynomial.polyval(y, fp)
            gx = np.polynomial.polynomial.polyval(x, gp)
            P = 0.5 * (fx * gy + fy * gx) * 4.0 * np.sin(tx) * np.sin(ty)
            return P * (la - np.log(np.sin(delta)))

        return _integrate_log_singular(f_vec, m, depth=depth)

    # accuracy is certified by the caller's refinement comparison; QUADPACK's
    # roundoff heuristic fires spuriously on large high-degree integrands
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(inner, 0.0, math.pi, points=[math.pi / 2], limit=200,
                      epsabs=1e-10, epsrel=1e-10)
    return 2.0 * val / (math.pi ** 2)


def _kernel_rhs(f: np.ndarray, g: np.ndarray, n: int) -> float:
    # (1 / 4 pi^2) iint (f(x)-f(y))/(x-y) (g(x)-g(y))/(x-y)
    #   * (4 - x y) / (sqrt(4-x^2) sqrt(4-y^2)) dx dy
    # on a midpoint theta grid where the weight is smooth (trig polynomial).
    theta = (np.arange(n) + 0.5) * math.pi / n
    x = 2.0 * np.cos(theta)
    X = x[:, None]
    Y = x[None, :]
    qf = _poly_diff_quotient(np.asarray(f, dtype=float), X, Y)
    qg = _poly_diff_quotient(np.asarray(g, dtype=float), X, Y)
    w = 4.0 - X * Y
    h = math.pi / n
    return float(np.sum(qf * qg * w)) * h * h / (4.0 * math.pi ** 2)


def kernel_identity_residual(f_coeffs, g_coeffs, quad_points: int = 256) -> float:
    """|LHS - RHS| of the log-kernel / difference-quotient bilinear identity.

    LHS is the kernel form (1/2 pi^2) iint f' g' V(1, x, y); RHS is the
    difference-quotient form against the weight (4 - xy)/sqrt((4-x^2)(4-y^2)).
    Polynomials up to degree 12; both sides are refined once and a
    disagreement above 1e-4 between refinements raises
    QuadratureNonConvergence.
    """
    f = np.asarray(f_coeffs, dtype=float)
    g = np.asarray(g_coeffs, dtype=float)
    if len(f) > 13 or len(g) > 13:
        raise ValueError("polynomial degree must be <= 12")
    if quad_points < 200:
        raise ValueError("quad_points must be >= 200")
    fp = _poly_deriv(f)
    gp = _poly_deriv(g)
    if not fp.any() or not gp.any():
        return 0.0
    lhs = _kernel_lhs(fp, gp, depth=44)
    lhs_ref = _kernel_lhs(fp, gp, depth=52)
    rhs = _kernel_rhs(f, g, quad_points)
    rhs_ref = _kernel_rhs(f, g, 2 * quad_points)
    drift = abs(lhs - lhs_ref) + abs(rhs - rhs_ref)
    if drift > 1e-4:
        raise QuadratureNonConvergence("kernel identity quadrature did not settle", drift)
    return abs(lhs_ref - rhs_ref)
