"""Deterministic oracle and invariant suite behind the `verify` command.

Each check reports its achieved figure against the required tolerance; the
report carries no timestamps or environment data, so repeated runs produce
identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import ParamLaw
from .specfun import bessel_j, kernel_identity_residual, stieltjes_msc
from .spectral import make_grid
from .theory import (
    ModelConfig,
    curve_S_res,
    curve_S_res_unnormalized,
    curve_S_wig,
    e_slope,
    fit_power_law,
    k_unfolded,
    residual_moment,
    v_pm_quadrature,
    v_pm_series,
    v_ss_closed,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    achieved: float
    required: float
    ok: bool
    detail: str = ""


def _check(name: str, achieved: float, required: float, detail: str = "") -> CheckResult:
    return CheckResult(name, achieved, required, bool(achieved <= required), detail)


def _check_range(name: str, value: float, lo: float, hi: float) -> CheckResult:
    mid = 0.5 * (lo + hi)
    return CheckResult(name, value, hi, bool(lo <= value <= hi),
                       f"allowed [{lo:g}, {hi:g}] around {mid:g}")


def check_triple_agreement() -> list[CheckResult]:
    out = []
    worst_series = 0.0
    worst_quad = 0.0
    for t in (0.5, 1.0, 3.0, 10.0, 25.0):
        for sign in ("+", "-"):
            closed = v_ss_closed(t, sign, 2)
            series = v_pm_series(t, 1.0, sign, 2)
            quadr = v_pm_quadrature(t, 1.0, sign, 2)
            scale = max(abs(closed), 1e-12)
            worst_series = max(worst_series, abs(series - closed) / scale)
            worst_quad = max(worst_quad, abs(quadr - closed) / scale)
    out.append(_check("triple_agreement_series_vs_closed", worst_series, 1e-9))
    out.append(_check("triple_agreement_quadrature_vs_closed", worst_quad, 1e-5))
    anchor = abs(v_ss_closed(1.0, "-", 2) - 0.6363538031745785)
    out.append(_check("anchor_v_minus_t1", anchor, 1e-12))
    return out


def check_large_t_expansion() -> list[CheckResult]:
    out = []
    for t in (10.0, 25.0, 50.0):
        closed = v_ss_closed(t, "-", 2)
        asym = 2.0 * t / math.pi - (1.0 + 2.0 * math.sin(4.0 * t)) / (16.0 * math.pi * t)
        out.append(_check(f"large_t_expansion_t{t:g}", abs(closed - asym), 2.0 / t ** 2))
    return out


def check_kernel_identity(max_degree: int = 4) -> list[CheckResult]:
    worst = 0.0
    for i in range(max_degree + 1):
        for j in range(max_degree + 1):
            f = [0.0] * i + [1.0]
            g = [0.0] * j + [1.0]
            worst = max(worst, kernel_identity_residual(f, g))
    return [_check(f"kernel_identity_monomials_deg{max_degree}", worst, 1e-6)]


_GATE_PAIRS = [(0.5, 0.9), (1.0, -0.5), (2.0, -0.7), (3.0, 0.5), (5.0, 0.99),
               (5.0, -0.99), (8.0, 0.2), (10.0, 0.75), (1.5, -1.0), (4.0, 1.0),
               (20.0, 0.6), (25.0, -0.3)]


def check_series_gate() -> list[CheckResult]:
    # Mandatory oracle gate: the U-power series is derived, not displayed, so
    # it must match the kernel quadrature before any curve uses it.
    worst = 0.0
    for i, (t, u) in enumerate(_GATE_PAIRS):
        sign = "+" if i % 2 else "-"
        beta = 1 if i % 3 == 0 else 2
        s = v_pm_series(t, u, sign, beta)
        q = v_pm_quadrature(t, u, sign, beta)
        worst = max(worst, abs(q - s) / max(abs(s), 1e-6))
    return [_check("series_vs_quadrature_gate_12pt", worst, 1e-5)]


def check_exponents(points: int = 12, quick: bool = False) -> list[CheckResult]:
    out = []
    n_big = 10_000
    law = ParamLaw.uniform_sphere(2)
    cfg = ModelConfig(n=n_big, beta=2, kappa4=0.0, param_law=law)
    ramp = make_grid(2.0 * math.sqrt(n_big), n_big / 2.0, max(points, 12))
    sres = curve_S_res(ramp, cfg).columns["s_res"]
    out.append(_check_range("exponent_s_res_ramp",
                            fit_power_law(ramp, sres).exponent, 0.70, 0.80))
    win = make_grid(10.0, 100.0, max(points, 12))
    m1 = np.array([residual_moment(t, 1, law) for t in win])
    m2 = np.array([residual_moment(t, 2, law) for t in win])
    out.append(_check_range("exponent_residual_moment_order1",
                            fit_power_law(win, m1).exponent, 0.45, 0.55))
    out.append(_check_range("exponent_residual_moment_order2",
                            fit_power_law(win, m2).exponent, 1.43, 1.57))
    m4 = np.array([residual_moment(t, 1, ParamLaw.uniform_sphere(4)) for t in win])
    out.append(CheckResult("exponent_residual_moment_k4_bounded",
                           fit_power_law(win, m4).exponent, 0.05,
                           fit_power_law(win, m4).exponent <= 0.05, "slope must not grow"))
    # Ratio decay in the slope-dominated (large-N) regime; at desk N the
    # window straddles the dip crossover and the fit is regime-mixed.
    cfg_ratio = ModelConfig(n=10 ** 6, beta=2, kappa4=0.0, param_law=law)
    rg = make_grid(5.0, 200.0, 25)
    ratio = curve_S_res(rg, cfg_ratio).columns["s_res"] / curve_S_wig(rg, cfg_ratio).columns["s_wig"]
    out.append(_check_range("exponent_ratio_decay",
                            fit_power_law(rg, ratio).exponent, -0.30, -0.20))
    cfg_u = ModelConfig(n=n_big, beta=2, kappa4=0.0, variant="unnormalized_plane",
                        param_law=ParamLaw.plane_annulus())
    gu = make_grid(2.0 * math.sqrt(n_big), n_big / 2.0, 10 if quick else max(points, 10))
    cu = curve_S_res_unnormalized(gu, cfg_u, n_center=10 if quick else 12)
    su = cu.columns["s_res_unnorm"]
    out.append(_check_range("exponent_unnormalized_ramp",
                            fit_power_law(gu, su).exponent, 0.15, 0.35))
    out.append(_check_range("exponent_unnormalized_ratio",
                            fit_power_law(gu, su / cu.columns["es_s_wig"]).exponent,
                            -0.85, -0.65))
    return out


def check_unfolded() -> list[CheckResult]:
    out = []
    for cls in ("GUE", "GOE"):
        lo = k_unfolded(1.0, 100, cls)
        hi = k_unfolded(1.0 + 1e-15, 100, cls)
        out.append(_check(f"unfolded_continuity_{cls}", abs(hi - lo), 1e-14))
    goe1 = abs(k_unfolded(1.0, 100, "GOE") * 100 - (2.0 - math.log(3.0)))
    out.append(_check("unfolded_goe_tau1_value", goe1, 1e-12))
    return out


def check_scalar_primitives() -> list[CheckResult]:
    out = []
    worst = 0.0
    for x in (0.5, 2.0, 13.0, 40.0, 100.0):
        for k in (1, 3, 10, 50):
            lhs = bessel_j(k - 1, x) + bessel_j(k + 1, x)
            rhs = 2.0 * k / x * bessel_j(k, x)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-10))
    out.append(_check("bessel_three_term_recurrence", worst, 1e-10))
    worst = 0.0
    for x in (-1.5, -0.2, 0.7, 1.9):
        worst = max(worst, abs(abs(stieltjes_msc(complex(x, 0.0))) - 1.0))
    out.append(_check("msc_boundary_modulus", worst, 1e-12))
    from scipy.integrate import quad

    worst = 0.0
    for t in (1.0, 5.0, 20.0):
        val, _ = quad(lambda x: math.cos(t * x) * math.sqrt(4.0 - x * x) / (2.0 * math.pi),
                      -2.0, 2.0, limit=400)
        worst = max(worst, abs(val - e_slope(t)))
    out.append(_check("e_slope_vs_quadrature", worst, 1e-8))
    return out


def run_all(points: int = 12, quick: bool = False) -> list[CheckResult]:
    checks: list[CheckResult] = []
    checks += check_scalar_primitives()
    checks += check_triple_agreement()
    checks += check_large_t_expansion()
    checks += check_kernel_identity()
    checks += check_series_gate()
    checks += check_unfolded()
    checks += check_exponents(points, quick=quick)
    return checks


def render_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        line = f"{status} {r.name}: achieved={r.achieved:.6e} required<={r.required:.6e}"
        if r.detail:
            line += f" [{r.detail}]"
        lines.append(line)
    n_fail = sum(1 for r in results if not r.ok)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
