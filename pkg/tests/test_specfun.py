import math

import numpy as np
import pytest
from scipy.special import jv

from sfflab.specfun import (
    bessel_j,
    bessel_j_array,
    gauss_chebyshev,
    kernel_identity_residual,
    log_kernel_V,
    log_kernel_V_grid,
    semicircle_density,
    stieltjes_msc,
)


def series_oracle(k, x, terms=200):
    # Independent ascending-series oracle sum_m (-1)^m (x/2)^(k+2m)/(m!(k+m)!)
    total = 0.0
    for m in range(terms):
        term = (-1.0) ** m * (x / 2.0) ** (k + 2 * m) / (
            math.factorial(m) * math.factorial(k + m))
        total += term
        if abs(term) < 1e-20:
            break
    return total


class TestBesselJ:
    def test_j0_at_origin(self):
        assert bessel_j(0, 0.0) == 1.0

    def test_odd_order_at_origin(self):
        assert bessel_j(1, 0.0) == 0.0

    def test_j1_of_2_series_oracle(self):
        assert bessel_j(1, 2.0) == pytest.approx(0.5767248077568734, abs=1e-13)
        assert bessel_j(1, 2.0) == pytest.approx(series_oracle(1, 2.0), abs=1e-14)

    @pytest.mark.parametrize("k", [0, 1, 2, 7, 23])
    @pytest.mark.parametrize("x", [0.3, 2.0, 11.9, 12.1, 77.0, 2000.0])
    def test_against_scipy(self, k, x):
        assert bessel_j(k, x) == pytest.approx(float(jv(k, x)), abs=1e-12)

    @pytest.mark.parametrize("k", [0, 1, 3, 8])
    @pytest.mark.parametrize("x", [0.7, 4.5, 60.0])
    def test_parity(self, k, x):
        assert bessel_j(k, -x) == (-1.0) ** k * bessel_j(k, x)

    def test_three_term_recurrence(self):
        for x in np.linspace(0.5, 100.0, 23):
            for k in (1, 2, 5, 17, 50):
                lhs = bessel_j(k - 1, x) + bessel_j(k + 1, x)
                rhs = 2.0 * k / x * bessel_j(k, x)
                assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("x", [0.5, 6.0, 25.0, 300.0])
    def test_square_sum_rule(self, x):
        kmax = int(x) + 60
        j = bessel_j_array(kmax, x)
        total = j[0] ** 2 + 2.0 * np.sum(j[1:] ** 2)
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_overflow_safe_large_order(self):
        # contract: k up to 2 t_max + 200 with t_max = 1e4
        t_max = 1e4
        arr = bessel_j_array(int(2 * t_max + 200), 2 * t_max)
        assert np.all(np.isfinite(arr))
        assert arr[20000] == pytest.approx(float(jv(20000, 20000.0)), abs=1e-12)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            bessel_j(-1, 1.0)


class TestSemicircle:
    def test_center_value(self):
        assert semicircle_density(0.0) == pytest.approx(1.0 / math.pi, abs=1e-15)

    def test_edge_and_outside(self):
        assert semicircle_density(2.0) == 0.0
        assert semicircle_density(3.0) == 0.0
        assert semicircle_density(-2.5) == 0.0

    def test_normalization(self):
        x = np.linspace(-2, 2, 200001)
        mass = np.trapezoid([semicircle_density(v) for v in x], x)
        assert mass == pytest.approx(1.0, abs=1e-7)  # edge sqrt limits trapezoid rate


class TestStieltjes:
    def test_boundary_at_zero(self):
        assert stieltjes_msc(0j) == pytest.approx(1j)

    def test_at_i_quadratic_oracle(self):
        m = stieltjes_msc(1j)
        assert m == pytest.approx(1j * (math.sqrt(5) - 1) / 2, abs=1e-14)
        z = 1j
        assert abs(-1.0 / m - (z + m)) < 1e-13

    @pytest.mark.parametrize("z", [0.3 + 1j, -1.2 - 0.5j, 5 + 0.01j, -40 + 3j, 1e-3 + 1e-6j])
    def test_residual_branch_modulus(self, z):
        m = stieltjes_msc(z)
        assert abs(m * m + z * m + 1.0) <= 1e-12
        assert abs(m) <= 1.0 + 1e-15
        assert math.copysign(1.0, m.imag) == math.copysign(1.0, z.imag)

    def test_boundary_matches_density(self):
        for x in (-1.7, -0.4, 0.0, 0.9, 1.99):
            m = stieltjes_msc(complex(x, 0.0))
            assert abs(abs(m) - 1.0) <= 1e-12
            assert m.imag == pytest.approx(math.pi * semicircle_density(x), abs=1e-13)

    def test_rejects_real_outside_bulk(self):
        for x in (2.0, -2.0, 3.5):
            with pytest.raises(ValueError):
                stieltjes_msc(complex(x, 0.0))


class TestLogKernel:
    def test_zero_coupling(self):
        for x, y in [(0.1, -1.3), (1.9, 1.9), (-0.5, 0.5)]:
            assert log_kernel_V(0.0, x, y) == 0.0

    def test_corner_large_positive(self):
        v = log_kernel_V(1.0, 0.3, 0.3)
        assert v > 10.0  # +inf-trending at the coincidence corner

    def test_corner_lower_bound(self):
        # |1 - U m(x) conj(m(y))|^2 >~ (1-U)^2 + (x-y)^2 caps the blowup rate
        for u, x, y in [(1 - 1e-6, 0.3, 0.3), (1 - 1e-9, -0.7, -0.7 + 1e-8)]:
            v = log_kernel_V(u, x, y)
            bound = -0.5 * math.log(((1 - u) ** 2 + (x - y) ** 2) / 16.0)
            assert 0.0 < v <= bound + 2.0

    def test_exact_corner_sentinel(self):
        assert log_kernel_V(1.0, 0.0, 0.0) == math.inf

    def test_direct_complex_oracle(self):
        import cmath

        def oracle(u, x, y):
            mx = (-x + 1j * math.sqrt(4 - x * x)) / 2
            my = (-y + 1j * math.sqrt(4 - y * y)) / 2
            return math.log(abs(1 - u * mx * my)) - math.log(abs(1 - u * mx * my.conjugate()))

        for u, x, y in [(0.5, 0.1, -0.2), (-0.85, 1.2, 1.1), (0.99, -1.5, 0.3)]:
            assert log_kernel_V(u, x, y) == pytest.approx(oracle(u, x, y), abs=1e-13)

    def test_symmetry_in_xy(self):
        assert log_kernel_V(0.7, 0.4, -1.2) == log_kernel_V(0.7, -1.2, 0.4)

    def test_antisymmetry(self):
        for u, x, y in [(0.5, 0.1, -0.2), (0.9, 1.0, 0.5)]:
            assert log_kernel_V(-u, x, -y) == pytest.approx(-log_kernel_V(u, x, y), abs=1e-13)

    def test_grid_matches_scalar(self):
        xs = np.array([0.2, -1.1, 1.7])
        ys = np.array([-0.3, 0.9, 0.1])
        grid = log_kernel_V_grid(0.6, xs, ys)
        for i in range(3):
            assert grid[i] == pytest.approx(log_kernel_V(0.6, xs[i], ys[i]), abs=1e-14)


class TestGaussChebyshev:
    def test_single_node(self):
        rule = gauss_chebyshev(1)
        assert rule.nodes == pytest.approx([0.0], abs=1e-16)
        assert rule.weights == pytest.approx([math.pi])

    def test_quadratic(self):
        rule = gauss_chebyshev(4)
        assert np.sum(rule.weights * rule.nodes ** 2) == pytest.approx(math.pi / 2, abs=1e-14)

    def test_odd_vanishes(self):
        rule = gauss_chebyshev(4)
        assert abs(np.sum(rule.weights * rule.nodes)) < 1e-14
        assert abs(np.sum(rule.weights * rule.nodes ** 7)) < 1e-14

    @pytest.mark.parametrize("n", [1, 2, 5, 16])
    def test_polynomial_exactness(self, n):
        # exact for degree <= 2n-1 against the analytic Chebyshev moments
        rule = gauss_chebyshev(n)
        for deg in range(0, 2 * n):
            got = np.sum(rule.weights * rule.nodes ** deg)
            if deg % 2 == 1:
                want = 0.0
            else:
                want = math.pi * math.comb(deg, deg // 2) / 2.0 ** deg
            assert got == pytest.approx(want, abs=1e-13)

    def test_nodes_increasing_weights_positive(self):
        rule = gauss_chebyshev(9)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        assert rule.kind == "gauss_chebyshev"


class TestKernelIdentity:
    def test_linear_pair_equals_one(self):
        # f = g = x: both sides are the single Chebyshev mode, value 1
        assert kernel_identity_residual([0, 1], [0, 1]) <= 1e-8

    def test_constant_trivial(self):
        assert kernel_identity_residual([3.0], [0, 0, 1]) == 0.0

    def test_quadratic_cubic(self):
        assert kernel_identity_residual([0, 0, 1], [0, 0, 0, 1]) <= 1e-6

    def test_high_degree(self):
        f = [0.0] * 12 + [1.0]
        assert kernel_identity_residual(f, [0, 1, 0, 2]) <= 1e-6

    def test_rejects_degree_13(self):
        with pytest.raises(ValueError):
            kernel_identity_residual([0.0] * 14, [0, 1])

    def test_rejects_small_rule(self):
        with pytest.raises(ValueError):
            kernel_identity_residual([0, 1], [0, 1], quad_points=100)
