import numpy as np
import pytest

from sfflab.ensembles import EnsembleSpec, EntryLaw, HermitianMatrix, sample_wigner
from sfflab.spectral import Spectrum, eigenvalues, make_grid, sff_eval, sff_phi, sff_point


def char_poly_bisection_eigs(H, lo=-4.0, hi=4.0, grid=20001, tol=1e-11):
    # Naive oracle: determinant sign changes on a fine grid, then bisection.
    # Determinant by unpivoted-free Gaussian elimination with partial pivoting.
    def det(mat):
        a = mat.astype(complex).copy()
        n = a.shape[0]
        sign = 1.0
        for col in range(n):
            p = np.argmax(np.abs(a[col:, col])) + col
            if p != col:
                a[[col, p]] = a[[p, col]]
                sign = -sign
            if a[col, col] == 0:
                return 0.0
            for row in range(col + 1, n):
                a[row, col:] -= a[row, col] / a[col, col] * a[col, col:]
        return float(np.real(sign * np.prod(np.diag(a))))

    xs = np.linspace(lo, hi, grid)
    vals = np.array([det(H - x * np.eye(H.shape[0])) for x in xs])
    roots = []
    for i in range(grid - 1):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            a, b = xs[i], xs[i + 1]
            fa = vals[i]
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = det(H - m * np.eye(H.shape[0]))
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return np.array(roots)


class TestEigenvalues:
    def test_diagonal(self):
        H = HermitianMatrix(n=3, re=np.tril(np.diag([3.0, 1.0, 2.0])))
        assert np.allclose(eigenvalues(H).values, [1.0, 2.0, 3.0], atol=1e-14)

    def test_two_by_two(self):
        re = np.zeros((2, 2))
        re[1, 0] = 1.0
        H = HermitianMatrix(n=2, re=re)
        assert np.allclose(eigenvalues(H).values, [-1.0, 1.0], atol=1e-14)

    def test_goe8_vs_char_poly_oracle(self):
        spec = EnsembleSpec(n=8, law=EntryLaw("gaussian", 1), seed=20240)
        H = sample_wigner(spec, 0)
        lam = eigenvalues(H).values
        oracle = char_poly_bisection_eigs(H.dense())
        assert oracle.size == 8
        assert np.max(np.abs(np.sort(oracle) - lam)) <= 1e-8

    @pytest.mark.parametrize("beta", [1, 2])
    def test_residual_backward_error(self, beta):
        # ||Hv - lambda v|| <= 1e-9 ||H|| on all N <= 64 suite matrices
        spec = EnsembleSpec(n=64, law=EntryLaw("gaussian", beta), seed=3)
        for stream in range(4):
            H = sample_wigner(spec, stream).dense()
            lam, vec = np.linalg.eigh(H)
            resid = np.max(np.linalg.norm(H @ vec - vec * lam, axis=0))
            assert resid <= 1e-9 * np.linalg.norm(H, 2)
            assert np.allclose(lam, eigenvalues(sample_wigner(spec, stream)).values)

    def test_sorted_output(self):
        spec = EnsembleSpec(n=32, law=EntryLaw("uniform", 2), seed=8)
        lam = eigenvalues(sample_wigner(spec, 0)).values
        assert np.all(np.diff(lam) >= 0)


class TestSpectrumType:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            Spectrum(values=np.array([2.0, 1.0]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Spectrum(values=np.array([0.0, np.inf]))


class TestGrid:
    def test_log_grid(self):
        g = make_grid(1.0, 100.0, 3)
        assert np.allclose(g, [1.0, 10.0, 100.0])

    def test_linear_grid(self):
        g = make_grid(1.0, 3.0, 3, spacing="linear")
        assert np.allclose(g, [1.0, 2.0, 3.0])

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            make_grid(0.0, 1.0, 5)
        with pytest.raises(ValueError):
            make_grid(2.0, 1.0, 5)
        with pytest.raises(ValueError):
            make_grid(1.0, 2.0, 1)


class TestSff:
    def test_single_eigenvalue(self):
        s = Spectrum(values=np.array([0.0]))
        assert np.allclose(sff_eval(s, np.array([0.5, 2.0, 77.0])), 1.0)

    def test_exact_cancellation(self):
        s = Spectrum(values=np.array([0.0, np.pi]))
        out = sff_point(s, 1.0)
        assert out.sff == pytest.approx(0.0, abs=1e-30)
        assert abs(out.phi) == pytest.approx(0.0, abs=1e-16)

    def test_unit_at_time_zero_limit(self):
        spec = EnsembleSpec(n=16, law=EntryLaw("gaussian", 2), seed=0)
        s = eigenvalues(sample_wigner(spec, 0))
        assert sff_eval(s, np.array([1e-12]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_range_and_evenness(self):
        spec = EnsembleSpec(n=40, law=EntryLaw("gaussian", 2), seed=4)
        s = eigenvalues(sample_wigner(spec, 0))
        grid = make_grid(0.1, 1e4, 80)
        vals = sff_eval(s, grid)
        assert np.all((0.0 <= vals) & (vals <= 1.0))
        # conjugate symmetry: phi(-t) = conj(phi(t)), so sff is even in t
        phi = sff_phi(s, grid)
        phi_neg = np.array([np.exp(-1j * t * s.values).sum() / s.n for t in grid])
        assert np.allclose(np.abs(phi_neg) ** 2, np.abs(phi) ** 2, rtol=0, atol=1e-15)

    def test_plateau_time_average(self):
        # time-average over t in [1e3, 1e4] sits within [0.5/N, 2/N]
        spec = EnsembleSpec(n=100, law=EntryLaw("gaussian", 2), seed=11)
        s = eigenvalues(sample_wigner(spec, 0))
        grid = make_grid(1e3, 1e4, 200)
        avg = float(np.mean(sff_eval(s, grid)))
        assert 0.5 / 100 <= avg <= 2.0 / 100

    def test_matches_naive_sum(self):
        spec = EnsembleSpec(n=25, law=EntryLaw("rademacher", 1), seed=2)
        s = eigenvalues(sample_wigner(spec, 3))
        grid = make_grid(0.5, 50.0, 7)
        naive = np.array([abs(np.sum(np.exp(1j * t * s.values)) / s.n) ** 2 for t in grid])
        assert np.allclose(sff_eval(s, grid), naive, rtol=1e-12)
