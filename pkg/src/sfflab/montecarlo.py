"""Streaming, mergeable, seed-deterministic Monte Carlo experiments.

The sample range of every experiment is split into fixed-size blocks (a
function of nothing but the sample count), each block is accumulated
sequentially by Welford updates, and block results are merged by Chan's
formula in ascending block order.  Workers only decide who computes which
block, so outputs are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, ParamLaw, combine, sample_param_stream, sample_wigner
from .spectral import eigenvalues, sff_eval, validate_grid

_BLOCK = 32  # samples per merge block; fixed so reductions are worker-count independent


@dataclass
class MomentAccumulator:
    """Welford count/mean/M2 state over a vector of grid values."""

    count: int
    mean: np.ndarray
    m2: np.ndarray

    @staticmethod
    def zeros(size: int) -> "MomentAccumulator":
        return MomentAccumulator(count=0, mean=np.zeros(size), m2=np.zeros(size))

    def update(self, value: np.ndarray) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (value - self.mean)

    def merge(self, other: "MomentAccumulator") -> None:
        """Chan pairwise merge; callers merge in ascending stream order."""
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / total)
        self.m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / total)
        self.count = total

    def variance(self) -> np.ndarray:
        if self.count < 2:
            raise ValueError("variance needs at least two samples")
        return self.m2 / (self.count - 1)

    def std(self) -> np.ndarray:
        return np.sqrt(self.variance())

    def stderr(self) -> np.ndarray:
        return self.std() / np.sqrt(self.count)


def accumulator_update(acc: MomentAccumulator, value: np.ndarray) -> MomentAccumulator:
    acc.update(np.asarray(value, dtype=float))
    return acc


def accumulator_merge(acc: MomentAccumulator, other: MomentAccumulator) -> MomentAccumulator:
    acc.merge(other)
    return acc


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _BLOCK, n)) for lo in range(0, n, _BLOCK)]


def _run_blocks(worker, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [worker(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, args_list))


# ---------------------------------------------------------------------------
# Wigner experiment


@dataclass
class WignerResult:
    grid: np.ndarray
    n_samples: int
    mean: np.ndarray
    std: np.ndarray
    stderr: np.ndarray
    single: np.ndarray  # first realization's raw SFF curve


def _wigner_block(args):
    spec, grid, lo, hi, tag = args
    acc = MomentAccumulator.zeros(grid.size)
    single = None
    for i in range(lo, hi):
        spectrum = eigenvalues(sample_wigner(spec, (tag, i)))
        curve = sff_eval(spectrum, grid)
        if i == 0:
            single = curve
        acc.update(curve)
    return acc, single


def run_wigner_experiment(
    spec: EnsembleSpec,
    grid: np.ndarray,
    n_samples: int,
    workers: int = 1,
    tag: str = "wigner",
) -> WignerResult:
    """Per-t mean/std/stderr of SFF over n_samples independent matrices."""
    grid = validate_grid(grid)
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    args = [(spec, grid, lo, hi, tag) for lo, hi in _blocks(n_samples)]
    results = _run_blocks(_wigner_block, args, workers)
    total = MomentAccumulator.zeros(grid.size)
    single = results[0][1]
    for acc, _ in results:
        total.merge(acc)
    return WignerResult(
        grid=grid,
        n_samples=n_samples,
        mean=total.mean,
        std=total.std(),
        stderr=total.stderr(),
        single=single,
    )


# ---------------------------------------------------------------------------
# Monoparametric experiment


@dataclass
class NestedMoments:
    """Nested (pair, parameter) moments of the monoparametric SFF."""

    grid: np.ndarray
    n_pairs: int
    n_params: int
    inner_means: np.ndarray  # (n_pairs, T): per-pair mean over s
    inner_vars: np.ndarray   # (n_pairs, T): per-pair sample variance over s

    @property
    def mean_h_mean_s(self) -> np.ndarray:
        return self.inner_means.mean(axis=0)

    @property
    def mean_h_var_s(self) -> np.ndarray:
        return self.inner_vars.mean(axis=0)

    @property
    def var_h_mean_s(self) -> np.ndarray:
        return self.inner_means.var(axis=0, ddof=1)

    @property
    def se_mean_h_mean_s(self) -> np.ndarray:
        return self.inner_means.std(axis=0, ddof=1) / np.sqrt(self.n_pairs)

    @property
    def se_mean_h_var_s(self) -> np.ndarray:
        return self.inner_vars.std(axis=0, ddof=1) / np.sqrt(self.n_pairs)

    @property
    def se_var_h_mean_s(self) -> np.ndarray:
        if self.n_pairs < 3:
            # jackknife undefined; normal-theory scale keeps the column finite
            return self.var_h_mean_s * math.sqrt(2.0 / (self.n_pairs - 1))
        return jackknife_variance_se(self.inner_means)

    def pooled_variance(self) -> np.ndarray:
        """Sample variance of all n_pairs * n_params inner samples pooled."""
        p, total = self.n_pairs, self.n_pairs * self.n_params
        m2_inner = self.inner_vars.sum(axis=0) * (self.n_params - 1)
        m2_outer = self.inner_means.var(axis=0, ddof=0) * p * self.n_params
        return (m2_inner + m2_outer) / (total - 1)


def jackknife_variance_se(samples: np.ndarray) -> np.ndarray:
    """Leave-one-out jackknife standard error of the sample variance (axis 0)."""
    p = samples.shape[0]
    if p < 3:
        raise ValueError("jackknife needs at least three outer samples")
    s1 = samples.sum(axis=0)
    s2 = (samples * samples).sum(axis=0)
    loo_s1 = s1[None, :] - samples
    loo_s2 = s2[None, :] - samples * samples
    loo_var = (loo_s2 - loo_s1 * loo_s1 / (p - 1)) / (p - 2)
    return np.sqrt((p - 1) / p * ((loo_var - loo_var.mean(axis=0)) ** 2).sum(axis=0))


def _mono_pair(spec: EnsembleSpec, law: ParamLaw, grid, pair_index: int, n_params: int, tag: str):
    matrices = [sample_wigner(spec, (tag, "h", pair_index, i)) for i in range(law.k)]
    acc = MomentAccumulator.zeros(grid.size)
    for j in range(n_params):
        s = sample_param_stream(law, spec.seed, (tag, "s", pair_index, j))
        spectrum = eigenvalues(combine(matrices, s))
        acc.update(sff_eval(spectrum, grid))
    return acc


def _mono_block(args):
    spec, law, grid, lo, hi, n_params, tag = args
    means = np.empty((hi - lo, grid.size))
    variances = np.empty((hi - lo, grid.size))
    for p in range(lo, hi):
        acc = _mono_pair(spec, law, grid, p, n_params, tag)
        means[p - lo] = acc.mean
        variances[p - lo] = acc.variance()
    return means, variances


_MONO_PAIR_BLOCK = 4  # pairs per merge block (each pair costs n_params decompositions)


def run_mono_experiment(
    spec: EnsembleSpec,
    law: ParamLaw,
    grid: np.ndarray,
    n_pairs: int,
    n_params: int,
    workers: int = 1,
    tag: str = "mono",
) -> NestedMoments:
    """Nested moments: outer loop over matrix tuples, inner loop over s draws.

    Matrices in each tuple share one entry law, so the equal-fourth-cumulant
    precondition of the monoparametric model holds by construction.
    """
    grid = validate_grid(grid)
    if n_pairs < 2 or n_params < 2:
        raise ValueError("need n_pairs >= 2 and n_params >= 2 (inner variance undefined below)")
    ranges = [(lo, min(lo + _MONO_PAIR_BLOCK, n_pairs)) for lo in range(0, n_pairs, _MONO_PAIR_BLOCK)]
    args = [(spec, law, grid, lo, hi, n_params, tag) for lo, hi in ranges]
    results = _run_blocks(_mono_block, args, workers)
    inner_means = np.concatenate([r[0] for r in results], axis=0)
    inner_vars = np.concatenate([r[1] for r in results], axis=0)
    return NestedMoments(
        grid=grid,
        n_pairs=n_pairs,
        n_params=n_params,
        inner_means=inner_means,
        inner_vars=inner_vars,
    )


def run_mono_coupled(
    spec: EnsembleSpec,
    law: ParamLaw,
    grid: np.ndarray,
    n_samples: int,
    workers: int = 1,
    tag: str = "mono_coupled",
) -> WignerResult:
    """Figure-replication variant: one s draw per fresh matrix tuple."""
    grid = validate_grid(grid)
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    args = [(spec, law, grid, lo, hi, tag) for lo, hi in _blocks(n_samples)]
    results = _run_blocks(_coupled_block, args, workers)
    total = MomentAccumulator.zeros(grid.size)
    single = results[0][1]
    for acc, _ in results:
        total.merge(acc)
    return WignerResult(grid=grid, n_samples=n_samples, mean=total.mean,
                        std=total.std(), stderr=total.stderr(), single=single)


def _coupled_block(args):
    spec, law, grid, lo, hi, tag = args
    acc = MomentAccumulator.zeros(grid.size)
    single = None
    for i in range(lo, hi):
        matrices = [sample_wigner(spec, (tag, "h", i, j)) for j in range(law.k)]
        s = sample_param_stream(law, spec.seed, (tag, "s", i, 0))
        curve = sff_eval(eigenvalues(combine(matrices, s)), grid)
        if i == 0:
            single = curve
        acc.update(curve)
    return acc, single


# ---------------------------------------------------------------------------
# Strip (sample-size) experiment


@dataclass
class StripResult:
    grid: np.ndarray
    counts: list[int]
    means: dict[int, np.ndarray] = field(default_factory=dict)


def run_strip_experiment(
    spec: EnsembleSpec,
    law: ParamLaw | None,
    grid: np.ndarray,
    sample_counts: list[int],
    tag: str = "strip",
) -> StripResult:
    """Prefix empirical means over one fixed master stream.

    The curve for count a equals the first-a prefix mean of the curve for any
    count b > a (nested sample sets).  Wigner mode draws fresh matrices; mono
    mode fixes one matrix tuple and draws parameters only.
    """
    grid = validate_grid(grid)
    counts = sorted(int(c) for c in sample_counts)
    if not counts or counts[0] < 1:
        raise ValueError("sample_counts must be nonempty with entries >= 1")
    matrices = None
    if law is not None:
        matrices = [sample_wigner(spec, (tag, "h", 0, i)) for i in range(law.k)]
    acc = MomentAccumulator.zeros(grid.size)
    result = StripResult(grid=grid, counts=counts)
    want = set(counts)
    for i in range(counts[-1]):
        if law is None:
            spectrum = eigenvalues(sample_wigner(spec, (tag, i)))
        else:
            s = sample_param_stream(law, spec.seed, (tag, "s", i))
            spectrum = eigenvalues(combine(matrices, s))
        acc.update(sff_eval(spectrum, grid))
        if acc.count in want:
            result.means[acc.count] = acc.mean.copy()
    return result
