"""Monte-Carlo simulation of the optimal encoding through the noisy measurement.

The capacity-achieving encoding transmits x ~ N(0, gamma) via squeezed states
of position variance delta; the measurement outcome is y = x + eta with
eta ~ N(0, beta + delta).  The mutual information of this Gaussian pair equals
the closed-form capacity, which gives a strong end-to-end check: a parametric
and a nonparametric estimator must both reproduce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian_core import (
    convex_closure_entropy_gaussian,
    gaussian_capacity,
    optimal_ensemble,
)
from .reporting import Violation
from .waveform_lab import (
    DEFAULT_GRID_N,
    WaveFunctionSpec,
    dirichlet_energy,
    generate_test_wavefunction,
    output_entropy,
    squeezed_coherent_wavefunction,
    GridSpec,
)

ESTIMATORS = ("gaussian-mle", "histogram-plugin")

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimulationConfig:
    energy: float
    beta: float
    n_samples: int
    seed: int = 0
    estimator: str = "gaussian-mle"

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.energy < 0.5:
            raise ValueError("energy must be >= 0.5")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")


@dataclass(frozen=True)
class EncodingSample:
    """One transmitted displacement and its measurement outcome."""

    x: float
    y: float


@dataclass(frozen=True, eq=False)
class ChannelSamples:
    """Columnar (x, y) sample arrays; indexing yields EncodingSample."""

    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> EncodingSample:
        return EncodingSample(float(self.x[i]), float(self.y[i]))


def sample_channel(config: SimulationConfig) -> ChannelSamples:
    """Draw (x, y) pairs from the optimal encoding at (energy, beta).

    Samples are generated in fixed-size chunks, each seeded from
    (master seed, chunk index), so the stream does not depend on scheduling
    and identical configs are bit-reproducible.
    """
    params, _ = optimal_ensemble(config.energy, config.beta)
    x_std = math.sqrt(params.gamma)
    noise_std = math.sqrt(config.beta + params.delta)
    xs = np.empty(config.n_samples)
    ys = np.empty(config.n_samples)
    for chunk, start in enumerate(range(0, config.n_samples, _CHUNK)):
        stop = min(start + _CHUNK, config.n_samples)
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, chunk]))
        m = stop - start
        x = rng.normal(0.0, x_std, m) if x_std > 0.0 else np.zeros(m)
        xs[start:stop] = x
        ys[start:stop] = x + rng.normal(0.0, noise_std, m)
    return ChannelSamples(xs, ys)


def analytic_mutual_information(energy: float, beta: float) -> float:
    """(1/2) ln(1 + gamma/(beta + delta)); identical to the closed-form capacity."""
    params, _ = optimal_ensemble(energy, beta)
    return 0.5 * math.log(1.0 + params.gamma / (beta + params.delta))


# ---------------------------------------------------------------------------
# estimators (block jackknife standard errors)
# ---------------------------------------------------------------------------

def _block_slices(n: int, n_blocks: int) -> list[slice]:
    bounds = np.linspace(0, n, n_blocks + 1).astype(int)
    return [slice(bounds[i], bounds[i + 1]) for i in range(n_blocks)]


def _jackknife_se(estimates: np.ndarray) -> float:
    m = len(estimates)
    centered = estimates - estimates.mean()
    return float(math.sqrt((m - 1) / m * np.sum(centered**2)))


def _mle_mi(count, sx, sy, sxx, syy, sxy) -> float:
    vx = sxx / count - (sx / count) ** 2
    vy = syy / count - (sy / count) ** 2
    cxy = sxy / count - (sx / count) * (sy / count)
    if vx <= 0.0 or vy <= 0.0:
        return 0.0
    r2 = min(cxy * cxy / (vx * vy), 1.0 - 1e-15)
    return -0.5 * math.log(1.0 - r2)


def _estimate_mle(x: np.ndarray, y: np.ndarray, n_blocks: int) -> tuple[float, float]:
    slices = _block_slices(len(x), n_blocks)
    stats = np.array(
        [
            [s.stop - s.start, x[s].sum(), y[s].sum(),
             (x[s] ** 2).sum(), (y[s] ** 2).sum(), (x[s] * y[s]).sum()]
            for s in slices
        ]
    )
    totals = stats.sum(axis=0)
    estimate = _mle_mi(*totals)
    deletions = np.array([_mle_mi(*(totals - row)) for row in stats])
    return estimate, _jackknife_se(deletions)


def _equal_mass_index(values: np.ndarray, n_bins: int) -> np.ndarray:
    edges = np.quantile(values, np.linspace(0.0, 1.0, n_bins + 1))
    return np.searchsorted(edges[1:-1], values, side="right")


def _mi_miller_madow(joint_flat: np.ndarray, n_bins: int, n: int) -> float:
    joint = joint_flat.reshape(n_bins, n_bins)
    cx = joint.sum(axis=1)
    cy = joint.sum(axis=0)
    nz = joint > 0
    rows, cols = np.nonzero(nz)
    c = joint[rows, cols].astype(float)
    plug = float(np.sum(c / n * (np.log(c) + math.log(n) - np.log(cx[rows]) - np.log(cy[cols]))))
    k_xy = int(nz.sum())
    k_x = int((cx > 0).sum())
    k_y = int((cy > 0).sum())
    return plug + (k_x + k_y - k_xy - 1) / (2.0 * n)


def _extrapolated_mi(counts_by_bins: list[tuple[int, np.ndarray]], n: int) -> float:
    """Richardson-extrapolate the Miller-Madow binned MI across bin scales.

    Equal-mass binning underestimates the continuous MI by a quantization
    loss that vanishes as a power of the bin count; the power is estimated
    from three scales (B, B/2, B/4) and the leading term removed.  When the
    scale differences carry no signal (already converged, or independent
    variables) the finest-scale value is returned unchanged.
    """
    values = [_mi_miller_madow(counts, b, n) for b, counts in counts_by_bins]
    fine, mid, coarse = values
    d1 = fine - mid
    d2 = mid - coarse
    if d1 <= 0.0 or d2 <= 0.0:
        return fine
    ratio = min(max(d2 / d1, 1.3), 6.0)
    return fine + d1 / (ratio - 1.0)


def _estimate_histogram(x: np.ndarray, y: np.ndarray, n_blocks: int) -> tuple[float, float]:
    n = len(x)
    base = int(math.ceil(n ** (1.0 / 3.0)))
    bin_scales = [base, max(base // 2, 2), max(base // 4, 2)]
    slices = _block_slices(n, n_blocks)
    block_counts = {}
    for b in bin_scales:
        joint_index = _equal_mass_index(x, b) * b + _equal_mass_index(y, b)
        block_counts[b] = np.stack(
            [np.bincount(joint_index[s], minlength=b * b) for s in slices]
        )
    totals = {b: block_counts[b].sum(axis=0) for b in bin_scales}
    estimate = _extrapolated_mi([(b, totals[b]) for b in bin_scales], n)
    deletions = np.array(
        [
            _extrapolated_mi(
                [(b, totals[b] - block_counts[b][i]) for b in bin_scales],
                n - (s.stop - s.start),
            )
            for i, s in enumerate(slices)
        ]
    )
    return estimate, _jackknife_se(deletions)


def estimate_mutual_information(
    samples: ChannelSamples, estimator: str = "gaussian-mle", n_blocks: int = 20
) -> tuple[float, float]:
    """Mutual information estimate and its block-jackknife standard error.

    'gaussian-mle' fits the jointly Gaussian model: (1/2) ln(var y / var resid)
    with the least-squares slope.  'histogram-plugin' bins both axes into
    ceil(n^{1/3}) equal-mass bins, applies the Miller-Madow correction, and
    extrapolates away the residual quantization loss using two coarser bin
    scales.  The jackknife is taken over the full pipeline of each estimator.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    x = np.asarray(samples.x, dtype=float)
    y = np.asarray(samples.y, dtype=float)
    if np.var(x) == 0.0 or np.var(y) == 0.0:
        return 0.0, 0.0
    n_blocks = min(n_blocks, len(x))
    if estimator == "gaussian-mle":
        return _estimate_mle(x, y, n_blocks)
    return _estimate_histogram(x, y, n_blocks)


@dataclass
class SimulationResult:
    estimate: float
    standard_error: float
    analytic: float
    z_score: float


def run_simulation(config: SimulationConfig) -> SimulationResult:
    """Sample the channel, estimate the mutual information, compare to closed form."""
    analytic = analytic_mutual_information(config.energy, config.beta)
    capacity = gaussian_capacity(config.energy, config.beta)
    if abs(analytic - capacity) > 1e-12:
        raise AssertionError(
            f"mutual-information identity broken: {analytic} vs capacity {capacity}"
        )
    samples = sample_channel(config)
    estimate, se = estimate_mutual_information(samples, config.estimator)
    if se > 0.0:
        z = (estimate - analytic) / se
    else:
        z = 0.0 if estimate == analytic else math.inf
    return SimulationResult(estimate=estimate, standard_error=se, analytic=analytic, z_score=z)


# ---------------------------------------------------------------------------
# ensemble-average output entropy checks
# ---------------------------------------------------------------------------

def ensemble_admissible_for_bound(avg_psq: float, alpha_p: float, tol: float = 1e-9) -> bool:
    """The averaged entropy bound applies when the mean momentum moment is
    within the target alpha_p."""
    return avg_psq <= alpha_p + tol


def ensemble_matches_barycenter(
    avg_qsq: float, avg_psq: float, alpha_q: float, alpha_p: float, tol: float = 1e-6
) -> bool:
    """Exact comparison with the minimal average entropy additionally requires
    the ensemble second moments to reproduce the target covariance."""
    return abs(avg_qsq - alpha_q) <= tol and abs(avg_psq - alpha_p) <= tol


@dataclass
class AverageEntropyReport:
    target: float
    optimal_average: float
    optimal_error: float
    n_trials: int
    min_trial_excess: float
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_average_output_entropy(
    energy: float,
    beta: float,
    trials: int = 100,
    seed: int = 0,
    n_displacements: int = 8,
    states_per_trial: int = 4,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = 5e-4,
) -> AverageEntropyReport:
    """Check the minimal-average-entropy value against ensembles on the grid.

    (a) The optimal encoding: the output entropy of a displaced squeezed state
    does not depend on the displacement, so the ensemble average equals the
    closed-form minimum; verify on sampled displacements.
    (b) Competitor ensembles of random superpositions rescaled so their mean
    momentum moment stays below alpha_p: their average output entropy must
    stay above the same value (up to grid tolerance).
    """
    params, cov = optimal_ensemble(energy, beta)
    delta, gamma = params.delta, params.gamma
    target = convex_closure_entropy_gaussian(cov.alpha_p, beta)
    violations: list[Violation] = []

    rng = np.random.default_rng(np.random.SeedSequence([seed, 30_001]))
    xs = rng.normal(0.0, math.sqrt(gamma), n_displacements) if gamma > 0 else np.zeros(n_displacements)
    half_width = max(10.0, float(np.max(np.abs(xs))) + 12.0 * math.sqrt(delta) + 1.0,
                     8.5 * math.sqrt(beta))
    grid = GridSpec.centered(half_width, grid_n)
    entropies = [
        output_entropy(squeezed_coherent_wavefunction(grid, delta, float(x)), beta) for x in xs
    ]
    optimal_average = float(np.mean(entropies))
    optimal_error = abs(optimal_average - target)
    if optimal_error > tol:
        violations.append(Violation(
            case_id="optimal_ensemble_average",
            params={"energy": energy, "beta": beta},
            seed=seed, value=optimal_error, threshold=tol,
        ))

    min_excess = math.inf
    for trial in range(trials):
        trial_rng = np.random.default_rng(np.random.SeedSequence([seed, 40_001, trial]))
        weights = trial_rng.dirichlet(np.ones(states_per_trial))
        avg_entropy = 0.0
        avg_psq = 0.0
        for k in range(states_per_trial):
            n_modes = int(trial_rng.integers(1, 7))
            coeffs = tuple(
                trial_rng.standard_normal(n_modes) + 1j * trial_rng.standard_normal(n_modes)
            )
            fraction = float(trial_rng.uniform(0.5, 1.0))
            base = generate_test_wavefunction(WaveFunctionSpec(
                kind="hermite_superposition", variance=delta,
                coefficients=coeffs, grid_n=grid_n,
            ))
            # dilating by lam divides the momentum moment by lam
            lam = dirichlet_energy(base) / (fraction * cov.alpha_p)
            psi = generate_test_wavefunction(WaveFunctionSpec(
                kind="hermite_superposition", variance=delta * lam,
                coefficients=coeffs, grid_n=grid_n,
            ))
            if psi.grid.half_width < 8.5 * math.sqrt(beta):
                psi = generate_test_wavefunction(WaveFunctionSpec(
                    kind="hermite_superposition", variance=delta * lam,
                    coefficients=coeffs, grid_n=grid_n,
                    half_width=9.0 * math.sqrt(beta),
                ))
            avg_entropy += weights[k] * output_entropy(psi, beta)
            avg_psq += weights[k] * dirichlet_energy(psi)
        if not ensemble_admissible_for_bound(avg_psq, cov.alpha_p, tol=1e-6):
            violations.append(Violation(
                case_id=f"inadmissible_trial[{trial}]",
                params={"avg_psq": avg_psq, "alpha_p": cov.alpha_p},
                seed=seed, value=avg_psq, threshold=cov.alpha_p,
            ))
            continue
        excess = avg_entropy - target
        min_excess = min(min_excess, excess)
        if excess < -tol:
            violations.append(Violation(
                case_id=f"average_entropy_below_minimum[{trial}]",
                params={"energy": energy, "beta": beta, "avg_psq": avg_psq},
                seed=seed, value=excess, threshold=-tol,
            ))

    return AverageEntropyReport(
        target=target,
        optimal_average=optimal_average,
        optimal_error=optimal_error,
        n_trials=trials,
        min_trial_excess=min_excess,
        violations=violations,
    )
