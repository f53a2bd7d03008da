"""Numerical certificate for optimality of the Gaussian encoding.

In the position representation every outcome-density operator of the noisy
position measurement acts by multiplication, so the averaged log-loss
operator

    K(rho) = - int m(y) ln p_rho(y) dy

is a multiplication operator (the Gaussian smear of -ln p_rho), and the dual
certificate is quadratic in momentum:

    Lambda_0 = c + (b+2d)/(2(b+d)) - 2 d^2 p^2 / (b+d),
    c = ln sqrt(2 pi (b+d)),  b = noise power,  d = squeezing variance.

Optimality of the encoding built from squeezed states |x>_d amounts to two
checks: complementary slackness, [K(rho_0(x)) - Lambda_0] |x>_d = 0, and dual
feasibility, <psi| Lambda_0 |psi> <= <psi| K(rho) |psi> for all states.  Both
are verified here on a position grid over seeded families; this is a
falsifiable statistical certificate, not a proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gaussian_core import convex_closure_entropy_gaussian, optimal_ensemble
from .reporting import Violation
from .waveform_lab import (
    DEFAULT_GRID_N,
    GridDensity,
    GridSpec,
    GridWaveFunction,
    gauss_convolve,
    gaussian_wavefunction,
    logsobolev_gap,
    output_entropy,
    random_wavefunction,
    second_derivative,
)


@dataclass(frozen=True, eq=False)
class GridOperator:
    """Operator of the form constant + V(q) + psq_coefficient * p^2 on a grid.

    ``multiplier`` holds V sampled on the grid (None means V = 0).  Hermitian
    by construction since V is real and p^2 acts as -d^2/dx^2.
    """

    x0: float
    dx: float
    n: int
    multiplier: np.ndarray | None = None
    psq_coefficient: float = 0.0
    constant: float = 0.0

    def __post_init__(self) -> None:
        if self.multiplier is not None:
            m = np.asarray(self.multiplier, dtype=float)
            if len(m) != self.n:
                raise ValueError("multiplier length does not match grid")
            object.__setattr__(self, "multiplier", m)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.x0, self.dx, self.n)

    def __sub__(self, other: "GridOperator") -> "GridOperator":
        if not self.grid.matches(other.grid):
            raise ValueError("operators live on different grids")
        if self.multiplier is None and other.multiplier is None:
            multiplier = None
        else:
            a = self.multiplier if self.multiplier is not None else 0.0
            b = other.multiplier if other.multiplier is not None else 0.0
            multiplier = a - b
        return GridOperator(
            self.x0, self.dx, self.n,
            multiplier=multiplier,
            psq_coefficient=self.psq_coefficient - other.psq_coefficient,
            constant=self.constant - other.constant,
        )


def apply_operator(op: GridOperator, psi: GridWaveFunction) -> np.ndarray:
    """(constant + V(q)) psi + psq_coefficient * (-psi''); unnormalized result."""
    if not op.grid.matches(psi.grid):
        raise ValueError("operator and wavefunction grids differ")
    out = op.constant * psi.values
    if op.multiplier is not None:
        out = out + op.multiplier * psi.values
    if op.psq_coefficient != 0.0:
        out = out - op.psq_coefficient * second_derivative(psi.values, psi.dx)
    return out


def operator_expectation(op: GridOperator, psi: GridWaveFunction) -> float:
    """Real expectation <psi| op |psi> by grid quadrature."""
    return float(np.real(np.sum(np.conj(psi.values) * apply_operator(op, psi)) * psi.dx))


def measurement_kernel_closed_form(
    x: float, beta: float, delta: float, grid: GridSpec
) -> GridOperator:
    """K(rho_0(x)) for the squeezed coherent state at x: a shifted parabola.

    multiplier(q) = ((q - x)^2 + beta) / (2 (beta + delta)), constant
    c = ln sqrt(2 pi (beta + delta)).
    """
    if beta < 0.0 or not delta > 0.0:
        raise ValueError("need beta >= 0 and delta > 0")
    q = grid.points()
    bd = beta + delta
    return GridOperator(
        grid.x0, grid.dx, grid.n,
        multiplier=((q - x) ** 2 + beta) / (2.0 * bd),
        constant=math.log(math.sqrt(2.0 * math.pi * bd)),
    )


def measurement_kernel_numeric(p_rho: GridDensity, beta: float) -> GridOperator:
    """K(rho) from the outcome density of an arbitrary state, by quadrature.

    The multiplier is the Gaussian smear of -ln p_rho.  Since -ln p_rho grows
    quadratically, a quadratic A q^2 + B q + C is fitted to the edges of the
    effective support; it smears analytically to A (q^2 + beta) + B q + C,
    stands in for -ln p_rho wherever the density has underflowed to zero, and
    completes the convolution beyond the grid.  Only the decaying residual
    is convolved numerically.  Zeros inside the effective support (where the
    logarithm is genuinely undefined) are rejected.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    values = p_rho.values
    peak = float(values.max())
    # log values are trusted above the FFT-convolution noise floor (~1e-17 of
    # peak); anything below is replaced by the fitted asymptotic quadratic
    trusted = np.nonzero(values > 1e-15 * peak)[0]
    core = np.nonzero(values > 1e-12 * peak)[0]
    if np.any(values[core[0]:core[-1] + 1] == 0.0):
        raise ValueError("outcome density must be strictly positive on its effective support")
    if len(trusted) < len(values) // 4:
        raise ValueError("outcome density support too narrow for the grid")
    q = p_rho.grid.points()
    window = max(len(trusted) // 8, 32)
    edge = np.r_[trusted[:window], trusted[-window:]]
    a2, a1, a0 = np.polyfit(q[edge], -np.log(values[edge]), 2)
    quadratic = a2 * q * q + a1 * q + a0
    neg_log = quadratic.copy()
    neg_log[trusted] = -np.log(values[trusted])
    if beta == 0.0:
        return GridOperator(p_rho.x0, p_rho.dx, len(values), multiplier=neg_log)
    residual = neg_log - quadratic
    smeared_residual = gauss_convolve(residual, p_rho.dx, beta)
    multiplier = smeared_residual + a2 * (q * q + beta) + a1 * q + a0
    return GridOperator(p_rho.x0, p_rho.dx, len(values), multiplier=multiplier)


def dual_certificate_operator(beta: float, delta: float, grid: GridSpec) -> GridOperator:
    """The quadratic-in-momentum dual certificate for squeezing variance delta."""
    if beta < 0.0 or not delta > 0.0:
        raise ValueError("need beta >= 0 and delta > 0")
    bd = beta + delta
    return GridOperator(
        grid.x0, grid.dx, grid.n,
        constant=math.log(math.sqrt(2.0 * math.pi * bd)) + (beta + 2.0 * delta) / (2.0 * bd),
        psq_coefficient=-2.0 * delta * delta / bd,
    )


def _default_grid(x: float, beta: float, delta: float) -> GridSpec:
    half_width = max(10.0, abs(x) + 12.0 * math.sqrt(delta) + 1.0, 8.0 * math.sqrt(beta))
    return GridSpec.centered(half_width, DEFAULT_GRID_N)


def slackness_residual(
    x: float,
    beta: float,
    delta: float,
    grid: GridSpec | None = None,
    lambda0_delta: float | None = None,
) -> float:
    """L2 norm of [K(rho_0(x)) - Lambda_0] |x>_delta; zero at a consistent pairing.

    ``lambda0_delta`` lets the certificate be built for a different squeezing
    than the applied state (a deliberate mismatch used as a negative control);
    by default both use ``delta`` and the residual vanishes identically.
    """
    if grid is None:
        grid = _default_grid(x, beta, delta)
    if abs(x) > grid.half_width / 2.0:
        raise ValueError(f"displacement {x} too large for grid half-width {grid.half_width}")
    kernel = measurement_kernel_closed_form(x, beta, delta, grid)
    certificate = dual_certificate_operator(beta, lambda0_delta if lambda0_delta is not None else delta, grid)
    state = gaussian_wavefunction(grid, variance=delta, mean=x)
    image = apply_operator(kernel - certificate, state)
    return float(math.sqrt(np.sum(np.abs(image) ** 2) * grid.dx))


def dual_feasibility_margin(psi: GridWaveFunction, beta: float, delta: float) -> float:
    """Output entropy of psi minus <psi| Lambda_0 |psi>; nonnegative for all psi.

    The pure-state form of dual feasibility: equals the general margin with
    rho = |psi><psi|, and rearranges to -F(beta, delta) / (beta + delta).
    """
    certificate = dual_certificate_operator(beta, delta, psi.grid)
    return output_entropy(psi, beta) - operator_expectation(certificate, psi)


def dual_feasibility_margin_mixed(
    p_rho: GridDensity,
    psi: GridWaveFunction,
    beta: float,
    delta: float,
    gibbs_tol: float = 1e-6,
) -> float:
    """<psi| K(rho) |psi> - <psi| Lambda_0 |psi> for an arbitrary state rho.

    Also enforces the cross-entropy inequality <psi|K(rho)|psi> >= h(psi)
    (nonnegativity of the relative entropy between the two outcome densities),
    raising if it fails beyond ``gibbs_tol``.
    """
    if not p_rho.grid.matches(psi.grid):
        raise ValueError("density and wavefunction grids differ")
    kernel = measurement_kernel_numeric(p_rho, beta)
    cross_entropy = operator_expectation(kernel, psi)
    entropy = output_entropy(psi, beta)
    if cross_entropy < entropy - gibbs_tol:
        raise ValueError(
            f"cross-entropy inequality violated: {cross_entropy} < {entropy} - {gibbs_tol}"
        )
    certificate = dual_certificate_operator(beta, delta, psi.grid)
    return cross_entropy - operator_expectation(certificate, psi)


def dual_value(alpha_p: float, beta: float) -> float:
    """Value of the dual program at the certificate for delta = 1/(4 alpha_p).

    c + (b+2d)/(2(b+d)) - 2d^2/(b+d) * alpha_p; algebraically identical to
    convex_closure_entropy_gaussian(alpha_p, beta).
    """
    if not alpha_p > 0.0:
        raise ValueError(f"alpha_p must be positive, got {alpha_p}")
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    delta = 0.25 / alpha_p
    bd = beta + delta
    return (
        math.log(math.sqrt(2.0 * math.pi * bd))
        + (beta + 2.0 * delta) / (2.0 * bd)
        - (2.0 * delta * delta / bd) * alpha_p
    )


# ---------------------------------------------------------------------------
# certification sweep
# ---------------------------------------------------------------------------

@dataclass
class OptimalityReport:
    slackness_residuals: list[tuple[float, float]]
    feasibility_margins: list[tuple[str, float]]
    dual_value: float
    dual_gap: float
    dual_identity_error: float
    tol_slackness: float
    tol_feasibility: float
    violations: list[Violation] = field(default_factory=list)

    @property
    def worst_residual(self) -> float:
        return max((r for _, r in self.slackness_residuals), default=0.0)

    @property
    def worst_margin(self) -> float:
        return min((m for _, m in self.feasibility_margins), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.violations


def _margin_case(args):
    seed, index, grid_n, half_width, beta, delta = args
    grid = GridSpec.centered(half_width, grid_n)
    psi = random_wavefunction(seed, index, grid)
    return index, dual_feasibility_margin(psi, beta, delta)


def _mixed_output_density(rng: np.random.Generator, grid: GridSpec, beta: float) -> GridDensity:
    """Analytic outcome density of a random input state (Gaussian or mixture)."""
    q = grid.points()
    if rng.random() < 0.5:
        mean = float(rng.uniform(-1.0, 1.0))
        var = beta + float(rng.uniform(0.1, 3.0))
        values = np.exp(-((q - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    else:
        weights = rng.dirichlet(np.ones(2))
        values = np.zeros(grid.n)
        for w in weights:
            mean = float(rng.uniform(-1.5, 1.5))
            var = beta + float(rng.uniform(0.1, 2.0))
            values += w * np.exp(-((q - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    values = values / (values.sum() * grid.dx)
    return GridDensity(grid.x0, grid.dx, values)


def run_optimality_suite(
    energy: float,
    beta: float,
    seed: int = 0,
    n_psi: int = 500,
    n_mixed: int = 100,
    grid_n: int = DEFAULT_GRID_N,
    half_width: float = 20.0,
    tol_slackness: float = 1e-5,
    tol_feasibility: float = 5e-4,
    perturb_delta: float = 1.0,
    workers: int = 1,
) -> OptimalityReport:
    """Certify the capacity-achieving encoding at (energy, beta).

    Checks complementary slackness over a ladder of displacements, dual
    feasibility over seeded random wavefunctions and mixed states, the
    dual-value identity, and the tie between the pure-state margin and the
    flow functional.  ``perturb_delta`` scales the squeezing of the ensemble
    states away from the certified optimum (negative control: slackness must
    then fail).
    """
    params, cov = optimal_ensemble(energy, beta)
    delta_star = params.delta
    delta_state = delta_star * perturb_delta
    gamma = params.gamma
    violations: list[Violation] = []
    grid = GridSpec.centered(half_width, grid_n)

    # slackness over displacements 0, +-sqrt(gamma)/2, +-sqrt(gamma), ...
    root_gamma = math.sqrt(gamma)
    offsets = [0.0]
    for scale in (0.5, 1.0, 2.0, 3.0):
        if root_gamma > 0.0:
            offsets.extend([scale * root_gamma, -scale * root_gamma])
    residuals: list[tuple[float, float]] = []
    for x in offsets:
        residual = slackness_residual(x, beta, delta_state, grid, lambda0_delta=delta_star)
        residuals.append((x, residual))
        if residual > tol_slackness:
            violations.append(Violation(
                case_id=f"slackness[x={x:.6g}]",
                params={"x": x, "beta": beta, "delta": delta_state, "lambda0_delta": delta_star},
                seed=seed, value=residual, threshold=tol_slackness,
            ))

    # dual feasibility over random pure states
    margins: list[tuple[str, float]] = []
    case_args = [(seed, i, grid_n, half_width, beta, delta_star) for i in range(n_psi)]
    workers = min(workers, max(1, n_psi // 32))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_margin_case, case_args, chunksize=8))
    else:
        results = [_margin_case(a) for a in case_args]
    for index, margin in results:
        margins.append((f"psi[{index}]", margin))
        if margin < -tol_feasibility:
            violations.append(Violation(
                case_id=f"feasibility[psi={index}]",
                params={"beta": beta, "delta": delta_star},
                seed=seed, value=margin, threshold=-tol_feasibility,
            ))

    # equivalence spot check: margin equals -F(beta, delta)/(beta + delta)
    for index in range(min(5, n_psi)):
        psi = random_wavefunction(seed, index, grid)
        margin = dict(results)[index]
        via_gap = -logsobolev_gap(psi, beta, delta_star) / (beta + delta_star)
        if abs(margin - via_gap) > 1e-6:
            violations.append(Violation(
                case_id=f"margin_gap_identity[psi={index}]",
                params={"beta": beta, "delta": delta_star},
                seed=seed, value=abs(margin - via_gap), threshold=1e-6,
            ))

    # dual feasibility against mixed states
    rng = np.random.default_rng(np.random.SeedSequence([seed, 20_001]))
    for i in range(n_mixed):
        p_rho = _mixed_output_density(rng, grid, beta)
        psi = random_wavefunction(seed, n_psi + i, grid)
        try:
            margin = dual_feasibility_margin_mixed(p_rho, psi, beta, delta_star)
        except ValueError as err:
            violations.append(Violation(
                case_id=f"gibbs[mixed={i}]", params={"beta": beta, "detail": str(err)},
                seed=seed, value=math.nan, threshold=-1e-6,
            ))
            continue
        margins.append((f"mixed[{i}]", margin))
        if margin < -tol_feasibility:
            violations.append(Violation(
                case_id=f"feasibility[mixed={i}]",
                params={"beta": beta, "delta": delta_star},
                seed=seed, value=margin, threshold=-tol_feasibility,
            ))

    # dual value: algebraic identity and distance to the grid primal value
    value = dual_value(cov.alpha_p, beta)
    identity_error = abs(value - convex_closure_entropy_gaussian(cov.alpha_p, beta))
    if identity_error > 1e-12:
        violations.append(Violation(
            case_id="dual_identity", params={"alpha_p": cov.alpha_p, "beta": beta},
            seed=seed, value=identity_error, threshold=1e-12,
        ))
    squeezed = gaussian_wavefunction(grid, variance=delta_star)
    dual_gap = output_entropy(squeezed, beta) - value
    if abs(dual_gap) > tol_feasibility:
        violations.append(Violation(
            case_id="dual_gap", params={"alpha_p": cov.alpha_p, "beta": beta},
            seed=seed, value=abs(dual_gap), threshold=tol_feasibility,
        ))

    return OptimalityReport(
        slackness_residuals=residuals,
        feasibility_margins=margins,
        dual_value=value,
        dual_gap=dual_gap,
        dual_identity_error=identity_error,
        tol_slackness=tol_slackness,
        tol_feasibility=tol_feasibility,
        violations=violations,
    )
