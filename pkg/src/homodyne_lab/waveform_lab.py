"""Grid numerics for wavefunctions and densities on the real line.

Everything lives on a uniform position grid.  Integrals are Riemann sums
(sum * dx), which for the smooth, exponentially decaying families used here
converge far faster than the stated tolerances.  Derivatives use fourth-order
finite differences.  The heat semigroup T_t is a linear (zero-padded, never
circular) convolution with the Gaussian kernel of variance t.

The central object of verification is the flow functional

    F(t, delta) = (t+d) * int T_t f ln T_t f
                  + (t+d) * ln sqrt(2 pi e (t+d)) + d/2
                  - 2 d^2 * int |psi'|^2,      f = |psi|^2, d = delta,

which is nonpositive for every unit psi and t >= 0, delta > 0, with equality
exactly for Gaussian psi whose density variance equals delta.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .reporting import Violation

# Tolerances calibrated for the default grid (N = 4096, half-width >= 10);
# quadrature errors scale like O(dx^2) or better.
NORM_TOL = 1e-10
DENSITY_NORM_TOL = 1e-8
BOUNDARY_DECAY_TOL = 1e-12
MASS_TOL = 1e-9
ENTROPY_FLOOR = 1e-300
KERNEL_RADIUS_SIGMAS = 10.0

DEFAULT_GRID_N = 4096
DEFAULT_HALF_WIDTH = 10.0


# ---------------------------------------------------------------------------
# grid containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_i = x0 + i * dx, i = 0..n-1."""

    x0: float
    dx: float
    n: int

    def __post_init__(self) -> None:
        if self.dx <= 0.0 or self.n < 16:
            raise ValueError("grid needs dx > 0 and at least 16 points")

    @classmethod
    def centered(cls, half_width: float, n: int = DEFAULT_GRID_N) -> "GridSpec":
        return cls(x0=-half_width, dx=2.0 * half_width / (n - 1), n=n)

    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def half_width(self) -> float:
        return 0.5 * self.dx * (self.n - 1)

    def matches(self, other: "GridSpec") -> bool:
        return (
            self.n == other.n
            and abs(self.x0 - other.x0) < 1e-9
            and abs(self.dx - other.dx) < 1e-12
        )


@dataclass(frozen=True, eq=False)
class GridWaveFunction:
    """Complex amplitudes on a uniform grid, unit L2 norm, decayed at the edges."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        norm = float(np.sum(np.abs(values) ** 2) * self.dx)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"wavefunction not normalized: sum |psi|^2 dx = {norm}")
        amax = float(np.max(np.abs(values)))
        edge = max(abs(values[0]), abs(values[-1]))
        if edge > BOUNDARY_DECAY_TOL * amax:
            raise ValueError(
                "wavefunction under-resolved: boundary amplitude "
                f"{edge / amax:.3e} of max exceeds {BOUNDARY_DECAY_TOL}"
            )

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.x0, self.dx, len(self.values))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points()


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Nonnegative values on a uniform grid integrating to one.

    ``mass_defect`` records how much probability mass a producing operation
    (e.g. the heat semigroup) had to renormalize away; it is diagnostic only.
    """

    x0: float
    dx: float
    values: np.ndarray
    mass_defect: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if np.any(values < 0.0):
            raise ValueError("density has negative values")
        mass = float(np.sum(values) * self.dx)
        if abs(mass - 1.0) > DENSITY_NORM_TOL:
            raise ValueError(f"density not normalized: sum f dx = {mass}")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.x0, self.dx, len(self.values))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points()


# ---------------------------------------------------------------------------
# fourth-order finite differences
# ---------------------------------------------------------------------------

# one-sided stencils for the two points at each boundary (amplitudes there are
# ~1e-12 of max, so their contribution to any integral is negligible anyway)
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def first_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order first derivative, one-sided at the boundaries."""
    v = np.asarray(values)
    d = np.empty_like(v)
    d[2:-2] = (-v[4:] + 8.0 * v[3:-1] - 8.0 * v[1:-3] + v[:-4]) / (12.0 * dx)
    d[0] = _D1_EDGE0 @ v[:5] / dx
    d[1] = _D1_EDGE1 @ v[:5] / dx
    d[-1] = -(_D1_EDGE0 @ v[-5:][::-1]) / dx
    d[-2] = -(_D1_EDGE1 @ v[-5:][::-1]) / dx
    return d


def second_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order second derivative, one-sided at the boundaries."""
    v = np.asarray(values)
    d = np.empty_like(v)
    d[2:-2] = (-v[4:] + 16.0 * v[3:-1] - 30.0 * v[2:-2] + 16.0 * v[1:-3] - v[:-4]) / (
        12.0 * dx * dx
    )
    d[0] = _D2_EDGE0 @ v[:6] / dx**2
    d[1] = _D2_EDGE1 @ v[:6] / dx**2
    d[-1] = _D2_EDGE0 @ v[-6:][::-1] / dx**2
    d[-2] = _D2_EDGE1 @ v[-6:][::-1] / dx**2
    return d


# ---------------------------------------------------------------------------
# densities, entropy, energies
# ---------------------------------------------------------------------------

def density_from_wavefunction(psi: GridWaveFunction) -> GridDensity:
    """Pointwise |psi|^2."""
    return GridDensity(psi.x0, psi.dx, np.abs(psi.values) ** 2)


def gauss_convolve(values: np.ndarray, dx: float, t: float) -> np.ndarray:
    """Linear (zero-padded) convolution with the analytic Gaussian kernel of
    variance t, truncated at 10 standard deviations."""
    radius = int(math.ceil(KERNEL_RADIUS_SIGMAS * math.sqrt(t) / dx))
    u = np.arange(-radius, radius + 1) * dx
    kernel = np.exp(-u * u / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    return fftconvolve(values, kernel, mode="same") * dx


def heat_semigroup(f: GridDensity, t: float) -> GridDensity:
    """Convolve with the Gaussian kernel of variance t (linear, zero-padded).

    t = 0 returns the density unchanged.  The kernel is evaluated from the
    analytic formula and truncated at 10 standard deviations; the resulting
    mass defect is recorded and renormalized away.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return GridDensity(f.x0, f.dx, f.values.copy())
    half_width = f.grid.half_width
    if math.sqrt(t) > half_width / 8.0:
        raise ValueError(
            f"kernel too wide for grid: sqrt(t)={math.sqrt(t):.3g} exceeds "
            f"half_width/8={half_width / 8.0:.3g}"
        )
    smeared = gauss_convolve(f.values, f.dx, t)
    # fftconvolve can leave ~1e-17 negative noise in the far tails
    smeared = np.clip(smeared, 0.0, None)
    mass = float(np.sum(smeared) * f.dx)
    defect = abs(mass - 1.0)
    if defect > MASS_TOL:
        raise ValueError(f"heat semigroup lost mass beyond tolerance: defect {defect}")
    return GridDensity(f.x0, f.dx, smeared / mass, mass_defect=defect)


def differential_entropy(f: GridDensity) -> float:
    """- int f ln f, with the convention 0 ln 0 = 0 (floor 1e-300)."""
    v = f.values
    mask = v > ENTROPY_FLOOR
    return float(-np.sum(v[mask] * np.log(v[mask])) * f.dx)


def dirichlet_energy(psi: GridWaveFunction) -> float:
    """int |psi'|^2, i.e. the momentum second moment <psi| p^2 |psi>."""
    d = first_derivative(psi.values, psi.dx)
    return max(float(np.sum(np.abs(d) ** 2) * psi.dx), 0.0)


def sqrt_density_energy(f: GridDensity) -> float:
    """int |d sqrt(f) / dx|^2; equals dirichlet_energy for densities of real psi.

    Evaluated in the equivalent ratio form (1/4) int f'^2 / f, which stays
    smooth across simple zeros of f (where sqrt(f) has a kink that finite
    differences would misresolve).  Points with f below 1e-13 of the peak are
    excluded; their contribution is negligible for grid-resolved densities.
    """
    v = f.values
    d = first_derivative(v, f.dx)
    mask = v > 1e-13 * float(v.max())
    return max(float(np.sum(d[mask] ** 2 / v[mask]) * 0.25 * f.dx), 0.0)


def smeared_output_density(psi: GridWaveFunction, beta: float) -> GridDensity:
    """Outcome density of the noisy position measurement: T_beta |psi|^2."""
    return heat_semigroup(density_from_wavefunction(psi), beta)


def output_entropy(psi: GridWaveFunction, beta: float) -> float:
    """Differential entropy of the measurement outcome density."""
    return differential_entropy(smeared_output_density(psi, beta))


# ---------------------------------------------------------------------------
# the flow functional and its relatives
# ---------------------------------------------------------------------------

def _gap_from_terms(
    entropy_integral: float, dirichlet: float, t: float, delta: float, rhs_sign: float = 1.0
) -> float:
    # entropy_integral = int T_t f ln T_t f  (note: minus the entropy)
    td = t + delta
    return (
        td * entropy_integral
        + td * math.log(math.sqrt(2.0 * math.pi * math.e * td))
        + 0.5 * delta
        - rhs_sign * 2.0 * delta * delta * dirichlet
    )


def _check_t_delta(t: float, delta: float) -> None:
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")


def logsobolev_gap(psi: GridWaveFunction, t: float, delta: float) -> float:
    """F(t, delta) for the given wavefunction; nonpositive in exact arithmetic."""
    _check_t_delta(t, delta)
    g = heat_semigroup(density_from_wavefunction(psi), t)
    return _gap_from_terms(-differential_entropy(g), dirichlet_energy(psi), t, delta)


def logsobolev_gap_derivative(psi: GridWaveFunction, t: float, delta: float) -> float:
    """Closed form of dF/dt via the heat-flow entropy-production identity.

    With g = T_t f and d~ = t + delta:

        dF/dt = int g ln g + ln sqrt(2 pi d~) + 1 - 2 d~ int |d sqrt(g)/dx|^2,

    which is itself a nonpositive log-Sobolev margin for the density g.
    """
    _check_t_delta(t, delta)
    g = heat_semigroup(density_from_wavefunction(psi), t)
    td = t + delta
    return (
        -differential_entropy(g)
        + math.log(math.sqrt(2.0 * math.pi * td))
        + 1.0
        - 2.0 * td * sqrt_density_energy(g)
    )


def lieb_gap(psi: GridWaveFunction, a: float) -> float:
    """Margin of the sharp one-dimensional log-Sobolev inequality.

    int |psi|^2 ln |psi|^2 + ln a + 1 - (a^2/pi) int |psi'|^2  <=  0
    for unit psi; a = sqrt(2 pi delta) gives the scaled form used by F(0, delta).
    """
    if not a > 0.0:
        raise ValueError(f"a must be positive, got {a}")
    f = density_from_wavefunction(psi)
    return (
        -differential_entropy(f)
        + math.log(a)
        + 1.0
        - (a * a / math.pi) * dirichlet_energy(psi)
    )


def gaussian_gap_closed_form(a: float, t: float, delta: float) -> float:
    """F(t, delta) for a Gaussian wavefunction of density variance a.

    (t+d)/2 * ln((t+d)/(a+t)) + d/2 - d^2/(2a); zero exactly when a = delta.
    """
    if not a > 0.0:
        raise ValueError(f"a must be positive, got {a}")
    _check_t_delta(t, delta)
    td = t + delta
    return 0.5 * td * math.log(td / (a + t)) + 0.5 * delta - delta * delta / (2.0 * a)


def gaussian_margin_uv(u, v):
    """Scaled Gaussian margin m(u, v) = ln((1+u)/(1+v)) - v/(1+v) (1 - v/u).

    Equals -2/(t+delta) times the Gaussian gap under u = a/t, v = delta/t;
    nonnegative for u > 0, v >= 0 with equality exactly on u = v.
    Accepts scalars or arrays.
    """
    u_arr = np.asarray(u, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any(u_arr <= 0.0):
        raise ValueError("u must be positive")
    if np.any(v_arr < 0.0):
        raise ValueError("v must be nonnegative")
    out = np.log((1.0 + u_arr) / (1.0 + v_arr)) - (v_arr / (1.0 + v_arr)) * (1.0 - v_arr / u_arr)
    return float(out) if np.isscalar(u) and np.isscalar(v) else out


def gaussian_margin_uv_du(u, v):
    """d/du of gaussian_margin_uv: (u-v)(u+v+uv) / ((1+u)(1+v)u^2)."""
    u_arr = np.asarray(u, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any(u_arr <= 0.0):
        raise ValueError("u must be positive")
    out = (u_arr - v_arr) * (u_arr + v_arr + u_arr * v_arr) / (
        (1.0 + u_arr) * (1.0 + v_arr) * u_arr**2
    )
    return float(out) if np.isscalar(u) and np.isscalar(v) else out


def output_entropy_dirichlet_bound(
    psi: GridWaveFunction, beta: float, delta: float
) -> tuple[float, float]:
    """Output entropy and its lower bound in terms of the Dirichlet energy.

    bound = ln sqrt(2 pi (b+d)) + (b+2d)/(2(b+d)) - 2d^2/(b+d) * int |psi'|^2.
    Returns (h, bound) with h >= bound up to quadrature error; equality holds
    for the squeezed state of position variance delta.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    _check_t_delta(0.0, delta)
    h = output_entropy(psi, beta)
    bd = beta + delta
    bound = (
        math.log(math.sqrt(2.0 * math.pi * bd))
        + (beta + 2.0 * delta) / (2.0 * bd)
        - (2.0 * delta * delta / bd) * dirichlet_energy(psi)
    )
    return h, bound


# ---------------------------------------------------------------------------
# wavefunction factories
# ---------------------------------------------------------------------------

def oscillator_mode(x: np.ndarray, n: int, delta: float) -> np.ndarray:
    """Oscillator eigenfunction number n, scaled so mode 0 has position variance delta."""
    if n < 0 or n > 64:
        raise ValueError(f"mode index out of supported range: {n}")
    s = math.sqrt(2.0 * delta)
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    norm = (math.pi * s * s) ** -0.25 / math.sqrt(2.0**n * math.factorial(n))
    return norm * np.polynomial.hermite.hermval(x / s, coeffs) * np.exp(-(x * x) / (2.0 * s * s))


def _finalize(grid: GridSpec, values: np.ndarray) -> GridWaveFunction:
    norm = math.sqrt(float(np.sum(np.abs(values) ** 2) * grid.dx))
    if norm == 0.0:
        raise ValueError("wavefunction is identically zero on the grid")
    return GridWaveFunction(grid.x0, grid.dx, values / norm)


def gaussian_wavefunction(
    grid: GridSpec, variance: float, mean: float = 0.0, momentum: float = 0.0
) -> GridWaveFunction:
    """Real Gaussian amplitude with |psi|^2 = N(mean, variance), optionally boosted."""
    if not variance > 0.0:
        raise ValueError("variance must be positive")
    x = grid.points()
    values = np.exp(-((x - mean) ** 2) / (4.0 * variance)).astype(complex)
    if momentum != 0.0:
        values = values * np.exp(1j * momentum * x)
    return _finalize(grid, values)


def squeezed_coherent_wavefunction(grid: GridSpec, delta: float, x: float = 0.0) -> GridWaveFunction:
    """Squeezed state of position variance delta displaced to position x."""
    return gaussian_wavefunction(grid, delta, mean=x)


def hermite_superposition_wavefunction(
    grid: GridSpec,
    coefficients,
    delta: float,
    shift: float = 0.0,
    momentum: float = 0.0,
) -> GridWaveFunction:
    """Superposition of oscillator eigenfunctions at scale delta.

    Coefficients may be complex; the result is renormalized on the grid.  The
    request is rejected if the highest mode oscillates too fast for the grid.
    """
    coeffs = np.asarray(coefficients, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) == 0:
        raise ValueError("coefficients must be a nonempty 1-d sequence")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    n_max = len(coeffs) - 1
    # require >= 8 grid points per oscillation of the fastest mode
    k_max = math.sqrt(2 * n_max + 1) / math.sqrt(2.0 * delta) + abs(momentum)
    if k_max > 0 and grid.dx > 2.0 * math.pi / (8.0 * k_max):
        raise ValueError(
            f"grid under-resolves mode {n_max} at delta={delta}: dx={grid.dx:.3g}"
        )
    x = grid.points()
    values = np.zeros(grid.n, dtype=complex)
    for n, c in enumerate(coeffs):
        if c != 0:
            values += c * oscillator_mode(x - shift, n, delta)
    if momentum != 0.0:
        values = values * np.exp(1j * momentum * x)
    return _finalize(grid, values)


def gaussian_mixture_wavefunction(grid: GridSpec, components) -> GridWaveFunction:
    """Amplitude built as a weighted sum of Gaussian bumps.

    ``components`` is a sequence of (weight, mean, variance); weights may be
    complex.  The sum is renormalized on the grid.
    """
    x = grid.points()
    values = np.zeros(grid.n, dtype=complex)
    for weight, mean, variance in components:
        if not variance > 0.0:
            raise ValueError("component variance must be positive")
        values += weight * (2.0 * math.pi * variance) ** -0.25 * np.exp(
            -((x - mean) ** 2) / (4.0 * variance)
        )
    return _finalize(grid, values)


@dataclass(frozen=True)
class WaveFunctionSpec:
    """Declarative recipe for a test wavefunction.

    kind is one of 'gaussian', 'squeezed_coherent', 'hermite_superposition',
    'gaussian_mixture'.  With kind='hermite_superposition' and no explicit
    coefficients, ``n_modes`` complex coefficients are drawn from the seed.
    half_width=None grows the grid automatically until the boundary-decay
    invariant is met.
    """

    kind: str
    variance: float = 1.0
    mean: float = 0.0
    momentum: float = 0.0
    coefficients: tuple = ()
    n_modes: int = 0
    components: tuple = ()
    grid_n: int = DEFAULT_GRID_N
    half_width: float | None = None
    seed: int | None = None


def _auto_half_width_guess(spec: WaveFunctionSpec) -> float:
    if spec.kind in ("gaussian", "squeezed_coherent"):
        return max(DEFAULT_HALF_WIDTH, abs(spec.mean) + 11.5 * math.sqrt(spec.variance) + 1.0)
    if spec.kind == "hermite_superposition":
        n_max = max(len(spec.coefficients), spec.n_modes, 1) - 1
        return max(
            DEFAULT_HALF_WIDTH,
            abs(spec.mean)
            + 8.0 * math.sqrt(2.0 * spec.variance)
            + math.sqrt(2.0 * (2 * n_max + 1) * spec.variance),
        )
    if spec.kind == "gaussian_mixture":
        reach = max(abs(m) + 11.5 * math.sqrt(v) for _, m, v in spec.components)
        return max(DEFAULT_HALF_WIDTH, reach + 1.0)
    raise ValueError(f"unknown wavefunction kind: {spec.kind}")


def generate_test_wavefunction(spec: WaveFunctionSpec) -> GridWaveFunction:
    """Build the wavefunction described by ``spec``; deterministic for a fixed seed."""
    coefficients = spec.coefficients
    if spec.kind == "hermite_superposition" and not coefficients:
        if spec.n_modes < 1:
            raise ValueError("hermite_superposition needs coefficients or n_modes >= 1")
        if spec.seed is None:
            raise ValueError("random superposition needs a seed")
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
        coefficients = tuple(
            rng.standard_normal(spec.n_modes) + 1j * rng.standard_normal(spec.n_modes)
        )

    def build(half_width: float) -> GridWaveFunction:
        grid = GridSpec.centered(half_width, spec.grid_n)
        if spec.kind in ("gaussian", "squeezed_coherent"):
            return gaussian_wavefunction(grid, spec.variance, spec.mean, spec.momentum)
        if spec.kind == "hermite_superposition":
            return hermite_superposition_wavefunction(
                grid, coefficients, spec.variance, spec.mean, spec.momentum
            )
        if spec.kind == "gaussian_mixture":
            return gaussian_mixture_wavefunction(grid, spec.components)
        raise ValueError(f"unknown wavefunction kind: {spec.kind}")

    if spec.half_width is not None:
        return build(spec.half_width)
    half_width = _auto_half_width_guess(spec)
    for _ in range(12):
        try:
            return build(half_width)
        except ValueError as err:
            if "under-resolved" not in str(err):
                raise
            half_width *= 1.25
    raise ValueError(f"could not fit wavefunction on a grid: {spec}")


def random_wavefunction(master_seed: int, index: int, grid: GridSpec) -> GridWaveFunction:
    """Seeded random hermite superposition; stream (master_seed, index) is
    independent of evaluation order, so sweeps parallelize deterministically."""
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, index]))
    n_modes = int(rng.integers(1, 7))
    coeffs = rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)
    scale = math.exp(rng.uniform(math.log(0.25), math.log(2.0)))
    shift = float(rng.uniform(-1.0, 1.0))
    momentum = float(rng.normal(0.0, 0.7))
    return hermite_superposition_wavefunction(grid, coeffs, scale, shift, momentum)


# ---------------------------------------------------------------------------
# verification sweep
# ---------------------------------------------------------------------------

@dataclass
class LogSobSuiteResult:
    n_cases: int
    worst_gap: float
    worst_derivative: float
    worst_gaussian_equality: float
    uv_margin_min: float
    uv_diagonal_max_abs: float
    fd_worst_rel_err: float
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _psi_case_terms(args):
    """Per-wavefunction worker: entropy and energy terms for every t."""
    master_seed, index, grid_n, half_width, t_values, with_sqrt_energy = args
    grid = GridSpec.centered(half_width, grid_n)
    psi = random_wavefunction(master_seed, index, grid)
    f = density_from_wavefunction(psi)
    dirichlet = dirichlet_energy(psi)
    rows = []
    for t in t_values:
        g = heat_semigroup(f, t)
        entropy_integral = -differential_entropy(g)
        sqrt_energy = sqrt_density_energy(g) if with_sqrt_energy else 0.0
        rows.append((t, entropy_integral, sqrt_energy))
    return index, dirichlet, rows


def _derivative_from_terms(entropy_integral, sqrt_energy, t, delta):
    td = t + delta
    return entropy_integral + math.log(math.sqrt(2.0 * math.pi * td)) + 1.0 - 2.0 * td * sqrt_energy


def run_logsob_suite(
    seed: int = 0,
    n_psi: int = 200,
    t_values: tuple = (0.0, 0.25, 0.5, 1.0, 2.0),
    delta_values: tuple = (0.25, 0.5, 1.0, 2.0),
    grid_n: int = DEFAULT_GRID_N,
    half_width: float = 20.0,
    tol_gap: float = 5e-4,
    tol_equality: float = 1e-4,
    tol_derivative: float = 5e-4,
    fd_cases: int = 50,
    fd_step: float = 1e-4,
    fd_rel_tol: float = 1e-3,
    uv_grid_points: int = 200,
    negate_rhs: bool = False,
    workers: int = 1,
) -> LogSobSuiteResult:
    """Sweep F(t, delta) <= 0 and its companions over a seeded wavefunction family.

    Components: gap nonpositivity and monotonicity along the heat flow for
    n_psi seeded superpositions, the closed-form derivative bound and its
    finite-difference identity, the Gaussian equality cases, and the scaled
    two-parameter margin on a log-spaced grid.  ``negate_rhs`` flips the sign
    of the Dirichlet term (a self-test hook that must produce violations).
    """
    t_values = tuple(sorted(t_values))
    rhs_sign = -1.0 if negate_rhs else 1.0
    violations: list[Violation] = []

    case_args = [
        (seed, i, grid_n, half_width, t_values, True) for i in range(n_psi)
    ]
    # results are per-index, so scheduling cannot affect the report
    workers = min(workers, max(1, n_psi // 32))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_psi_case_terms, case_args, chunksize=8))
    else:
        results = [_psi_case_terms(a) for a in case_args]

    worst_gap = -math.inf
    worst_derivative = -math.inf
    for index, dirichlet, rows in results:
        for delta in delta_values:
            previous_gap = None
            for t, entropy_integral, sqrt_energy in rows:
                gap = _gap_from_terms(entropy_integral, dirichlet, t, delta, rhs_sign)
                worst_gap = max(worst_gap, gap)
                if gap > tol_gap:
                    violations.append(Violation(
                        case_id=f"gap[psi={index},t={t},delta={delta}]",
                        params={"t": t, "delta": delta},
                        seed=seed, value=gap, threshold=tol_gap,
                    ))
                if previous_gap is not None and gap > previous_gap + tol_gap:
                    violations.append(Violation(
                        case_id=f"monotone[psi={index},t={t},delta={delta}]",
                        params={"t": t, "delta": delta},
                        seed=seed, value=gap - previous_gap, threshold=tol_gap,
                    ))
                previous_gap = gap
                derivative = _derivative_from_terms(
                    entropy_integral, rhs_sign * sqrt_energy, t, delta
                )
                worst_derivative = max(worst_derivative, derivative)
                if derivative > tol_derivative:
                    violations.append(Violation(
                        case_id=f"derivative[psi={index},t={t},delta={delta}]",
                        params={"t": t, "delta": delta},
                        seed=seed, value=derivative, threshold=tol_derivative,
                    ))

    # Gaussian equality cases: density variance a = delta gives F = 0
    worst_equality = 0.0
    grid = GridSpec.centered(half_width, grid_n)
    for delta in delta_values:
        psi = gaussian_wavefunction(grid, variance=delta)
        f = density_from_wavefunction(psi)
        dirichlet = dirichlet_energy(psi)
        for t in t_values:
            g = heat_semigroup(f, t)
            gap = _gap_from_terms(-differential_entropy(g), dirichlet, t, delta, rhs_sign)
            worst_equality = max(worst_equality, abs(gap))
            if abs(gap) > tol_equality:
                violations.append(Violation(
                    case_id=f"gaussian_equality[t={t},delta={delta}]",
                    params={"t": t, "delta": delta, "a": delta},
                    seed=seed, value=abs(gap), threshold=tol_equality,
                ))

    # finite-difference identity for dF/dt on sampled positive-t cases
    fd_worst = 0.0
    rng = np.random.default_rng(np.random.SeedSequence([seed, 10_001]))
    positive_t = [t for t in t_values if t > 0.0] or [0.5]
    for _ in range(fd_cases):
        index = int(rng.integers(0, max(n_psi, 1)))
        t = float(rng.choice(positive_t))
        delta = float(rng.choice(delta_values))
        psi = random_wavefunction(seed, index, grid)
        closed = logsobolev_gap_derivative(psi, t, delta)
        fd = (
            logsobolev_gap(psi, t + fd_step, delta)
            - logsobolev_gap(psi, t - fd_step, delta)
        ) / (2.0 * fd_step)
        rel = abs(fd - closed) / max(abs(closed), abs(fd), 1e-6)
        fd_worst = max(fd_worst, rel)
        if rel > fd_rel_tol:
            violations.append(Violation(
                case_id=f"fd_identity[psi={index},t={t},delta={delta}]",
                params={"t": t, "delta": delta},
                seed=seed, value=rel, threshold=fd_rel_tol,
            ))

    # scaled two-parameter margin on a log-spaced grid
    uv = np.logspace(-2.0, 2.0, uv_grid_points)
    u_mesh, v_mesh = np.meshgrid(uv, uv, indexing="ij")
    margin = gaussian_margin_uv(u_mesh, v_mesh)
    if negate_rhs:
        margin = -margin
    margin_min = float(margin.min())
    diag_max = float(np.max(np.abs(np.diag(margin))))
    if margin_min < 0.0:
        ij = np.unravel_index(int(np.argmin(margin)), margin.shape)
        violations.append(Violation(
            case_id=f"uv_margin[u={uv[ij[0]]:.6g},v={uv[ij[1]]:.6g}]",
            params={"u": float(uv[ij[0]]), "v": float(uv[ij[1]])},
            seed=seed, value=margin_min, threshold=0.0,
        ))
    if diag_max > 1e-12:
        violations.append(Violation(
            case_id="uv_margin_diagonal",
            params={}, seed=seed, value=diag_max, threshold=1e-12,
        ))

    n_cases = n_psi * len(t_values) * len(delta_values)
    return LogSobSuiteResult(
        n_cases=n_cases,
        worst_gap=worst_gap,
        worst_derivative=worst_derivative,
        worst_gaussian_equality=worst_equality,
        uv_margin_min=margin_min,
        uv_diagonal_max_abs=diag_max,
        fd_worst_rel_err=fd_worst,
        violations=violations,
    )
