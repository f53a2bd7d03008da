"""Closed-form capacity operations against independent oracles.

Expected constants are frozen from the oracles named in each test (grid
quadrature, dense grid maximization, quadratic-root residuals), not from the
implementation under test.
"""

import math

import numpy as np
import pytest

from homodyne_lab.gaussian_core import (
    Channel,
    DiagonalCovariance,
    GaussianEnsembleParams,
    OscillatorConstraint,
    alpha_constrained_capacity,
    convex_closure_entropy_gaussian,
    gaussian_capacity,
    hall_upper_bound,
    optimal_alpha_p,
    optimal_ensemble,
    output_entropy_gaussian,
)
from homodyne_lab.waveform_lab import (
    GridSpec,
    GridDensity,
    differential_entropy,
)

HALF_LN_2PIE = 0.5 * math.log(2.0 * math.pi * math.e)


def grid_entropy_of_normal(variance: float) -> float:
    """Independent oracle: quadrature of -int p ln p for N(0, variance)."""
    grid = GridSpec.centered(max(10.0, 12.0 * math.sqrt(variance)), 8192)
    x = grid.points()
    p = np.exp(-x * x / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)
    p = p / (p.sum() * grid.dx)
    return differential_entropy(GridDensity(grid.x0, grid.dx, p))


def bracket_max(energy: float, beta: float, n_points: int = 100_000) -> float:
    """Independent oracle: maximize the capacity bracket on a dense alpha_p grid."""
    alpha = np.linspace(1e-9, 2.0 * energy - 1e-9, n_points)
    values = 0.5 * (np.log(2.0 * energy - alpha + beta) - np.log(0.25 / alpha + beta))
    return float(values.max())


class TestDomainTypes:
    def test_channel_rejects_negative_noise(self):
        Channel(beta=0.0)
        with pytest.raises(ValueError):
            Channel(beta=-0.1)

    def test_constraint_rejects_subvacuum_energy(self):
        OscillatorConstraint(energy=0.5)
        with pytest.raises(ValueError):
            OscillatorConstraint(energy=0.49)

    def test_covariance_heisenberg_bound(self):
        DiagonalCovariance(alpha_q=0.5, alpha_p=0.5)  # pure state boundary
        with pytest.raises(ValueError):
            DiagonalCovariance(alpha_q=0.4, alpha_p=0.5)
        with pytest.raises(ValueError):
            DiagonalCovariance(alpha_q=-1.0, alpha_p=1.0)

    def test_ensemble_params_validation(self):
        GaussianEnsembleParams(delta=0.25, gamma=0.0)
        with pytest.raises(ValueError):
            GaussianEnsembleParams(delta=0.0, gamma=0.1)
        with pytest.raises(ValueError):
            GaussianEnsembleParams(delta=0.25, gamma=-0.1)


class TestOutputEntropyGaussian:
    def test_matches_grid_quadrature(self):
        # oracle: numeric differential entropy of N(0, 1.5)
        assert output_entropy_gaussian(0.5, 1.0) == pytest.approx(1.621671087258755, abs=1e-12)
        assert output_entropy_gaussian(0.5, 1.0) == pytest.approx(
            grid_entropy_of_normal(1.5), abs=1e-8
        )

    def test_generic_point(self):
        value = output_entropy_gaussian(1.348612, 1.0)
        assert value == pytest.approx(1.8458507908860144, abs=1e-12)
        assert value == pytest.approx(grid_entropy_of_normal(2.348612), abs=1e-8)

    def test_sharp_limit_is_gaussian_entropy(self):
        assert output_entropy_gaussian(1.0, 0.0) == pytest.approx(HALF_LN_2PIE, abs=1e-15)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            output_entropy_gaussian(0.0, 1.0)
        with pytest.raises(ValueError):
            output_entropy_gaussian(-1.0, 1.0)
        with pytest.raises(ValueError):
            output_entropy_gaussian(1.0, -0.5)


class TestConvexClosureEntropyGaussian:
    def test_matches_output_entropy_at_dual_variance(self):
        # delta = 1/(4*0.5) = 0.5, so the two entropies coincide
        assert convex_closure_entropy_gaussian(0.5, 1.0) == pytest.approx(
            output_entropy_gaussian(0.5, 1.0), abs=1e-15
        )

    def test_generic_point(self):
        assert convex_closure_entropy_gaussian(0.651388, 1.0) == pytest.approx(
            1.5813536965703165, abs=1e-12
        )

    def test_sharp_limit_squeezed_entropy(self):
        assert convex_closure_entropy_gaussian(0.5, 0.0) == pytest.approx(
            1.0723649429247, abs=1e-12
        )

    def test_rejects_nonpositive_alpha_p(self):
        with pytest.raises(ValueError):
            convex_closure_entropy_gaussian(0.0, 1.0)


class TestAlphaConstrainedCapacity:
    def test_unit_covariance(self):
        cov = DiagonalCovariance(1.0, 1.0)
        value = alpha_constrained_capacity(cov, 1.0)
        assert value == pytest.approx(0.5 * math.log(2.0 / 1.25), abs=1e-15)
        oracle = output_entropy_gaussian(1.0, 1.0) - convex_closure_entropy_gaussian(1.0, 1.0)
        assert value == pytest.approx(oracle, abs=1e-14)

    @pytest.mark.parametrize("alpha_p,beta", [(0.5, 0.0), (0.7, 1.0), (2.0, 0.3)])
    def test_pure_squeezed_state_gives_zero(self, alpha_p, beta):
        cov = DiagonalCovariance(alpha_q=0.25 / alpha_p, alpha_p=alpha_p)
        assert alpha_constrained_capacity(cov, beta) == pytest.approx(0.0, abs=1e-14)

    def test_at_optimal_covariance_equals_capacity(self):
        _, cov = optimal_ensemble(1.0, 1.0)
        assert alpha_constrained_capacity(cov, 1.0) == pytest.approx(
            gaussian_capacity(1.0, 1.0), abs=1e-14
        )
        # six-digit rounded covariance stays within 1e-5
        rounded = DiagonalCovariance(alpha_q=1.348612, alpha_p=0.651388)
        assert alpha_constrained_capacity(rounded, 1.0) == pytest.approx(
            gaussian_capacity(1.0, 1.0), abs=1e-5
        )

    def test_entropy_difference_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            alpha_p = float(rng.uniform(0.1, 4.0))
            alpha_q = float(rng.uniform(0.25 / alpha_p, 6.0))
            beta = float(rng.uniform(0.0, 4.0))
            cov = DiagonalCovariance(alpha_q, alpha_p)
            diff = output_entropy_gaussian(alpha_q, beta) - convex_closure_entropy_gaussian(
                alpha_p, beta
            )
            assert alpha_constrained_capacity(cov, beta) == pytest.approx(diff, abs=1e-14)


class TestOptimalAlphaP:
    def test_quadratic_root(self):
        value = optimal_alpha_p(1.0, 1.0)
        assert value == pytest.approx(0.6513878188659973, abs=1e-14)
        # oracle: residual of 4 b a^2 + 2 a - (2E + b) = 0
        residual = 4.0 * value**2 + 2.0 * value - 3.0
        assert abs(residual) <= 1e-12 * 3.0

    def test_sharp_limit(self):
        assert optimal_alpha_p(1.0, 0.0) == 1.0

    def test_half_beta(self):
        value = optimal_alpha_p(1.0, 0.5)
        roots = np.roots([2.0, 2.0, -2.5])
        oracle = float(roots[roots > 0][0])
        assert value == pytest.approx(oracle, abs=1e-12)
        assert value == pytest.approx(0.724744871391589, abs=1e-12)

    @pytest.mark.parametrize("energy,beta", [(0.5, 0.1), (3.0, 2.0), (8.0, 4.0)])
    def test_residual_identity(self, energy, beta):
        value = optimal_alpha_p(energy, beta)
        residual = 4.0 * beta * value**2 + 2.0 * value - (2.0 * energy + beta)
        assert abs(residual) <= 1e-12 * (2.0 * energy + beta)

    def test_rejects_subvacuum_energy(self):
        with pytest.raises(ValueError):
            optimal_alpha_p(0.4, 1.0)


class TestGaussianCapacity:
    def test_sharp_measurement(self):
        assert gaussian_capacity(1.0, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_unit_point_against_grid_maximization(self):
        value = gaussian_capacity(1.0, 1.0)
        assert value == pytest.approx(0.26449709431570845, abs=1e-12)
        assert abs(value - bracket_max(1.0, 1.0)) <= 1e-6

    def test_energy_two(self):
        value = gaussian_capacity(2.0, 1.0)
        assert value == pytest.approx(math.log((math.sqrt(21.0) - 1.0) / 2.0), abs=1e-14)
        assert abs(value - bracket_max(2.0, 1.0)) <= 1e-6

    def test_rejects_subvacuum_energy(self):
        with pytest.raises(ValueError):
            gaussian_capacity(0.3, 1.0)


class TestHallUpperBound:
    def test_unit_point(self):
        bound = hall_upper_bound(1.0, 1.0)
        assert bound == pytest.approx(math.log(4.0 / 3.0), abs=1e-15)
        assert bound > gaussian_capacity(1.0, 1.0)

    def test_sharp_limit_coincides_with_capacity(self):
        assert hall_upper_bound(1.0, 0.0) == gaussian_capacity(1.0, 0.0)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 4.0])
    def test_vacuum_energy_gives_zero(self, beta):
        assert hall_upper_bound(0.5, beta) == pytest.approx(0.0, abs=1e-15)


class TestOptimalEnsemble:
    def test_unit_point_chain(self):
        params, cov = optimal_ensemble(1.0, 1.0)
        alpha_p = optimal_alpha_p(1.0, 1.0)
        assert cov.alpha_p == pytest.approx(alpha_p, abs=1e-15)
        assert cov.alpha_q == pytest.approx(2.0 - alpha_p, abs=1e-15)
        assert params.delta == pytest.approx(0.38379593962199915, abs=1e-14)
        assert params.gamma == pytest.approx(0.9648162415120034, abs=1e-14)

    def test_sharp_limit(self):
        params, _ = optimal_ensemble(1.0, 0.0)
        assert params.delta == pytest.approx(0.25, abs=1e-15)
        assert params.gamma == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 2.0])
    def test_vacuum_only_ensemble_at_minimal_energy(self, beta):
        params, cov = optimal_ensemble(0.5, beta)
        assert params.delta == pytest.approx(0.5, abs=1e-12)
        assert params.gamma == pytest.approx(0.0, abs=1e-12)
        assert cov.alpha_q * cov.alpha_p == pytest.approx(0.25, abs=1e-12)

    def test_parameter_relations_on_grid(self):
        for energy in np.linspace(0.5, 8.0, 7):
            for beta in np.linspace(0.0, 4.0, 5):
                params, cov = optimal_ensemble(float(energy), float(beta))
                assert params.delta + params.gamma == pytest.approx(cov.alpha_q, abs=1e-12)
                assert 0.25 / params.delta == pytest.approx(cov.alpha_p, rel=1e-12)
                assert cov.alpha_q + cov.alpha_p == pytest.approx(2.0 * energy, rel=1e-12)


class TestGridInvariants:
    ENERGIES = np.linspace(0.5, 8.0, 16)
    BETAS = np.linspace(0.0, 4.0, 9)

    def test_capacity_below_hall_bound(self):
        for energy in self.ENERGIES:
            for beta in self.BETAS:
                assert gaussian_capacity(energy, beta) <= hall_upper_bound(energy, beta) + 1e-12

    def test_equality_at_zero_noise(self):
        for energy in self.ENERGIES:
            assert gaussian_capacity(energy, 0.0) == hall_upper_bound(energy, 0.0)

    def test_monotone_in_energy_and_noise(self):
        for beta in self.BETAS:
            values = [gaussian_capacity(e, beta) for e in self.ENERGIES]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        for energy in self.ENERGIES:
            values = [gaussian_capacity(energy, b) for b in self.BETAS]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_matches_grid_maximization(self):
        for energy in (0.5, 1.0, 4.0, 8.0):
            for beta in (0.1, 1.0, 4.0):
                assert abs(gaussian_capacity(energy, beta) - bracket_max(energy, beta)) <= 1e-6

    @pytest.mark.parametrize("energy", [0.5, 1.0, 2.0, 8.0])
    def test_continuity_at_vanishing_noise(self, energy):
        assert abs(gaussian_capacity(energy, 1e-8) - math.log(2.0 * energy)) <= 1e-6
