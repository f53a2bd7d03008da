"""Capacity of the noisy position measurement: closed forms, grid verification,
optimality certificates, and Monte-Carlo simulation."""

from .gaussian_core import (
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
from .waveform_lab import (
    GridDensity,
    GridSpec,
    GridWaveFunction,
    WaveFunctionSpec,
    density_from_wavefunction,
    differential_entropy,
    dirichlet_energy,
    gaussian_gap_closed_form,
    gaussian_margin_uv,
    gaussian_margin_uv_du,
    generate_test_wavefunction,
    heat_semigroup,
    lieb_gap,
    logsobolev_gap,
    logsobolev_gap_derivative,
    output_entropy,
    output_entropy_dirichlet_bound,
    smeared_output_density,
    sqrt_density_energy,
)
from .optimality_check import (
    GridOperator,
    OptimalityReport,
    apply_operator,
    dual_certificate_operator,
    dual_feasibility_margin,
    dual_feasibility_margin_mixed,
    dual_value,
    measurement_kernel_closed_form,
    measurement_kernel_numeric,
    operator_expectation,
    slackness_residual,
)
from .ensemble_sim import (
    ChannelSamples,
    EncodingSample,
    SimulationConfig,
    analytic_mutual_information,
    estimate_mutual_information,
    sample_channel,
    verify_average_output_entropy,
)

__version__ = "0.1.0"
