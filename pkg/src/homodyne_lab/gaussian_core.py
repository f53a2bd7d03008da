"""Closed-form capacities and optimal encodings for the noisy position measurement.

The channel measures the position quadrature q of a single bosonic mode with
additive Gaussian noise of variance beta (beta = 0 is the sharp measurement).
Inputs are constrained by the mean oscillator energy E of the ensemble average
state, H = (q^2 + p^2)/2.  All information quantities are in nats; quadratures
are dimensionless (hbar = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HALF_LN_2PIE = 0.5 * math.log(2.0 * math.pi * math.e)

#: Minimal mean energy of a physical single-mode state (vacuum).
VACUUM_ENERGY = 0.5


@dataclass(frozen=True)
class Channel:
    """Approximate position measurement with Gaussian noise power ``beta``."""

    beta: float

    def __post_init__(self) -> None:
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @property
    def is_sharp(self) -> bool:
        return self.beta == 0.0


@dataclass(frozen=True)
class OscillatorConstraint:
    """Mean oscillator energy bound E for H = (q^2 + p^2)/2."""

    energy: float

    def __post_init__(self) -> None:
        if not self.energy >= VACUUM_ENERGY:
            raise ValueError(
                f"energy must be >= vacuum energy {VACUUM_ENERGY}, got {self.energy}"
            )


@dataclass(frozen=True)
class DiagonalCovariance:
    """Second moments (alpha_q, alpha_p) of a centered single-mode state.

    Valid covariances satisfy the uncertainty bound alpha_q * alpha_p >= 1/4.
    """

    alpha_q: float
    alpha_p: float

    def __post_init__(self) -> None:
        if not (self.alpha_q > 0.0 and self.alpha_p > 0.0):
            raise ValueError("alpha_q and alpha_p must be positive")
        # 1e-12 slack absorbs rounding at the pure-state boundary
        if self.alpha_q * self.alpha_p < 0.25 - 1e-12:
            raise ValueError(
                f"uncertainty bound violated: alpha_q*alpha_p = "
                f"{self.alpha_q * self.alpha_p} < 1/4"
            )

    @property
    def energy(self) -> float:
        return 0.5 * (self.alpha_q + self.alpha_p)


@dataclass(frozen=True)
class GaussianEnsembleParams:
    """Squeezing delta and displacement variance gamma of a Gaussian encoding.

    The encoding sends squeezed states of position variance delta, displaced
    by x with x drawn from N(0, gamma).  Against a target covariance it must
    satisfy delta = 1/(4 alpha_p) and delta + gamma = alpha_q.
    """

    delta: float
    gamma: float

    def __post_init__(self) -> None:
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if not self.gamma >= 0.0:
            raise ValueError("gamma must be nonnegative")


def _check_energy(energy: float) -> None:
    if not energy >= VACUUM_ENERGY:
        raise ValueError(
            f"energy must be >= vacuum energy {VACUUM_ENERGY}, got {energy}"
        )


def _check_beta(beta: float) -> None:
    if not beta >= 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")


def output_entropy_gaussian(alpha_q: float, beta: float) -> float:
    """Output differential entropy of a centered Gaussian state, in nats.

    The outcome density is N(0, alpha_q + beta), so the entropy is
    (1/2) ln(alpha_q + beta) + (1/2) ln(2 pi e).
    """
    if not alpha_q > 0.0:
        raise ValueError(f"alpha_q must be positive, got {alpha_q}")
    _check_beta(beta)
    if alpha_q + beta <= 0.0:
        raise ValueError("alpha_q + beta must be positive")
    return 0.5 * math.log(alpha_q + beta) + HALF_LN_2PIE


def convex_closure_entropy_gaussian(alpha_p: float, beta: float) -> float:
    """Minimal average output entropy over encodings with momentum moment alpha_p.

    Attained by squeezed states of position variance delta = 1/(4 alpha_p):
    (1/2) ln(1/(4 alpha_p) + beta) + (1/2) ln(2 pi e).
    """
    if not alpha_p > 0.0:
        raise ValueError(f"alpha_p must be positive, got {alpha_p}")
    _check_beta(beta)
    return 0.5 * math.log(0.25 / alpha_p + beta) + HALF_LN_2PIE


def alpha_constrained_capacity(cov: DiagonalCovariance, beta: float) -> float:
    """Capacity over encodings whose average state has the given covariance.

    Equals output_entropy_gaussian - convex_closure_entropy_gaussian, i.e.
    (1/2) ln[(alpha_q + beta) / (1/(4 alpha_p) + beta)].
    """
    _check_beta(beta)
    denom = 0.25 / cov.alpha_p + beta
    if denom <= 0.0:
        raise ValueError("1/(4 alpha_p) + beta must be positive")
    return 0.5 * math.log((cov.alpha_q + beta) / denom)


def optimal_alpha_p(energy: float, beta: float) -> float:
    """Momentum second moment maximizing the capacity at energy E.

    Positive root of 4 beta a^2 + 2 a - (2E + beta) = 0, evaluated in the
    cancellation-free form (2E + beta) / (1 + sqrt(1 + 8 E beta + 4 beta^2));
    the beta = 0 limit is E.
    """
    _check_energy(energy)
    _check_beta(beta)
    if beta == 0.0:
        return energy
    return (2.0 * energy + beta) / (1.0 + math.sqrt(1.0 + 8.0 * energy * beta + 4.0 * beta * beta))


def gaussian_capacity(energy: float, beta: float) -> float:
    """Capacity of the Gaussian encoding under the oscillator energy bound.

    ln[(sqrt(1 + 8 E beta + 4 beta^2) - 1) / (2 beta)] for beta > 0 and
    ln(2E) in the sharp limit beta = 0.  Coincides with the full classical
    capacity of the channel.
    """
    _check_energy(energy)
    _check_beta(beta)
    if beta == 0.0:
        return math.log(2.0 * energy)
    return math.log(2.0 * optimal_alpha_p(energy, beta))


def hall_upper_bound(energy: float, beta: float) -> float:
    """Prior-art capacity upper bound ln(2(E + beta) / (1 + 2 beta))."""
    _check_energy(energy)
    _check_beta(beta)
    return math.log(2.0 * (energy + beta) / (1.0 + 2.0 * beta))


def optimal_ensemble(
    energy: float, beta: float
) -> tuple[GaussianEnsembleParams, DiagonalCovariance]:
    """Parameters of the capacity-achieving encoding and its average covariance.

    The energy constraint is saturated: alpha_q = 2E - alpha_p, so the trace
    of the covariance equals 2E.  Returns (delta, gamma) with
    delta = 1/(4 alpha_p) and gamma = alpha_q - delta.
    """
    alpha_p = optimal_alpha_p(energy, beta)
    alpha_q = 2.0 * energy - alpha_p
    delta = 0.25 / alpha_p
    gamma = alpha_q - delta
    if gamma < -1e-12:
        raise AssertionError(
            f"negative displacement variance gamma={gamma} at E={energy}, beta={beta}"
        )
    gamma = max(gamma, 0.0)
    return (
        GaussianEnsembleParams(delta=delta, gamma=gamma),
        DiagonalCovariance(alpha_q=alpha_q, alpha_p=alpha_p),
    )


def nats_to_bits(value: float) -> float:
    return value / math.log(2.0)
