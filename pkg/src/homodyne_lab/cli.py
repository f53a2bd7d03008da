"""Command-line surface: capacity queries, sweeps, verification suites, simulation.

Exit codes: 0 all checks pass, 1 at least one mathematical check violated,
2 usage or configuration error.  Reports are deterministic for a fixed seed:
the wall_time_s field in written reports is always null (timing goes to
stderr), so identical runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Any

from . import ensemble_sim, gaussian_core, optimality_check, waveform_lab
from .reporting import dump_json, format_float

SEED_ENV_VAR = "HOMODYNE_LAB_SEED"

SWEEP_HEADER = "E,capacity_nats,upper_bound_nats,alpha_p,alpha_q,delta,gamma"


@dataclass
class RunConfig:
    """Resolved options for one invocation: flags > config file > defaults."""

    subcommand: str
    options: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.options[key]


@dataclass
class VerificationReport:
    """Machine-readable verification outcome; pass iff the violation list is empty.

    wall_time_s is always None in serialized reports so identical runs are
    byte-identical; measured timing is printed to stderr instead.
    """

    suite: str
    params: dict[str, Any]
    n_cases: int
    worst_margin: float
    violations: list
    details: dict[str, Any]

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "params": self.params,
            "n_cases": self.n_cases,
            "worst_margin": self.worst_margin,
            "violations": [v.as_dict() for v in self.violations],
            "pass": self.passed,
            "wall_time_s": None,
            "details": self.details,
        }


_DEFAULTS: dict[str, dict[str, Any]] = {
    "capacity": {"energy": None, "beta": None, "format": "json", "unit": "nats", "out": None},
    "sweep": {
        "beta": None, "energy_min": 0.5, "energy_max": 8.0, "steps": 76, "out": None,
    },
    "verify-logsob": {
        "seed": None, "n_psi": 200, "t_values": "0,0.25,0.5,1,2",
        "delta_values": "0.25,0.5,1,2", "grid_n": 4096, "grid_half_width": 20.0,
        "tol_logsob": 5e-4, "tol_equality": 1e-4, "tol_derivative": 5e-4,
        "fd_cases": 50, "negate_rhs": False, "workers": 0, "out": None,
    },
    "verify-optimality": {
        "energy": 1.0, "beta": 1.0, "seed": None, "n_psi": 500, "n_mixed": 100,
        "grid_n": 4096, "grid_half_width": 20.0, "tol_ii": 1e-5, "tol_i": 5e-4,
        "perturb_delta": 1.0, "workers": 0, "out": None,
    },
    "simulate": {
        "energy": None, "beta": None, "samples": 100_000, "seed": None,
        "estimator": "gaussian-mle", "format": "json", "unit": "nats", "out": None,
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homodyne-lab",
        description="Capacity and optimality toolkit for the noisy position measurement",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None,
                       help="JSON file with option defaults (flags take precedence)")
        p.add_argument("--out", type=str, default=None, help="write output to this path")

    p = sub.add_parser("capacity", help="closed-form capacity and optimal encoding")
    p.add_argument("--energy", type=float, default=None, help="mean oscillator energy E >= 0.5")
    p.add_argument("--beta", type=float, default=None, help="measurement noise power >= 0")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--unit", choices=("nats", "bits"), default=None)
    common(p)

    p = sub.add_parser("sweep", help="capacity and upper bound over an energy range (CSV)")
    p.add_argument("--beta", type=float, default=None, required=False)
    p.add_argument("--energy-min", type=float, default=None)
    p.add_argument("--energy-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    common(p)

    p = sub.add_parser("verify-logsob", help="flow-functional nonpositivity suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-psi", type=int, default=None)
    p.add_argument("--t-values", type=str, default=None, help="comma-separated times")
    p.add_argument("--delta-values", type=str, default=None)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--grid-half-width", type=float, default=None)
    p.add_argument("--tol-logsob", type=float, default=None)
    p.add_argument("--tol-equality", type=float, default=None)
    p.add_argument("--tol-derivative", type=float, default=None)
    p.add_argument("--fd-cases", type=int, default=None)
    p.add_argument("--negate-rhs", action="store_true", default=None,
                   help="self-test hook: flip the inequality and expect failures")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: available parallelism)")
    common(p)

    p = sub.add_parser("verify-optimality", help="optimality certificate suite")
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-psi", type=int, default=None)
    p.add_argument("--n-mixed", type=int, default=None)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--grid-half-width", type=float, default=None)
    p.add_argument("--tol-ii", type=float, default=None, help="slackness residual tolerance")
    p.add_argument("--tol-i", type=float, default=None, help="feasibility margin tolerance")
    p.add_argument("--perturb-delta", type=float, default=None,
                   help="negative control: scale the ensemble squeezing by this factor")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: available parallelism)")
    common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo mutual-information estimate")
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--estimator", choices=ensemble_sim.ESTIMATORS, default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--unit", choices=("nats", "bits"), default=None)
    common(p)

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    subcommand = args.subcommand
    options = dict(_DEFAULTS[subcommand])
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as handle:
            loaded = json.load(handle)
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key in options:
                options[key] = value
    for key in options:
        flag = getattr(args, key, None)
        if flag is not None:
            options[key] = flag
    if "seed" in options and options["seed"] is None:
        options["seed"] = int(os.environ.get(SEED_ENV_VAR, "0"))
    if options.get("workers") == 0:  # 0 means "available parallelism"
        options["workers"] = os.cpu_count() or 1
    return RunConfig(subcommand=subcommand, options=options)


def _parse_grid_values(text: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in str(text).split(",") if str(v).strip())
    if not values:
        raise ValueError("empty value list")
    return values


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _unit_scale(unit: str) -> float:
    return 1.0 / math.log(2.0) if unit == "bits" else 1.0


def _capacity_record(energy: float, beta: float, unit: str) -> dict[str, float | str]:
    params, cov = gaussian_core.optimal_ensemble(energy, beta)
    scale = _unit_scale(unit)
    return {
        "E": energy,
        "beta": beta,
        "capacity": gaussian_core.gaussian_capacity(energy, beta) * scale,
        "upper_bound": gaussian_core.hall_upper_bound(energy, beta) * scale,
        "alpha_q": cov.alpha_q,
        "alpha_p": cov.alpha_p,
        "delta": params.delta,
        "gamma": params.gamma,
        "unit": unit,
    }


def cmd_capacity(config: RunConfig) -> int:
    energy, beta = config["energy"], config["beta"]
    record = _capacity_record(energy, beta, config["unit"])
    if config["format"] == "csv":
        keys = ["E", "beta", "capacity", "upper_bound", "alpha_q", "alpha_p", "delta", "gamma"]
        text = ",".join(keys) + "\n" + ",".join(format_float(float(record[k])) for k in keys) + "\n"
    else:
        text = dump_json(record)
    _write_output(text, config["out"])
    return 0


def cmd_sweep(config: RunConfig) -> int:
    beta = config["beta"]
    energies = [
        config["energy_min"]
        + i * (config["energy_max"] - config["energy_min"]) / (config["steps"] - 1)
        for i in range(config["steps"])
    ]
    lines = [SWEEP_HEADER]
    for energy in energies:
        params, cov = gaussian_core.optimal_ensemble(energy, beta)
        row = [
            energy,
            gaussian_core.gaussian_capacity(energy, beta),
            gaussian_core.hall_upper_bound(energy, beta),
            cov.alpha_p,
            cov.alpha_q,
            params.delta,
            params.gamma,
        ]
        lines.append(",".join(format_float(v) for v in row))
    _write_output("\n".join(lines) + "\n", config["out"])
    return 0


def _verification_report(
    suite: str,
    config: RunConfig,
    n_cases: int,
    worst_margin: float,
    violations,
    details: dict[str, Any],
) -> VerificationReport:
    params = {k: v for k, v in sorted(config.options.items()) if k != "out"}
    return VerificationReport(
        suite=suite,
        params=params,
        n_cases=n_cases,
        worst_margin=worst_margin,
        violations=list(violations),
        details=details,
    )


def cmd_verify_logsob(config: RunConfig) -> int:
    t_values = _parse_grid_values(config["t_values"])
    delta_values = _parse_grid_values(config["delta_values"])
    if config["n_psi"] < 1 or config["fd_cases"] < 0:
        raise ValueError("n_psi must be >= 1 and fd_cases >= 0")
    started = time.perf_counter()
    result = waveform_lab.run_logsob_suite(
        seed=config["seed"],
        n_psi=config["n_psi"],
        t_values=t_values,
        delta_values=delta_values,
        grid_n=config["grid_n"],
        half_width=config["grid_half_width"],
        tol_gap=config["tol_logsob"],
        tol_equality=config["tol_equality"],
        tol_derivative=config["tol_derivative"],
        fd_cases=config["fd_cases"],
        negate_rhs=bool(config["negate_rhs"]),
        workers=config["workers"],
    )
    elapsed = time.perf_counter() - started
    report = _verification_report(
        "verify-logsob", config, result.n_cases, result.worst_gap, result.violations,
        details={
            "worst_gap": result.worst_gap,
            "worst_derivative": result.worst_derivative,
            "worst_gaussian_equality": result.worst_gaussian_equality,
            "uv_margin_min": result.uv_margin_min,
            "uv_diagonal_max_abs": result.uv_diagonal_max_abs,
            "fd_worst_rel_err": result.fd_worst_rel_err,
        },
    )
    _write_output(dump_json(report.as_dict()), config["out"])
    print(f"verify-logsob: {'pass' if result.passed else 'FAIL'} "
          f"({result.n_cases} cases, {elapsed:.1f}s)", file=sys.stderr)
    return 0 if result.passed else 1


def cmd_verify_optimality(config: RunConfig) -> int:
    if config["energy"] < 0.5 or config["beta"] < 0:
        raise ValueError("need energy >= 0.5 and beta >= 0")
    started = time.perf_counter()
    report_data = optimality_check.run_optimality_suite(
        energy=config["energy"],
        beta=config["beta"],
        seed=config["seed"],
        n_psi=config["n_psi"],
        n_mixed=config["n_mixed"],
        grid_n=config["grid_n"],
        half_width=config["grid_half_width"],
        tol_slackness=config["tol_ii"],
        tol_feasibility=config["tol_i"],
        perturb_delta=config["perturb_delta"],
        workers=config["workers"],
    )
    elapsed = time.perf_counter() - started
    n_cases = len(report_data.slackness_residuals) + len(report_data.feasibility_margins)
    worst = max(report_data.worst_residual, -report_data.worst_margin)
    report = _verification_report(
        "verify-optimality", config, n_cases, worst, report_data.violations,
        details={
            "worst_slackness_residual": report_data.worst_residual,
            "worst_feasibility_margin": report_data.worst_margin,
            "dual_value": report_data.dual_value,
            "dual_gap": report_data.dual_gap,
            "dual_identity_error": report_data.dual_identity_error,
            "slackness_residuals": [
                {"x": x, "residual": r} for x, r in report_data.slackness_residuals
            ],
        },
    )
    _write_output(dump_json(report.as_dict()), config["out"])
    print(f"verify-optimality: {'pass' if report_data.passed else 'FAIL'} "
          f"({n_cases} cases, {elapsed:.1f}s)", file=sys.stderr)
    return 0 if report_data.passed else 1


def cmd_simulate(config: RunConfig) -> int:
    sim_config = ensemble_sim.SimulationConfig(
        energy=config["energy"],
        beta=config["beta"],
        n_samples=config["samples"],
        seed=config["seed"],
        estimator=config["estimator"],
    )
    if sim_config.n_samples < 10_000:
        raise ValueError("need at least 10000 samples for the shipped estimators")
    result = ensemble_sim.run_simulation(sim_config)
    scale = _unit_scale(config["unit"])
    record = {
        "E": config["energy"],
        "beta": config["beta"],
        "samples": config["samples"],
        "seed": config["seed"],
        "estimator": config["estimator"],
        "estimate": result.estimate * scale,
        "standard_error": result.standard_error * scale,
        "analytic": result.analytic * scale,
        "z_score": result.z_score,
        "unit": config["unit"],
    }
    if config["format"] == "csv":
        keys = ["E", "beta", "samples", "seed", "estimator",
                "estimate", "standard_error", "analytic", "z_score"]
        values = [
            format_float(record[k]) if isinstance(record[k], float) else str(record[k])
            for k in keys
        ]
        text = ",".join(keys) + "\n" + ",".join(values) + "\n"
    else:
        text = dump_json(record)
    _write_output(text, config["out"])
    return 0 if abs(result.z_score) <= 5.0 else 1


def _validate(config: RunConfig) -> None:
    options = config.options
    if config.subcommand in ("capacity", "simulate"):
        if options["energy"] is None or options["beta"] is None:
            raise ValueError("--energy and --beta are required")
        if options["energy"] < gaussian_core.VACUUM_ENERGY:
            raise ValueError(f"E below vacuum energy {gaussian_core.VACUUM_ENERGY}")
        if options["beta"] < 0:
            raise ValueError("beta must be >= 0")
    if config.subcommand == "sweep":
        if options["beta"] is None:
            raise ValueError("--beta is required")
        if options["beta"] < 0:
            raise ValueError("beta must be >= 0")
        if options["energy_min"] < 0.5:
            raise ValueError("energy range must start at or above 0.5")
        if options["steps"] < 2:
            raise ValueError("steps must be >= 2")
        if not options["energy_max"] > options["energy_min"]:
            raise ValueError("energy-max must exceed energy-min")
    if "workers" in options and options["workers"] is not None and options["workers"] < 1:
        raise ValueError("workers must be >= 1")


_COMMANDS = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "verify-logsob": cmd_verify_logsob,
    "verify-optimality": cmd_verify_optimality,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve(args)
        _validate(config)
        return _COMMANDS[config.subcommand](config)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
