"""Acceptance suite: every shipped criterion at its stated tolerance.

Each test prints one pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`
to see the lines as they complete.
"""

import json
import math
import time

import numpy as np
import pytest

from homodyne_lab.cli import main as cli_main
from homodyne_lab.ensemble_sim import (
    SimulationConfig,
    analytic_mutual_information,
    estimate_mutual_information,
    sample_channel,
)
from homodyne_lab.gaussian_core import gaussian_capacity, hall_upper_bound
from homodyne_lab.optimality_check import run_optimality_suite
from homodyne_lab.waveform_lab import gaussian_margin_uv, gaussian_margin_uv_du, run_logsob_suite


def _report(criterion: int, name: str, passed: bool, detail: str = "") -> None:
    print(f"[criterion {criterion}] {name}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, f"criterion {criterion} ({name}): {detail}"


@pytest.fixture(scope="module")
def logsob_suite():
    started = time.perf_counter()
    result = run_logsob_suite(
        seed=0,
        n_psi=200,
        t_values=(0.0, 0.25, 0.5, 1.0, 2.0),
        delta_values=(0.25, 0.5, 1.0, 2.0),
        grid_n=4096,
        half_width=20.0,
        fd_cases=50,
    )
    return result, time.perf_counter() - started


@pytest.fixture(scope="module")
def optimality_suite():
    started = time.perf_counter()
    report = run_optimality_suite(1.0, 1.0, seed=0, n_psi=500, n_mixed=100)
    return report, time.perf_counter() - started


def test_criterion_1_sharp_measurement_capacity(capsys, tmp_path):
    ok = True
    for energy in (0.5, 1.0, 2.0, 4.0):
        ok = ok and abs(gaussian_capacity(energy, 0.0) - math.log(2.0 * energy)) <= 1e-12
        out_path = tmp_path / f"cap_{energy}.json"
        code = cli_main(["capacity", "--energy", str(energy), "--beta", "0",
                         "--out", str(out_path)])
        record = json.loads(out_path.read_text())
        ok = ok and code == 0 and abs(record["capacity"] - math.log(2.0 * energy)) <= 1e-12
    calls = 1000
    started = time.perf_counter()
    for _ in range(calls):
        gaussian_capacity(1.7, 0.0)
    per_call = (time.perf_counter() - started) / calls
    ok = ok and per_call < 1e-3
    capsys.readouterr()
    _report(1, "sharp-measurement capacity ln 2E", ok, f"({per_call * 1e6:.2f} us/call)")


def test_criterion_2_closed_form_vs_grid_maximization():
    started = time.perf_counter()
    worst = 0.0
    alpha_fractions = np.linspace(1e-9, 1.0, 100_000)
    for energy in np.linspace(0.5, 8.0, 30):
        alpha = alpha_fractions * (2.0 * energy - 2e-9) + 1e-9
        for beta in np.linspace(0.1, 4.0, 30):
            bracket = 0.5 * (
                np.log(2.0 * energy - alpha + beta) - np.log(0.25 / alpha + beta)
            )
            worst = max(worst, abs(gaussian_capacity(float(energy), float(beta)) - bracket.max()))
    elapsed = time.perf_counter() - started
    _report(2, "closed form equals 1e5-point maximization on 30x30 grid",
            worst <= 1e-6 and elapsed < 5.0, f"(worst {worst:.2e}, {elapsed:.2f}s)")


def test_criterion_3_sweep_reproduction(capsys, tmp_path):
    started = time.perf_counter()
    out_path = tmp_path / "sweep.csv"
    code = cli_main(["sweep", "--beta", "1", "--energy-min", "0.5", "--energy-max", "8",
                     "--steps", "76", "--out", str(out_path)])
    rows = [
        [float(v) for v in line.split(",")]
        for line in out_path.read_text().strip().split("\n")[1:]
    ]
    capacities = [r[1] for r in rows]
    bounds = [r[2] for r in rows]
    ok = code == 0 and len(rows) == 76
    ok = ok and all(c <= b + 1e-12 for c, b in zip(capacities, bounds))
    ok = ok and all(b >= a for a, b in zip(capacities, capacities[1:]))
    ok = ok and all(b >= a for a, b in zip(bounds, bounds[1:]))
    gap = max(
        hall_upper_bound(float(e), 1e-6) - gaussian_capacity(float(e), 1e-6)
        for e in np.linspace(0.5, 8.0, 76)
    )
    ok = ok and gap <= 1e-4
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < 1.0
    capsys.readouterr()
    _report(3, "sweep: capacity below bound, monotone, vanishing gap",
            ok, f"(max small-noise gap {gap:.2e}, {elapsed:.2f}s)")


def test_criterion_4_logsob_suite(logsob_suite):
    result, elapsed = logsob_suite
    gap_violations = [v for v in result.violations if v.case_id.startswith(("gap", "monotone"))]
    ok = (
        not gap_violations
        and result.worst_gap <= 5e-4
        and result.worst_gaussian_equality <= 1e-4
        and result.n_cases == 200 * 5 * 4
        and elapsed < 60.0
    )
    _report(4, "flow functional nonpositive over 200 seeded wavefunctions",
            ok, f"(worst gap {result.worst_gap:.2e}, equality {result.worst_gaussian_equality:.2e}, {elapsed:.1f}s)")


def test_criterion_5_derivative_identity(logsob_suite):
    result, _ = logsob_suite
    ok = (
        result.worst_derivative <= 5e-4
        and result.fd_worst_rel_err <= 1e-3
        and not [v for v in result.violations if v.case_id.startswith(("derivative", "fd_"))]
    )
    _report(5, "closed-form flow derivative nonpositive and matches differences",
            ok, f"(worst {result.worst_derivative:.2e}, fd rel {result.fd_worst_rel_err:.2e})")


def test_criterion_6_scaled_margin_grid():
    started = time.perf_counter()
    uv = np.logspace(-2, 2, 200)
    u, v = np.meshgrid(uv, uv, indexing="ij")
    margin = gaussian_margin_uv(u, v)
    ok = float(margin.min()) >= 0.0
    ok = ok and float(np.max(np.abs(np.diag(margin)))) <= 1e-12
    rng = np.random.default_rng(6)
    worst_rel = 0.0
    for _ in range(200):
        uu = float(np.exp(rng.uniform(math.log(1e-2), math.log(1e2))))
        vv = float(np.exp(rng.uniform(math.log(1e-2), math.log(1e2))))
        h = max(1e-5 * uu, 1e-7)
        fd = (gaussian_margin_uv(uu + h, vv) - gaussian_margin_uv(uu - h, vv)) / (2.0 * h)
        exact = gaussian_margin_uv_du(uu, vv)
        if abs(exact) > 1e-8:
            worst_rel = max(worst_rel, abs(fd - exact) / abs(exact))
    elapsed = time.perf_counter() - started
    ok = ok and worst_rel <= 1e-6 and elapsed < 1.0
    _report(6, "two-parameter margin nonnegative with exact diagonal zeros",
            ok, f"(fd rel err {worst_rel:.2e}, {elapsed:.2f}s)")


def test_criterion_7_optimality_certificate(optimality_suite):
    report, elapsed = optimality_suite
    n_psi_margins = sum(1 for cid, _ in report.feasibility_margins if cid.startswith("psi"))
    n_mixed_margins = sum(1 for cid, _ in report.feasibility_margins if cid.startswith("mixed"))
    ok = (
        report.passed
        and len(report.slackness_residuals) >= 7
        and report.worst_residual <= 1e-5
        and n_psi_margins == 500
        and n_mixed_margins == 100
        and report.worst_margin >= -5e-4
        and report.dual_identity_error <= 1e-12
        and abs(report.dual_gap) <= 5e-4
        and elapsed < 120.0
    )
    _report(7, "optimality certificate at E=1, beta=1", ok,
            f"(residual {report.worst_residual:.2e}, margin {report.worst_margin:.2e}, "
            f"dual gap {report.dual_gap:.2e}, {elapsed:.1f}s)")


def test_criterion_8_negative_controls(capsys, tmp_path):
    perturbed = run_optimality_suite(1.0, 1.0, seed=0, n_psi=3, n_mixed=0, perturb_delta=1.2)
    ok = perturbed.worst_residual > 1e-2 and not perturbed.passed
    code = cli_main(["verify-logsob", "--n-psi", "3", "--fd-cases", "0", "--negate-rhs",
                     "--out", str(tmp_path / "neg.json")])
    ok = ok and code == 1
    capsys.readouterr()
    _report(8, "perturbed certificate and negated inequality are detected",
            ok, f"(perturbed residual {perturbed.worst_residual:.2e}, negate-rhs exit {code})")


def test_criterion_9_monte_carlo():
    started = time.perf_counter()
    analytic = analytic_mutual_information(1.0, 1.0)
    ok = abs(analytic - gaussian_capacity(1.0, 1.0)) <= 1e-12
    samples = sample_channel(SimulationConfig(1.0, 1.0, 1_000_000, seed=7))
    z_scores = {}
    for estimator in ("gaussian-mle", "histogram-plugin"):
        estimate, se = estimate_mutual_information(samples, estimator)
        z_scores[estimator] = (estimate - analytic) / se
        ok = ok and abs(estimate - analytic) <= 3.0 * se
    coverage = {"gaussian-mle": 0, "histogram-plugin": 0}
    for k in range(100):
        run = sample_channel(SimulationConfig(1.0, 1.0, 100_000, seed=1000 + k))
        for estimator in coverage:
            estimate, se = estimate_mutual_information(run, estimator)
            coverage[estimator] += abs(estimate - analytic) <= 3.0 * se
    ok = ok and all(hits >= 99 for hits in coverage.values())
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < 30.0
    _report(9, "Monte-Carlo estimates reproduce the closed-form capacity", ok,
            f"(z mle {z_scores['gaussian-mle']:+.2f}, z hist {z_scores['histogram-plugin']:+.2f}, "
            f"coverage {coverage['gaussian-mle']}/{coverage['histogram-plugin']} of 100, {elapsed:.1f}s)")


def test_criterion_10_determinism(capsys, tmp_path):
    ok = True
    jobs = {
        "sweep": ["sweep", "--beta", "1", "--steps", "30"],
        "verify": ["verify-logsob", "--n-psi", "3", "--fd-cases", "2", "--seed", "11"],
        "simulate": ["simulate", "--energy", "1", "--beta", "1", "--samples", "20000",
                     "--seed", "11"],
    }
    for name, args in jobs.items():
        paths = [tmp_path / f"{name}_{i}.out" for i in (0, 1)]
        for path in paths:
            cli_main(args + ["--out", str(path)])
        ok = ok and paths[0].read_bytes() == paths[1].read_bytes()
    capsys.readouterr()
    _report(10, "identical seeds produce byte-identical reports", ok)
