"""
Desk-scale consistency checks across the package: Monte Carlo against the
closed forms, closed forms against the master-equation integrator, and the
noise budget against the published Kane-architecture numbers.

Checks run in reduced units with omega = 1 rad/s. ``fault`` scales kappa in
the analytic path only, which must make the suite fail.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from pykanenoise import analytic, budget
from pykanenoise.engine import fit_decay_rate, run_ensemble
from pykanenoise.errors import PlanError
from pykanenoise.master_equation import integrate_averaged_master_equation
from pykanenoise.model import (
    DeviceParameters,
    EvolutionMode,
    PolarizationVector,
    RotationSolutionParams,
    SimPlan,
)
from pykanenoise.output import max_deviation_in_stderr, quantity

logger = logging.getLogger("pykanenoise")

# published noise-budget numbers at the Kane operating point, delta = 1e-5
PUBLISHED_RATIO_BOUND = 2e-5
PUBLISHED_PULSE_AREA_BOUND = 1.4e-6

DESK_KAPPA = 1.0
REGISTER_CHECK_STATE = PolarizationVector(x=1.0)
ODE_KAPPA_RATIOS = (1e-6, 1e-3, 0.1, 1.0, 3.0, 10.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: Dict[str, object] = field(default_factory=dict)

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class ValidationSettings:
    """kappa is the register-check dephasing rate in 1/s and must be positive"""

    kappa: float = DESK_KAPPA
    n_traj: int = 10_000
    seed: int = 0
    workers: int = 1
    fault: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise PlanError(f"validation needs a positive dephasing rate, got {self.kappa}")
        if self.n_traj < 2:
            raise PlanError("validation needs at least two trajectories")


def check_register_mc(settings: ValidationSettings) -> CheckResult:
    """Register trajectories: fitted coherence decay rate against 2 kappa, P_z conserved."""
    p0 = REGISTER_CHECK_STATE
    n_steps = 400
    # 2 kappa t_final = 4
    dt = 2.0 / (settings.kappa * n_steps)
    plan = SimPlan(
        kappa=settings.kappa,
        dt=dt,
        n_steps=n_steps,
        n_traj=settings.n_traj,
        seed=settings.seed,
        p0=p0,
        workers=settings.workers,
    )
    ensemble = run_ensemble(plan, EvolutionMode.register)
    analytic_kappa = settings.kappa * settings.fault
    pz_drift = float(np.max(np.abs(ensemble.mean_p[:, 2] - p0.z)))
    detail = {"max_pz_drift": quantity(pz_drift, "1")}
    rate = fit_decay_rate(ensemble.times, ensemble.mean_p[:, 0], ensemble.stderr_p[:, 0])
    expected_rate = 2.0 * analytic_kappa
    ratio = None if rate is None else rate / expected_rate
    detail.update(
        {
            "fitted_decay_rate": quantity(rate, "1/s"),
            "expected_decay_rate": quantity(expected_rate, "1/s"),
            "rate_ratio": quantity(ratio, "1"),
        }
    )
    passed = ratio is not None and abs(ratio - 1.0) <= 0.05 and pz_drift < 1e-12
    return CheckResult("register_mc", passed, detail)


def check_rotation_ode(settings: ValidationSettings) -> CheckResult:
    """Exact driven solution against the integrated master equation over t in [0, 5/omega]."""
    omega = 1.0
    ratios = ODE_KAPPA_RATIOS
    p0 = PolarizationVector(x=0.6, y=0.0, z=0.8)
    times = np.linspace(0.0, 5.0 / omega, 101)
    worst = 0.0
    for ratio in ratios:
        kappa = ratio * omega
        params = RotationSolutionParams(kappa=kappa * settings.fault, omega_rabi=omega)
        closed = analytic.rotation_curve_exact(p0, params, times)
        reference = integrate_averaged_master_equation(p0, kappa, omega, times)
        worst = max(worst, float(np.max(np.abs(closed - reference))))
    return CheckResult(
        "rotation_ode", worst < 1e-8, {"max_abs_error": quantity(worst, "1")}
    )


def check_rotation_mc(settings: ValidationSettings) -> CheckResult:
    """Driven trajectories at kappa / omega = 1e-2 against the exact solution."""
    omega = 1.0
    kappa = 1e-2 * omega
    p0 = PolarizationVector.from_array(np.ones(3) / np.sqrt(3.0))
    plan = SimPlan(
        kappa=kappa,
        omega_rabi=omega,
        dt=0.01 / omega,
        n_steps=628,
        n_traj=settings.n_traj,
        seed=settings.seed,
        p0=p0,
        workers=settings.workers,
    )
    ensemble = run_ensemble(plan, EvolutionMode.rotation).decimate(10)
    params = RotationSolutionParams(kappa=kappa * settings.fault, omega_rabi=omega)
    exact = analytic.rotation_curve_exact(p0, params, ensemble.times)
    z = max_deviation_in_stderr(ensemble.mean_p - exact, ensemble.stderr_p)
    return CheckResult(
        "rotation_mc",
        z is not None and z < 4.0,
        {"max_deviation_stderr": quantity(z, "stderr")},
    )


def check_budget_regression(settings: ValidationSettings) -> CheckResult:
    """Kane operating point at delta = 1e-5 against the published bounds."""
    result = budget.compute_budget(DeviceParameters.kane_defaults(), 1e-5)
    ratio_error = abs(result.ratio_bound / PUBLISHED_RATIO_BOUND - 1.0)
    area_error = abs(result.pulse_area_ratio_max / PUBLISHED_PULSE_AREA_BOUND - 1.0)
    return CheckResult(
        "budget_regression",
        ratio_error < 0.01 and area_error < 0.05,
        {
            "ratio_bound": quantity(result.ratio_bound, "1"),
            "pulse_area_ratio_max": quantity(result.pulse_area_ratio_max, "1"),
        },
    )


def check_approximation_regime(settings: ValidationSettings) -> CheckResult:
    """At tau_op / tau_dec = 2e-5 the zeroth-order solution matches the exact one to 1e-4."""
    omega = 1.0
    # tau_op / tau_dec = pi kappa / omega
    kappa = PUBLISHED_RATIO_BOUND * omega / np.pi
    tau_op = np.pi / (2.0 * omega)
    times = np.linspace(0.0, tau_op, 201)
    worst = 0.0
    for p0 in (
        PolarizationVector(x=1.0),
        PolarizationVector(y=1.0),
        PolarizationVector(z=1.0),
    ):
        exact = analytic.rotation_curve_exact(
            p0, RotationSolutionParams(kappa=kappa, omega_rabi=omega), times
        )
        approx = analytic.rotation_curve_approx(p0, kappa, omega, times)
        worst = max(worst, float(np.max(np.abs(exact - approx))))
    return CheckResult(
        "approximation_regime", worst < 1e-4, {"max_abs_difference": quantity(worst, "1")}
    )


def check_worst_case_equivalence(settings: ValidationSettings) -> CheckResult:
    """A sigma^y eigenstate under rotation loses fidelity exactly like the register worst case."""
    times = np.linspace(0.0, 5.0, 51)
    kappa = settings.kappa
    rotation = analytic.rotation_fidelity(PolarizationVector(y=1.0), kappa, times)
    register = analytic.worst_case_register_fidelity(kappa, times)
    worst = float(np.max(np.abs(rotation - register)))
    return CheckResult(
        "worst_case_equivalence", worst < 1e-12, {"max_abs_difference": quantity(worst, "1")}
    )


CHECKS = (
    check_register_mc,
    check_rotation_ode,
    check_rotation_mc,
    check_budget_regression,
    check_approximation_regime,
    check_worst_case_equivalence,
)


def run_validation(settings: ValidationSettings) -> List[CheckResult]:
    results = []
    for check in CHECKS:
        result = check(settings)
        if result.passed:
            logger.info(f"check {result.name} passed")
        else:
            logger.error(f"check {result.name} failed: {result.detail}")
        results.append(result)
    return results
