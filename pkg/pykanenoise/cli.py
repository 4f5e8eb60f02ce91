"""
Command-line entry point, ``pykanenoise``.

Each subcommand has a library counterpart (``cmd_*``) that takes a validated
:class:`~pykanenoise.model.RunConfig`, writes its files under
``config.output.out_dir`` and returns the JSON summary it wrote.
"""
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence

import click
import numpy as np

from pykanenoise import __version__, analytic, budget, device
from pykanenoise.config import apply_overrides, dump_config, load_config, plan_from_config
from pykanenoise.engine import fit_decay_rate, run_ensemble
from pykanenoise.errors import KaneNoiseError
from pykanenoise.model import EvolutionMode, RotationSolutionParams, RunConfig, SimPlan
from pykanenoise.output import (
    budget_to_json,
    device_to_json,
    max_deviation_in_stderr,
    quantity,
    to_json,
    write_csv,
    write_json,
)
from pykanenoise.validation import DESK_KAPPA, ValidationSettings, run_validation

logger = logging.getLogger("pykanenoise")

EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
VALIDATION_TRAJECTORIES = 10_000
FAULT_SCALE = 1.1


def _plan_summary(plan: SimPlan, config: RunConfig) -> Dict[str, object]:
    noise = config.noise_spec()
    return {
        "kappa": quantity(plan.kappa, "1/s"),
        "omega_rabi": quantity(plan.omega_rabi, "rad/s"),
        "dt": quantity(plan.dt, "s"),
        "n_steps": quantity(plan.n_steps, "count"),
        "n_traj": quantity(plan.n_traj, "count"),
        "seed": quantity(plan.seed, "count"),
        "epsilon": quantity(noise.epsilon, "(J/T)^2 s"),
        "lambda": quantity(noise.lambda_, "s"),
    }


def _write_hdf5(config: RunConfig, name: str, ensemble, plan: SimPlan):
    if not config.output.hdf5:
        return
    # h5py is an optional extra
    from pykanenoise.hdf5.ensemble_store import write_ensemble

    write_ensemble(Path(config.output.out_dir) / name, ensemble, plan)


def cmd_register_decay(config: RunConfig) -> Dict[str, object]:
    """Register-qubit dephasing: Monte Carlo against the closed form.

    Writes ``register_decay.csv`` and ``register_decay.json`` into the output
    directory.

    Parameters
    ----------
    config : RunConfig
        Validated run configuration.

    Returns
    -------
    dict
        The JSON summary.
    """
    plan = plan_from_config(config, EvolutionMode.register)
    ensemble = run_ensemble(
        plan, EvolutionMode.register, config.simulation.max_samples
    )
    _write_hdf5(config, "register_decay.h5", ensemble, plan)
    ensemble = ensemble.decimate(config.output.stride)
    times = ensemble.times
    exact = analytic.register_curve(plan.p0, plan.kappa, times)
    worst = analytic.worst_case_register_fidelity(plan.kappa, times)

    out_dir = Path(config.output.out_dir)
    write_csv(
        out_dir / "register_decay.csv",
        [
            "t",
            "Px_mc",
            "Py_mc",
            "Pz_mc",
            "stderr_x",
            "stderr_y",
            "stderr_z",
            "Px_analytic",
            "Py_analytic",
            "Pz_analytic",
            "worst_case_fidelity",
        ],
        [times, *ensemble.mean_p.T, *ensemble.stderr_p.T, *exact.T, worst],
    )

    expected = 2.0 * plan.kappa
    fitted = None
    if plan.kappa > 0:
        fitted = fit_decay_rate(times, ensemble.mean_p[:, 0], ensemble.stderr_p[:, 0])
        if fitted is None:
            logger.warning("too few samples above the noise floor to fit a decay rate")
    summary = {
        **_plan_summary(plan, config),
        "expected_decay_rate": quantity(expected, "1/s"),
        "fitted_decay_rate": quantity(fitted, "1/s"),
        "fitted_rate_ratio": quantity(
            None if fitted is None else fitted / expected, "1"
        ),
        "max_pz_drift": quantity(
            float(np.max(np.abs(ensemble.mean_p[:, 2] - plan.p0.z))), "1"
        ),
        "config": json.loads(dump_config(config)),
    }
    write_json(out_dir / "register_decay.json", summary)
    return summary


def cmd_rotation(config: RunConfig) -> Dict[str, object]:
    """
    Driven y-rotation: Monte Carlo against the exact and zeroth-order
    averaged solutions. Needs a drive field.
    """
    plan = plan_from_config(config, EvolutionMode.rotation)
    ensemble = run_ensemble(
        plan, EvolutionMode.rotation, config.simulation.max_samples
    )
    _write_hdf5(config, "rotation.h5", ensemble, plan)
    ensemble = ensemble.decimate(config.output.stride)
    times = ensemble.times
    params = RotationSolutionParams(kappa=plan.kappa, omega_rabi=plan.omega_rabi)
    exact = analytic.rotation_curve_exact(plan.p0, params, times)
    approx = analytic.rotation_curve_approx(plan.p0, plan.kappa, plan.omega_rabi, times)
    fidelity = analytic.rotation_fidelity(plan.p0, plan.kappa, times)

    out_dir = Path(config.output.out_dir)
    write_csv(
        out_dir / "rotation.csv",
        [
            "t",
            "Px_mc",
            "Py_mc",
            "Pz_mc",
            "stderr_x",
            "stderr_y",
            "stderr_z",
            "Px_exact",
            "Py_exact",
            "Pz_exact",
            "Px_approx",
            "Py_approx",
            "Pz_approx",
            "rotation_fidelity",
        ],
        [
            times,
            *ensemble.mean_p.T,
            *ensemble.stderr_p.T,
            *exact.T,
            *approx.T,
            fidelity,
        ],
    )

    deviation = ensemble.mean_p - exact
    summary = {
        **_plan_summary(plan, config),
        "tau_op": quantity(device.tau_op(config.device), "s"),
        "max_abs_exact_minus_approx": quantity(
            float(np.max(np.abs(exact - approx))), "1"
        ),
        "max_abs_mc_minus_exact": quantity(float(np.max(np.abs(deviation))), "1"),
        "max_mc_deviation_stderr": quantity(
            max_deviation_in_stderr(deviation, ensemble.stderr_p), "stderr"
        ),
        "config": json.loads(dump_config(config)),
    }
    write_json(out_dir / "rotation.json", summary)
    return summary


def cmd_budget(
    config: RunConfig,
    deltas: Optional[Sequence[float]] = None,
    biases: Optional[Sequence[float]] = None,
) -> Dict[str, object]:
    """
    Noise budget at ``config.budget.delta``, plus a sweep when error targets
    or A-gate biases are given (as arguments or in the config). Writes
    ``budget.json``.
    """
    deltas = config.budget.deltas if deltas is None else list(deltas)
    biases = config.budget.biases if biases is None else list(biases)
    headline = budget.compute_budget(config.device, config.budget.delta)
    report = {
        "budget": budget_to_json(headline),
        "device": device_to_json(config.device),
        "error_probability_at_bound": quantity(
            budget.error_probability(headline.ratio_bound), "1"
        ),
    }
    if deltas or biases:
        sweep = budget.sweep_budget(config.device, deltas or [config.budget.delta], biases)
        report["sweep"] = [budget_to_json(b) for b in sweep]
    write_json(Path(config.output.out_dir) / "budget.json", report)
    return report


def cmd_validate(config: RunConfig, inject_fault: bool = False) -> Dict[str, object]:
    """
    Run the consistency checks of :mod:`pykanenoise.validation` and write
    ``validate.json``. A noiseless config runs the checks at the desk rate
    kappa = 1/s.
    """
    sim = config.simulation
    kappa = device.dephasing_rate(config.device, config.noise_spec())
    settings = ValidationSettings(
        kappa=kappa if kappa > 0 else DESK_KAPPA,
        n_traj=sim.n_traj if sim.n_traj is not None else VALIDATION_TRAJECTORIES,
        seed=sim.seed,
        workers=sim.workers,
        fault=FAULT_SCALE if inject_fault else 1.0,
    )
    if inject_fault:
        logger.warning(f"fault injected: analytic kappa scaled by {FAULT_SCALE}")
    results = run_validation(settings)
    report = {
        "checks": [r.to_json() for r in results],
        "passed": all(r.passed for r in results),
    }
    write_json(Path(config.output.out_dir) / "validate.json", report)
    return report


def _delta_range(text: str):
    try:
        low, high, count = text.split(",")
        low, high, count = float(low), float(high), int(count)
    except ValueError:
        raise click.BadParameter(f"expected LOW,HIGH,COUNT, got {text!r}") from None
    if not 0 < low <= high or count < 1:
        raise click.BadParameter(f"need 0 < LOW <= HIGH and COUNT >= 1, got {text!r}")
    return list(np.geomspace(low, high, count))


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KaneNoiseError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_BAD_CONFIG)

    return wrapper


def _common_options(func):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="JSON run configuration."),
        click.option("--seed", type=int, help="Master seed."),
        click.option("--traj", "n_traj", type=int, help="Number of trajectories."),
        click.option("--dt", type=float, help="Time step in seconds."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False),
                     help="Output directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(config_path, seed, n_traj, dt, out_dir, **overrides) -> RunConfig:
    config = load_config(config_path)
    return apply_overrides(
        config, seed=seed, n_traj=n_traj, dt=dt, out_dir=out_dir, **overrides
    )


@click.group()
@click.version_option(__version__, prog_name="pykanenoise")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="WARNING",
    show_default=True,
)
def main(log_level):
    """Stochastic white-noise decoherence of Kane nuclear-spin qubits."""
    level = getattr(logging, log_level.upper())
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logger.setLevel(level)


@main.command("register-decay")
@_common_options
@_handle_errors
def register_decay(config_path, seed, n_traj, dt, out_dir):
    """Dephasing of an undriven register qubit."""
    cmd_register_decay(_load(config_path, seed, n_traj, dt, out_dir))


@main.command()
@_common_options
@_handle_errors
def rotation(config_path, seed, n_traj, dt, out_dir):
    """Depolarization of a qubit during a driven y-rotation."""
    cmd_rotation(_load(config_path, seed, n_traj, dt, out_dir))


@main.command("budget")
@_common_options
@click.option("--delta", type=float, help="Error probability per operation.")
@click.option("--delta-range", type=str, help="Sweep LOW,HIGH,COUNT (log spaced).")
@click.option("--bias", "biases", type=float, multiple=True, help="A-gate bias V_0 (V) to sweep.")
@_handle_errors
def budget_command(config_path, seed, n_traj, dt, out_dir, delta, delta_range, biases):
    """Noise tolerance of a Hadamard gate."""
    config = _load(config_path, seed, n_traj, dt, out_dir, delta=delta)
    deltas = _delta_range(delta_range) if delta_range else None
    report = cmd_budget(config, deltas, list(biases) or None)
    click.echo(to_json(report["budget"]), nl=False)


@main.command()
@_common_options
@click.option("--inject-fault", is_flag=True, hidden=True)
@_handle_errors
def validate(config_path, seed, n_traj, dt, out_dir, inject_fault):
    """Cross-module consistency checks; exit status 1 if any fails."""
    report = cmd_validate(_load(config_path, seed, n_traj, dt, out_dir), inject_fault)
    click.echo(to_json(report), nl=False)
    if not report["passed"]:
        sys.exit(EXIT_CHECK_FAILED)
