"""
Noise budget: from a target error probability per gate to bounds on the
dephasing rate, the voltage-noise strength and the rms pulse-area
fluctuation of an A-gate pulse.

Nothing is folded numerically: every bound is computed from delta and the
device parameters, so any delta in the usual 1e-6 to 1e-4 range works.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from pykanenoise import device
from pykanenoise.engine import WienerStream
from pykanenoise.errors import DeviceModelError, ToleranceBudgetError
from pykanenoise.model import DeviceParameters, NoiseSpec, ToleranceBudget

logger = logging.getLogger("pykanenoise")


def ratio_bound_from_delta(delta: float) -> float:
    """
    Largest tau_op / tau_dec keeping the worst-case gate error below delta,
    -ln(1 - 2 delta).
    """
    if delta <= 0:
        raise ToleranceBudgetError(f"error target must be positive, got {delta}")
    if delta >= 0.5:
        raise ToleranceBudgetError(f"unreachable error target: delta = {delta} >= 1/2")
    return float(-np.log1p(-2.0 * delta))


def error_probability(ratio: float) -> float:
    """Worst-case gate error 1 - F = (1 - exp(-ratio)) / 2 for ratio = tau_op / tau_dec."""
    if ratio < 0:
        raise ToleranceBudgetError(f"time ratio must be non-negative, got {ratio}")
    return float(-0.5 * np.expm1(-ratio))


def pulse_area_ratio(lambda_: float, tau: float) -> float:
    """rms pulse-area fluctuation over mean pulse area, sqrt(lambda / tau)."""
    if tau <= 0:
        raise ToleranceBudgetError(f"pulse duration must be positive, got {tau}")
    if lambda_ < 0:
        raise ToleranceBudgetError(f"noise strength must be non-negative, got {lambda_}")
    return float(np.sqrt(lambda_ / tau))


def pulse_area_statistics(v_0: float, lambda_: float, tau: float) -> Tuple[float, float]:
    """Mean pulse area V_0 tau and its rms fluctuation V_0 sqrt(lambda tau), both in V s."""
    if tau <= 0:
        raise ToleranceBudgetError(f"pulse duration must be positive, got {tau}")
    return v_0 * tau, v_0 * float(np.sqrt(lambda_ * tau))


def compute_budget(params: DeviceParameters, delta: float) -> ToleranceBudget:
    """Noise tolerance of a Hadamard gate at error target ``delta``.

    Parameters
    ----------
    params : DeviceParameters
        Needs ``b_ac > 0`` and ``v_0 > 0``.
    delta : float
        Error probability per operation, in (0, 1/2).

    Returns
    -------
    ToleranceBudget
        The chain ratio -> tau_op -> epsilon_max -> lambda_max -> pulse-area
        ratio.

    Raises
    ------
    ToleranceBudgetError
        If delta is out of range.
    DeviceModelError
        If there is no drive field or no A-gate bias.
    """
    if params.v_0 <= 0:
        raise DeviceModelError("zero A-gate bias: voltage noise bound undefined")
    ratio = ratio_bound_from_delta(delta)
    t_op = device.tau_op(params)
    hbar = params.constants.hbar
    epsilon_max = ratio * hbar**2 / (2.0 * params.b_z**2 * t_op)
    lambda_max = device.lambda_from_epsilon(params, epsilon_max)
    noise = NoiseSpec(lambda_=lambda_max, epsilon=epsilon_max)
    budget = ToleranceBudget(
        delta=delta,
        v_0=params.v_0,
        ratio_bound=ratio,
        ratio_bound_linear=2.0 * delta,
        tau_op=t_op,
        tau_dec_min=device.tau_dec(params, noise),
        epsilon_max=epsilon_max,
        lambda_max=lambda_max,
        pulse_area_ratio_max=pulse_area_ratio(lambda_max, t_op),
    )
    logger.info(
        f"budget at delta={delta:.3g}, V_0={params.v_0} V: "
        f"pulse-area ratio < {budget.pulse_area_ratio_max:.3g}"
    )
    return budget


def sweep_budget(
    params: DeviceParameters,
    deltas: Iterable[float],
    biases: Optional[Iterable[float]] = None,
) -> List[ToleranceBudget]:
    """Budgets over a grid of error targets and, optionally, A-gate biases."""
    biases = [params.v_0] if biases is None else list(biases)
    deltas = list(deltas)
    budgets = []
    for v_0 in biases:
        biased = DeviceParameters.model_validate({**params.model_dump(), "v_0": v_0})
        budgets.extend(compute_budget(biased, delta) for delta in deltas)
    return budgets


@dataclass(frozen=True)
class PulseAreaSample:
    n_pulses: int
    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float


def sample_pulse_areas(
    v_0: float,
    lambda_: float,
    tau: float,
    n_pulses: int = 100_000,
    n_substeps: int = 64,
    seed: int = 0,
) -> PulseAreaSample:
    """
    Integrate ``n_pulses`` noisy pulses V(t) = V_0 (1 + Delta(t)) over
    ``tau`` with Delta dt = sqrt(lambda) dW, on ``n_substeps`` steps each.
    """
    if tau <= 0:
        raise ToleranceBudgetError(f"pulse duration must be positive, got {tau}")
    dt = tau / n_substeps
    dws = WienerStream(seed, 0).increments(n_pulses * n_substeps, dt)
    dws = dws.reshape(n_pulses, n_substeps)
    areas = np.sum(v_0 * (dt + np.sqrt(lambda_) * dws), axis=1)
    variance = float(areas.var(ddof=1))
    return PulseAreaSample(
        n_pulses=n_pulses,
        mean=float(areas.mean()),
        variance=variance,
        mean_stderr=float(np.sqrt(variance / n_pulses)),
        variance_stderr=variance * float(np.sqrt(2.0 / (n_pulses - 1))),
    )
