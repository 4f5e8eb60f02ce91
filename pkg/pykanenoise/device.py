"""
Kane device model: tunable Larmor coupling, resonance, characteristic
timescales and the voltage-noise to Larmor-noise conversion.

gamma(V) is implemented as ``-g_n mu_n - (A_0 - hbar eta V) / B_z``. The
commonly printed form ``-g_n mu_B - (A_0 - eta V) / B_z`` mixes the Bohr
magneton into the nuclear Zeeman term and drops the hbar that turns eta V
into an energy; neither is dimensionally consistent with H = B_z gamma sigma^z.
"""
import logging

import numpy as np

from pykanenoise.bloch import pauli
from pykanenoise.errors import DeviceModelError
from pykanenoise.model import DeviceParameters, NoiseSpec

logger = logging.getLogger("pykanenoise")


def gamma_of_voltage(params: DeviceParameters, voltage: float) -> float:
    """Larmor coupling gamma (J/T) at A-gate bias ``voltage`` (V).

    Parameters
    ----------
    params : DeviceParameters
        Device parameters, ``a_0`` must be set.
    voltage : float
        A-gate bias in volts, non-negative.

    Returns
    -------
    float
        gamma such that the register Hamiltonian is ``B_z gamma sigma^z``.

    Raises
    ------
    DeviceModelError
        If ``a_0`` is not configured or the bias is negative.
    """
    if params.a_0 is None:
        raise DeviceModelError("A_0 is not configured: gamma(V) is undefined")
    if voltage < 0:
        raise DeviceModelError(f"A-gate bias must be non-negative, got {voltage} V")
    c = params.constants
    return -c.nuclear_moment - (params.a_0 - c.hbar * params.eta * voltage) / params.b_z


def resonance_frequency(params: DeviceParameters, gamma: float) -> float:
    """Angular resonance frequency 2 B_z gamma / hbar (rad/s), sign kept."""
    return 2.0 * params.b_z * gamma / params.constants.hbar


def resonance_voltage(params: DeviceParameters, omega: float) -> float:
    """
    A-gate bias that tunes the qubit into resonance with a drive of angular
    frequency ``omega``. Inverts ``resonance_frequency(gamma_of_voltage(V))``.
    """
    if params.a_0 is None:
        raise DeviceModelError("A_0 is not configured: resonance voltage is undefined")
    c = params.constants
    gamma = omega * c.hbar / (2.0 * params.b_z)
    voltage = (gamma + c.nuclear_moment + params.a_0 / params.b_z) * params.b_z / (
        c.hbar * params.eta
    )
    if voltage < 0:
        raise DeviceModelError(
            f"omega={omega:.6g} rad/s needs a negative A-gate bias ({voltage:.6g} V)"
        )
    return voltage


def epsilon_from_lambda(params: DeviceParameters, lambda_: float) -> float:
    """Larmor-noise strength epsilon ((J/T)^2 s) from voltage-noise strength lambda (s)."""
    return params.noise_prefactor * lambda_


def lambda_from_epsilon(params: DeviceParameters, epsilon: float) -> float:
    """Inverse of :func:`epsilon_from_lambda`."""
    prefactor = params.noise_prefactor
    if prefactor == 0.0:
        raise DeviceModelError("v_0 = 0: lambda cannot be recovered from epsilon")
    return epsilon / prefactor


def tau_op(params: DeviceParameters) -> float:
    """Duration of a Hadamard gate, pi hbar / (4 B_ac g_n mu_n), in seconds."""
    if params.b_ac <= 0:
        raise DeviceModelError("no drive field: operation time undefined")
    c = params.constants
    return np.pi * c.hbar / (4.0 * params.b_ac * c.nuclear_moment)


def tau_dec(params: DeviceParameters, noise: NoiseSpec) -> float:
    """Dephasing time hbar^2 / (2 B_z^2 epsilon) in seconds."""
    if noise.epsilon <= 0:
        raise DeviceModelError("noiseless: decoherence time infinite")
    return params.constants.hbar**2 / (2.0 * params.b_z**2 * noise.epsilon)


def dephasing_rate(params: DeviceParameters, noise: NoiseSpec) -> float:
    """kappa = B_z^2 epsilon / hbar^2 (1/s); the register coherence decays as exp(-2 kappa t)"""
    return params.b_z**2 * noise.epsilon / params.constants.hbar**2


def rabi_rate(params: DeviceParameters) -> float:
    """Omega = 2 B_ac g_n mu_n / hbar (rad/s)"""
    c = params.constants
    return 2.0 * params.b_ac * c.nuclear_moment / c.hbar


def register_hamiltonian(params: DeviceParameters, voltage: float) -> np.ndarray:
    """H = B_z gamma(V) sigma^z in joules."""
    _, _, sz = pauli()
    return params.b_z * gamma_of_voltage(params, voltage) * sz


def rotating_frame_hamiltonian(params: DeviceParameters, xi: float = 0.0) -> np.ndarray:
    """
    Interaction-picture Hamiltonian of a y-rotation with Larmor fluctuation
    ``xi`` (J/T): xi B_z sigma^z - B_ac g_n mu_n sigma^y.
    """
    _, sy, sz = pauli()
    return xi * params.b_z * sz - params.b_ac * params.constants.nuclear_moment * sy
