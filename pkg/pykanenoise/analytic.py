"""
Closed-form noise-averaged evolution of a Kane qubit.

All rates are reduced: kappa = B_z^2 epsilon / hbar^2 (1/s) and
omega = 2 B_ac g_n mu_n / hbar (rad/s). In these units the driven-qubit
solution uses a = sqrt(kappa^2 - omega^2), which is imaginary for
kappa < omega; cosh(a t) and sinh(a t) / a are then evaluated in complex
arithmetic and come out real.
"""
import logging

import numpy as np

from pykanenoise.errors import UnphysicalStateError
from pykanenoise.model import (
    PolarizationVector,
    RegisterSolutionParams,
    RotationSolutionParams,
)

logger = logging.getLogger("pykanenoise")

# below this |a t| the hyperbolic terms use their series
_SERIES_THRESHOLD = 1e-6
_IMAG_RESIDUE = 1e-10


def _times(t) -> np.ndarray:
    times = np.asarray(t, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    return times


def _scalar_or_array(values, t):
    return float(values) if np.ndim(t) == 0 else values


def _check_physical(p0: PolarizationVector):
    if p0.norm > 1.0 + 1e-9:
        raise UnphysicalStateError(f"unphysical polarization: |P| = {p0.norm:.12g}")


def register_curve(p0: PolarizationVector, kappa: float, times) -> np.ndarray:
    """Register solution at every entry of ``times``, shape (n, 3)."""
    kappa = RegisterSolutionParams(kappa=kappa).kappa
    t = np.atleast_1d(_times(times))
    decay = np.exp(-2.0 * kappa * t)
    return np.column_stack([p0.x * decay, p0.y * decay, np.full_like(t, p0.z)])


def register_polarization(
    p0: PolarizationVector, kappa: float, t: float
) -> PolarizationVector:
    """Pure dephasing: (P_x, P_y) decay as exp(-2 kappa t), P_z is conserved."""
    return PolarizationVector.from_array(register_curve(p0, kappa, [t])[0])


def _decayed_hyperbolic_terms(kappa: float, a: complex, t: np.ndarray):
    """e^{-kappa t} cosh(a t) and e^{-kappa t} sinh(a t) / a, with Re(a) >= 0."""
    at = a * t
    small = np.abs(at) < _SERIES_THRESHOLD
    at2 = at * at
    decay = np.exp(-kappa * t)
    cosh_series = decay * (1.0 + at2 / 2.0 + at2 * at2 / 24.0)
    sinhc_series = decay * t * (1.0 + at2 / 6.0 + at2 * at2 / 120.0)
    # |e^{(a - kappa) t}| <= 1 and |e^{-2 a t}| <= 1, nothing here can overflow
    lead = np.exp((a - kappa) * t)
    cosh = np.where(small, cosh_series, 0.5 * lead * (1.0 + np.exp(-2.0 * at)))
    sinhc = np.where(
        small,
        sinhc_series,
        -lead * np.expm1(-2.0 * at) / (2.0 * (a if a != 0 else 1.0)),
    )
    return cosh, sinhc


def _rotation_exact_complex(p0, params: RotationSolutionParams, times):
    t = np.atleast_1d(_times(times))
    kappa, omega = params.kappa, params.omega_rabi
    cosh, sinhc = _decayed_hyperbolic_terms(kappa, params.alpha_reduced, t.astype(complex))
    px = (cosh - kappa * sinhc) * p0.x - omega * sinhc * p0.z
    pz = (cosh + kappa * sinhc) * p0.z + omega * sinhc * p0.x
    py = np.exp(-2.0 * kappa * t) * p0.y
    return px, py, pz


def imaginary_residue(p0: PolarizationVector, params: RotationSolutionParams, times) -> float:
    """Largest imaginary part left in the complex evaluation of the exact solution."""
    px, _, pz = _rotation_exact_complex(p0, params, times)
    return float(max(np.max(np.abs(px.imag)), np.max(np.abs(pz.imag))))


def rotation_curve_exact(
    p0: PolarizationVector, params: RotationSolutionParams, times
) -> np.ndarray:
    """Exact averaged driven-qubit solution at every entry of ``times``, shape (n, 3)."""
    px, py, pz = _rotation_exact_complex(p0, params, times)
    if not (np.all(np.isfinite(px)) and np.all(np.isfinite(pz))):
        raise FloatingPointError("non-finite value in the exact rotation solution")
    residue = max(np.max(np.abs(px.imag)), np.max(np.abs(pz.imag)))
    if residue > _IMAG_RESIDUE:
        raise FloatingPointError(
            f"imaginary residue {residue:.3g} in the exact rotation solution"
        )
    return np.column_stack([px.real, py, pz.real])


def rotation_polarization_exact(
    p0: PolarizationVector, params: RotationSolutionParams, t: float
) -> PolarizationVector:
    """Depolarizing y-rotation: P_y decays at 2 kappa, (P_x, P_z) mix and decay."""
    return PolarizationVector.from_array(rotation_curve_exact(p0, params, [t])[0])


def rotation_curve_approx(
    p0: PolarizationVector, kappa: float, omega_rabi: float, times
) -> np.ndarray:
    """Zeroth-order solution in kappa / omega at every entry of ``times``."""
    t = np.atleast_1d(_times(times))
    c = np.cos(-omega_rabi * t)
    s = np.sin(-omega_rabi * t)
    decay = np.exp(-kappa * t)
    return np.column_stack(
        [
            decay * (c * p0.x + s * p0.z),
            np.exp(-2.0 * kappa * t) * p0.y,
            decay * (c * p0.z - s * p0.x),
        ]
    )


def rotation_polarization_approx(
    p0: PolarizationVector, kappa: float, omega_rabi: float, t: float
) -> PolarizationVector:
    """Undamped rotation of (P_x, P_z) at omega, damped at kappa; P_y damped at 2 kappa."""
    return PolarizationVector.from_array(
        rotation_curve_approx(p0, kappa, omega_rabi, [t])[0]
    )


def register_fidelity(p0: PolarizationVector, kappa: float, t):
    """Tr[rho(t) rho(0)] for a register qubit: (1 + P_z^2 + (P_x^2 + P_y^2) e^{-2 kappa t}) / 2"""
    _check_physical(p0)
    times = _times(t)
    values = 0.5 * (
        1.0 + p0.z**2 + (p0.x**2 + p0.y**2) * np.exp(-2.0 * kappa * times)
    )
    return _scalar_or_array(values, t)


def worst_case_register_fidelity(kappa: float, t):
    times = _times(t)
    return _scalar_or_array(0.5 * (1.0 + np.exp(-2.0 * kappa * times)), t)


def rotation_fidelity(p0: PolarizationVector, kappa: float, t):
    """
    Overlap of the noisy rotated state with the noiseless one, to zeroth
    order in kappa / omega. Meant for pure inputs; a mixed input starts
    below 1.
    """
    _check_physical(p0)
    if p0.norm < 1.0 - 1e-9:
        logger.warning(f"rotation fidelity of a mixed input state, |P0| = {p0.norm:.6g}")
    times = _times(t)
    values = 0.5 * (
        1.0
        + np.exp(-2.0 * kappa * times) * p0.y**2
        + np.exp(-kappa * times) * (p0.x**2 + p0.z**2)
    )
    return _scalar_or_array(values, t)
