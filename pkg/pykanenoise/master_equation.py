"""
Deterministic integration of the noise-averaged master equation on the
density matrix,

    d rho / dt = -i [H, rho] - (kappa / 2) [sigma^z, [sigma^z, rho]],
    H = -(omega / 2) sigma^y,

in reduced units (H in rad/s). It shares no code with the closed forms in
:mod:`pykanenoise.analytic` and serves as their reference.
"""
import numpy as np
from scipy.integrate import solve_ivp

from pykanenoise.bloch import SIGMA_X, SIGMA_Y, SIGMA_Z, density_from_polarization
from pykanenoise.model import PolarizationVector


def _commutator(a, b):
    return a @ b - b @ a


def averaged_generator(kappa: float, omega_rabi: float):
    """Right-hand side f(t, y) for solve_ivp, with y the flattened density matrix."""
    hamiltonian = -0.5 * omega_rabi * SIGMA_Y

    def rhs(_t, y):
        rho = y.reshape(2, 2)
        drho = -1j * _commutator(hamiltonian, rho) - 0.5 * kappa * _commutator(
            SIGMA_Z, _commutator(SIGMA_Z, rho)
        )
        return drho.ravel()

    return rhs


def integrate_averaged_master_equation(
    p0: PolarizationVector,
    kappa: float,
    omega_rabi: float,
    times,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> np.ndarray:
    """Bloch vectors at ``times`` (sorted, non-negative), shape (n, 3).

    Parameters
    ----------
    p0 : PolarizationVector
        Initial state.
    kappa : float
        Dephasing rate in 1/s.
    omega_rabi : float
        Rabi rate in rad/s.
    times : array_like
        Output times.
    rtol, atol : float, optional
        Tolerances passed to the DOP853 integrator.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho0 = density_from_polarization(p0).matrix.astype(complex)
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.tile(p0.as_array(), (len(times), 1))
    solution = solve_ivp(
        averaged_generator(kappa, omega_rabi),
        (0.0, t_end),
        rho0.ravel(),
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not solution.success:
        raise RuntimeError(f"master equation integration failed: {solution.message}")
    rhos = solution.y.T.reshape(-1, 2, 2)
    return np.stack(
        [
            np.einsum("nij,ji->n", rhos, sigma).real
            for sigma in (SIGMA_X, SIGMA_Y, SIGMA_Z)
        ],
        axis=1,
    )
