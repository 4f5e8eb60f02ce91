"""
Two-level state algebra: density operators, polarization (Bloch) vectors and
the trace-product fidelity.

Basis convention: sigma^z |0> = +|0>, so |0> has P = (0, 0, 1).
"""
from dataclasses import dataclass

import numpy as np

from pykanenoise.errors import UnphysicalStateError
from pykanenoise.model import PolarizationVector

_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def pauli():
    """(sigma^x, sigma^y, sigma^z) as fresh 2x2 complex arrays"""
    return SIGMA_X.copy(), SIGMA_Y.copy(), SIGMA_Z.copy()


@dataclass(frozen=True)
class DensityOperator:
    """
    A qubit density operator. Construction checks that the matrix is
    Hermitian, has unit trace and is positive semidefinite, all to 1e-12.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise UnphysicalStateError(f"density operator must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > _TOL:
            raise UnphysicalStateError("density operator is not Hermitian")
        if abs(np.trace(m) - 1.0) > _TOL:
            raise UnphysicalStateError(f"density operator trace is {np.trace(m)}, not 1")
        if np.linalg.eigvalsh(m).min() < -_TOL:
            raise UnphysicalStateError("density operator is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def purity(p: PolarizationVector) -> float:
    """|P|: 1 for pure states, 0 for the maximally mixed state"""
    return p.norm


def density_from_polarization(p: PolarizationVector) -> DensityOperator:
    """rho = (1 + P.sigma) / 2"""
    if p.norm > 1.0 + 1e-9:
        raise UnphysicalStateError(f"unphysical polarization: |P| = {p.norm:.12g}")
    if p.norm > 1.0:
        p = PolarizationVector.from_array(p.as_array() / p.norm)
    matrix = 0.5 * (IDENTITY + p.x * SIGMA_X + p.y * SIGMA_Y + p.z * SIGMA_Z)
    return DensityOperator(matrix)


def polarization_from_density(rho: DensityOperator) -> PolarizationVector:
    """P_i = Tr(rho sigma^i)"""
    m = rho.matrix
    return PolarizationVector.from_array(
        [np.trace(m @ s).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    )


def trace_fidelity(rho_a: DensityOperator, rho_b: DensityOperator) -> float:
    """
    Tr(rho_a rho_b) = (1 + P_a.P_b) / 2.

    This is the trace-product overlap, not the Uhlmann fidelity.
    """
    return float(np.trace(rho_a.matrix @ rho_b.matrix).real)


def conjugate(rho: DensityOperator, unitary: np.ndarray) -> DensityOperator:
    """U rho U^dagger"""
    return DensityOperator(unitary @ rho.matrix @ unitary.conj().T)
