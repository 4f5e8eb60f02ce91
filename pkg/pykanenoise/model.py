import enum
import logging
from typing import ClassVar, Dict, List, Optional

import numpy as np
import scipy.constants
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pykanenoise.errors import DeviceModelError, PlanError

logger = logging.getLogger("pykanenoise")

# electron/nuclear Zeeman splitting ratio mu_B / (g_n mu_n) of the 31P donor
ZEEMAN_RATIO = 1633.8

_MU_B = scipy.constants.physical_constants["Bohr magneton"][0]
_MU_N = scipy.constants.physical_constants["nuclear magneton"][0]


class EvolutionMode(str, enum.Enum):
    """which Hamiltonian drives a trajectory"""

    register = "register"
    rotation = "rotation"


class PhysicalConstants(BaseModel):
    """
    Physical constants in SI units (CODATA values from scipy.constants).

    g_n is not the tabulated 31P g-factor: it is fixed by the Zeeman ratio
    mu_B / (g_n mu_n) = 1633.8, which is the value the tolerance chain is
    calibrated against.
    """

    model_config = ConfigDict(frozen=True)

    mu_B: float = _MU_B  # J/T
    mu_n: float = _MU_N  # J/T
    g_n: float = _MU_B / (ZEEMAN_RATIO * _MU_N)
    hbar: float = scipy.constants.hbar  # J s

    @model_validator(mode="after")
    def _check_constants(self):
        for name in ("mu_B", "mu_n", "g_n", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        ratio = self.mu_B / (self.g_n * self.mu_n)
        if abs(ratio / ZEEMAN_RATIO - 1.0) > 1e-3:
            raise ValueError(
                f"mu_B / (g_n mu_n) = {ratio:.6g} is not within 0.1% of {ZEEMAN_RATIO}"
            )
        return self

    @property
    def nuclear_moment(self) -> float:
        """g_n mu_n in J/T"""
        return self.g_n * self.mu_n


class DeviceParameters(BaseModel):
    """
    Static parameters of a Kane qubit. Defaults are the Kane operating point:
    B_z = 2 T, B_ac = 1 mT, an A-gate bias of 1 V and eta = 5 pi 10^7 Hz/V.
    A_0 has no default.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    b_z: float = Field(2.0, gt=0)  # T
    b_ac: float = Field(1e-3, ge=0)  # T
    v_0: float = Field(1.0, ge=0)  # V
    eta: float = Field(5e7 * np.pi, gt=0)  # Hz/V
    a_0: Optional[float] = None  # J, hyperfine energy at V = 0
    constants: PhysicalConstants = Field(default_factory=PhysicalConstants)

    @model_validator(mode="after")
    def _warn_strong_drive(self):
        if self.b_ac / self.b_z > 0.01:
            logger.warning(
                f"drive field B_ac={self.b_ac} T is not small compared to B_z={self.b_z} T"
            )
        return self

    @classmethod
    def kane_defaults(cls, a_0: Optional[float] = None) -> "DeviceParameters":
        return cls(a_0=a_0)

    @property
    def noise_prefactor(self) -> float:
        """(eta hbar V_0 / B_z)^2, the factor taking lambda to epsilon"""
        return (self.eta * self.constants.hbar * self.v_0 / self.b_z) ** 2


class NoiseSpec(BaseModel):
    """
    Strength of the A-gate voltage noise (lambda, in s) and of the Larmor
    noise it induces (epsilon, in (J/T)^2 s).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(0.0, ge=0, alias="lambda")
    epsilon: float = Field(0.0, ge=0)

    @classmethod
    def from_lambda(cls, params: DeviceParameters, lambda_: float) -> "NoiseSpec":
        return cls(lambda_=lambda_, epsilon=params.noise_prefactor * lambda_)

    @classmethod
    def from_epsilon(cls, params: DeviceParameters, epsilon: float) -> "NoiseSpec":
        prefactor = params.noise_prefactor
        if prefactor == 0.0:
            if epsilon > 0.0:
                raise DeviceModelError(
                    "v_0 = 0: voltage noise cannot produce a nonzero epsilon"
                )
            return cls(lambda_=0.0, epsilon=0.0)
        return cls(lambda_=epsilon / prefactor, epsilon=epsilon)

    @classmethod
    def from_kappa(cls, params: DeviceParameters, kappa: float) -> "NoiseSpec":
        """Noise with the reduced dephasing rate kappa = B_z^2 epsilon / hbar^2 (1/s)"""
        epsilon = kappa * params.constants.hbar**2 / params.b_z**2
        return cls.from_epsilon(params, epsilon)


class PolarizationVector(BaseModel):
    """
    Bloch vector (P_x, P_y, P_z) of rho = (1 + P.sigma) / 2.

    The norm is not checked here; ensemble means may exceed 1 by their
    statistical error. Operations that need a physical state check it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, values) -> "PolarizationVector":
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=y, z=z)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


class SimPlan(BaseModel):
    """
    A batch of stochastic trajectories expressed in reduced rates.

    kappa is the dephasing rate B_z^2 epsilon / hbar^2 (1/s) and omega_rabi
    the Rabi rate 2 B_ac g_n mu_n / hbar (rad/s, 0 for the register).
    Trajectory i of the plan reads the Wiener stream (seed, stream_offset + i).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa: float = Field(ge=0)
    omega_rabi: float = Field(0.0, ge=0)
    dt: float = Field(gt=0)
    n_steps: int = Field(ge=1)
    n_traj: int = Field(ge=1)
    seed: int = Field(0, ge=0)
    p0: PolarizationVector = PolarizationVector(x=1.0)
    stream_offset: int = Field(0, ge=0)
    batch_size: int = Field(1000, ge=1)
    workers: int = Field(1, ge=1)
    keep_paths: bool = False

    @model_validator(mode="after")
    def _accuracy_guard(self):
        if self.kappa * self.dt > 0.1:
            raise PlanError(
                f"kappa*dt = {self.kappa * self.dt:.3g} exceeds 0.1; reduce dt"
            )
        if self.omega_rabi * self.dt > 0.1:
            raise PlanError(
                f"omega_rabi*dt = {self.omega_rabi * self.dt:.3g} exceeds 0.1; reduce dt"
            )
        return self

    @property
    def t_final(self) -> float:
        return self.dt * self.n_steps


class RegisterSolutionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kappa: float = Field(ge=0)  # 1/s


class RotationSolutionParams(BaseModel):
    """
    Rates of the averaged driven-qubit solution. alpha_reduced is
    sqrt(kappa^2 - omega^2), imaginary in the underdamped regime.
    """

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(ge=0)  # 1/s
    omega_rabi: float = Field(ge=0)  # rad/s

    @property
    def alpha_reduced(self) -> complex:
        return complex(np.sqrt(complex(self.kappa**2 - self.omega_rabi**2, 0.0)))


class ToleranceBudget(BaseModel):
    """
    Noise tolerance derived from a target error probability per operation.
    """

    model_config = ConfigDict(frozen=True)

    delta: float
    v_0: float
    ratio_bound: float
    ratio_bound_linear: float
    tau_op: float
    tau_dec_min: float
    epsilon_max: float
    lambda_max: float
    pulse_area_ratio_max: float

    units: ClassVar[Dict[str, str]] = {
        "delta": "1",
        "v_0": "V",
        "ratio_bound": "1",
        "ratio_bound_linear": "1",
        "tau_op": "s",
        "tau_dec_min": "s",
        "epsilon_max": "(J/T)^2 s",
        "lambda_max": "s",
        "pulse_area_ratio_max": "1",
    }


class NoiseConfig(BaseModel):
    """noise block of a run config; at most one value is needed"""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lambda_: Optional[float] = Field(None, ge=0, alias="lambda")
    epsilon: Optional[float] = Field(None, ge=0)
    kappa: Optional[float] = Field(None, ge=0)


class SimulationConfig(BaseModel):
    """simulation block; dt and n_traj left out take the running command's default"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: Optional[float] = Field(None, gt=0)
    n_steps: int = Field(400, ge=1)
    n_traj: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0)
    batch_size: int = Field(1000, ge=1)
    workers: int = Field(1, ge=1)
    max_samples: int = Field(100_000_000, ge=1)


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    out_dir: str = "output"
    stride: int = Field(1, ge=1)
    hdf5: bool = False


class BudgetConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    delta: float = Field(1e-5, gt=0, lt=0.5)
    deltas: Optional[List[float]] = None
    biases: Optional[List[float]] = None


class RunConfig(BaseModel):
    """A complete experiment description, as read from a JSON config file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    device: DeviceParameters = Field(default_factory=DeviceParameters)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    initial_state: PolarizationVector = PolarizationVector(x=1.0)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)

    @model_validator(mode="after")
    def _check_noise_consistency(self):
        # every given noise value is mapped to epsilon, and they must agree
        candidates = {}
        if self.noise.epsilon is not None:
            candidates["epsilon"] = self.noise.epsilon
        if self.noise.lambda_ is not None:
            candidates["lambda"] = self.device.noise_prefactor * self.noise.lambda_
        if self.noise.kappa is not None:
            candidates["kappa"] = (
                self.noise.kappa * self.device.constants.hbar**2 / self.device.b_z**2
            )
        values = list(candidates.values())
        if any(v > 0 for v in values) and self.device.v_0 == 0:
            raise ValueError(
                "noise given with v_0 = 0: voltage noise cannot shift the Larmor frequency"
            )
        reference = max(values, default=0.0)
        for name, value in candidates.items():
            if abs(value - reference) > 1e-9 * reference:
                raise ValueError(
                    f"noise values are inconsistent: '{name}' gives epsilon={value:.10g}, "
                    f"expected {reference:.10g}"
                )
        return self

    def noise_spec(self) -> NoiseSpec:
        if self.noise.epsilon is not None:
            return NoiseSpec.from_epsilon(self.device, self.noise.epsilon)
        if self.noise.lambda_ is not None:
            return NoiseSpec.from_lambda(self.device, self.noise.lambda_)
        if self.noise.kappa is not None:
            return NoiseSpec.from_kappa(self.device, self.noise.kappa)
        return NoiseSpec()
