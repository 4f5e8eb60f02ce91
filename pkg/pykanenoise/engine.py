"""
Monte Carlo trajectories of a noisy Kane qubit.

Each trajectory is advanced with the exact unitary of the piecewise-constant
sampled Hamiltonian over a step, acting on the Bloch vector as a rotation.
Over one step the noise contributes the phase ``theta_z = sqrt(kappa) dW``
through ``exp(-i theta_z sigma^z)``, which turns (P_x, P_y) by ``2 theta_z``
about +z. Since ``E[exp(-2 i theta_z)] = exp(-2 kappa dt)``, the ensemble
mean of the register coherence decays at exactly 2 kappa for any dt.
The drive adds ``theta_y = -omega_rabi dt / 2`` about y.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from pykanenoise.errors import PlanError, PlanTooLargeError
from pykanenoise.model import EvolutionMode, PolarizationVector, SimPlan

logger = logging.getLogger("pykanenoise")

DEFAULT_MAX_SAMPLES = 100_000_000


class WienerStream:
    """
    Wiener increments for one trajectory.

    The generator is numpy's PCG64 (period 2^128) seeded through
    ``SeedSequence(seed, spawn_key=(stream_index,))``; normal variates come
    from numpy's ziggurat sampler. The same (seed, stream_index) always gives
    the same increments.
    """

    generator_name = "numpy.random.PCG64"

    def __init__(self, seed: int, stream_index: int):
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def increments(self, n: int, dt: float) -> np.ndarray:
        """n independent N(0, dt) increments"""
        return np.sqrt(dt) * self._generator.standard_normal(n)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """
    Ensemble statistics of the Bloch vector at every time sample.

    ``m2_p`` holds the summed squared deviations from the mean, which is what
    :func:`merge_ensembles` needs. ``paths`` is only present when the plan
    asked for ``keep_paths`` and has shape (n_traj, n_samples, 3).
    """

    times: np.ndarray
    mean_p: np.ndarray
    stderr_p: np.ndarray
    m2_p: np.ndarray
    n_traj: int
    mode: EvolutionMode
    paths: Optional[np.ndarray] = None

    def polarization(self, index: int) -> PolarizationVector:
        return PolarizationVector.from_array(self.mean_p[index])

    def decimate(self, stride: int) -> "TrajectoryEnsemble":
        """Every ``stride``-th sample, always keeping the final one."""
        if stride < 1:
            raise ValueError(f"decimation stride must be >= 1, got {stride}")
        last = len(self.times) - 1
        index = np.arange(0, last + 1, stride)
        if index[-1] != last:
            index = np.append(index, last)
        return replace(
            self,
            times=self.times[index],
            mean_p=self.mean_p[index],
            stderr_p=self.stderr_p[index],
            m2_p=self.m2_p[index],
            paths=None if self.paths is None else self.paths[:, index],
        )


@dataclass(frozen=True)
class ConvergenceRow:
    dt: float
    n_steps: int
    max_error: float
    noise_floor: float

    @property
    def bias_estimate(self) -> float:
        """error left after removing a 3 sigma statistical allowance"""
        return max(self.max_error - 3.0 * self.noise_floor, 0.0)


def _rotate_about_z(p: np.ndarray, angle) -> np.ndarray:
    c = np.cos(angle)
    s = np.sin(angle)
    out = np.empty_like(p)
    out[..., 0] = c * p[..., 0] - s * p[..., 1]
    out[..., 1] = s * p[..., 0] + c * p[..., 1]
    out[..., 2] = p[..., 2]
    return out


def _rotate(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    # Rodrigues rotation by |k| about k / |k|, written with sinc so k = 0 needs no branch
    beta = np.linalg.norm(k, axis=-1)[..., None]
    sinc = np.sinc(beta / np.pi)
    versine = 0.5 * np.sinc(beta / (2.0 * np.pi)) ** 2
    kp = np.sum(k * p, axis=-1, keepdims=True)
    return p * np.cos(beta) + np.cross(k, p) * sinc + k * kp * versine


def _register_step(p: np.ndarray, dw, kappa: float) -> np.ndarray:
    return _rotate_about_z(p, 2.0 * np.sqrt(kappa) * np.asarray(dw))


def _rotation_step(p: np.ndarray, dw, kappa: float, omega: float, dt: float):
    if omega == 0.0:
        return _register_step(p, dw, kappa)
    dw = np.asarray(dw)
    k = np.zeros(np.broadcast_shapes(p.shape, dw.shape + (3,)))
    k[..., 1] = -omega * dt
    k[..., 2] = 2.0 * np.sqrt(kappa) * dw
    return _rotate(p, k)


def step_register(p: PolarizationVector, dw: float, plan: SimPlan) -> PolarizationVector:
    """Advance a register qubit over one step with Wiener increment ``dw``."""
    return PolarizationVector.from_array(_register_step(p.as_array(), dw, plan.kappa))


def step_rotation(p: PolarizationVector, dw: float, plan: SimPlan) -> PolarizationVector:
    """Advance a driven qubit over one step with Wiener increment ``dw``."""
    out = _rotation_step(p.as_array(), dw, plan.kappa, plan.omega_rabi, plan.dt)
    return PolarizationVector.from_array(out)


def _batches(n_traj: int, batch_size: int) -> List[range]:
    return [
        range(start, min(start + batch_size, n_traj))
        for start in range(0, n_traj, batch_size)
    ]


def _run_batch(plan: SimPlan, mode: EvolutionMode, indices: range):
    n = plan.n_steps
    dws = np.stack(
        [
            WienerStream(plan.seed, plan.stream_offset + i).increments(n, plan.dt)
            for i in indices
        ]
    )
    p = np.tile(plan.p0.as_array(), (len(indices), 1))
    mean = np.empty((n + 1, 3))
    m2 = np.empty((n + 1, 3))
    mean[0] = plan.p0.as_array()
    m2[0] = 0.0
    paths = np.empty((len(indices), n + 1, 3)) if plan.keep_paths else None
    if paths is not None:
        paths[:, 0] = p
    for k in range(n):
        if mode is EvolutionMode.register:
            p = _register_step(p, dws[:, k], plan.kappa)
        else:
            p = _rotation_step(p, dws[:, k], plan.kappa, plan.omega_rabi, plan.dt)
        mean[k + 1] = p.mean(axis=0)
        m2[k + 1] = np.sum((p - mean[k + 1]) ** 2, axis=0)
        if paths is not None:
            paths[:, k + 1] = p
    logger.debug(f"batch of trajectories {indices.start}..{indices.stop - 1} done")
    return len(indices), mean, m2, paths


def _merge_moments(n_a, mean_a, m2_a, n_b, mean_b, m2_b):
    # pairwise update of Chan, Golub and LeVeque
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (n_b / n)
    m2 = m2_a + m2_b + delta**2 * (n_a * n_b / n)
    return n, mean, m2


def _stderr(m2: np.ndarray, n: int) -> np.ndarray:
    if n < 2:
        return np.zeros_like(m2)
    return np.sqrt(m2 / (n - 1)) / np.sqrt(n)


def run_ensemble(
    plan: SimPlan, mode: EvolutionMode, max_samples: int = DEFAULT_MAX_SAMPLES
) -> TrajectoryEnsemble:
    """Run ``plan.n_traj`` trajectories and reduce them to ensemble statistics.

    Parameters
    ----------
    plan : SimPlan
        Rates, time grid, trajectory count and seed.
    mode : EvolutionMode
        ``register`` ignores the drive; ``rotation`` applies it.
    max_samples : int, optional
        Cap on ``n_traj * n_steps``.

    Returns
    -------
    TrajectoryEnsemble
        Deterministic in (plan, mode): the worker count changes neither the
        batch boundaries nor the order in which batches are merged.

    Raises
    ------
    PlanTooLargeError
        If the plan exceeds ``max_samples``.
    """
    mode = EvolutionMode(mode)
    if plan.n_traj * plan.n_steps > max_samples:
        raise PlanTooLargeError(
            f"plan too large: {plan.n_traj} trajectories x {plan.n_steps} steps "
            f"exceeds the cap of {max_samples}"
        )
    batches = _batches(plan.n_traj, plan.batch_size)
    logger.info(
        f"running {plan.n_traj} {mode.value} trajectories of {plan.n_steps} steps "
        f"in {len(batches)} batches on {plan.workers} worker(s)"
    )
    if plan.workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            results = list(pool.map(lambda b: _run_batch(plan, mode, b), batches))
    else:
        results = [_run_batch(plan, mode, b) for b in batches]

    n, mean, m2, paths = results[0]
    for n_b, mean_b, m2_b, _ in results[1:]:
        n, mean, m2 = _merge_moments(n, mean, m2, n_b, mean_b, m2_b)
    if plan.keep_paths:
        paths = np.concatenate([r[3] for r in results])

    times = plan.dt * np.arange(plan.n_steps + 1)
    logger.info(f"ensemble done: final mean P = {mean[-1]}")
    return TrajectoryEnsemble(
        times=times,
        mean_p=mean,
        stderr_p=_stderr(m2, n),
        m2_p=m2,
        n_traj=n,
        mode=mode,
        paths=paths,
    )


def merge_ensembles(a: TrajectoryEnsemble, b: TrajectoryEnsemble) -> TrajectoryEnsemble:
    """Statistics of the union of two ensembles over disjoint trajectories."""
    if a.mode is not b.mode or not np.array_equal(a.times, b.times):
        raise PlanError("ensembles with different modes or time grids cannot be merged")
    n, mean, m2 = _merge_moments(a.n_traj, a.mean_p, a.m2_p, b.n_traj, b.mean_p, b.m2_p)
    paths = None
    if a.paths is not None and b.paths is not None:
        paths = np.concatenate([a.paths, b.paths])
    return TrajectoryEnsemble(
        times=a.times,
        mean_p=mean,
        stderr_p=_stderr(m2, n),
        m2_p=m2,
        n_traj=n,
        mode=a.mode,
        paths=paths,
    )


def fit_decay_rate(
    times: np.ndarray, values: np.ndarray, stderr: np.ndarray
) -> Optional[float]:
    """
    Exponential decay rate of ``values`` by ordinary least squares on
    log|values|, over the leading samples whose magnitude exceeds ten times
    their standard error. Returns None when fewer than three samples qualify.
    """
    above = np.abs(values) > 10.0 * np.asarray(stderr)
    leading = np.logical_and.accumulate(above)
    if leading.sum() < 3:
        return None
    slope, _ = np.polyfit(times[leading], np.log(np.abs(values[leading])), 1)
    return float(-slope)


def convergence_report(
    plan: SimPlan,
    mode: EvolutionMode,
    analytic: Callable[[np.ndarray], np.ndarray],
    refinements: int = 3,
    max_samples: int = DEFAULT_MAX_SAMPLES,
) -> Sequence[ConvergenceRow]:
    """
    Weak-convergence table: the plan is rerun with dt halved ``refinements - 1``
    times at fixed total time, and each run is compared with ``analytic``
    (a map from a time array to an (n, 3) array of Bloch vectors) on the
    coarsest grid.
    """
    rows = []
    for level in range(refinements):
        factor = 2**level
        fine = SimPlan.model_validate(
            {
                **plan.model_dump(),
                "dt": plan.dt / factor,
                "n_steps": plan.n_steps * factor,
            }
        )
        ensemble = run_ensemble(fine, mode, max_samples).decimate(factor)
        reference = np.asarray(analytic(ensemble.times))
        rows.append(
            ConvergenceRow(
                dt=fine.dt,
                n_steps=fine.n_steps,
                max_error=float(np.max(np.abs(ensemble.mean_p - reference))),
                noise_floor=float(np.max(ensemble.stderr_p)),
            )
        )
        logger.info(f"convergence dt={fine.dt:.3g}: {rows[-1]}")
    return rows
