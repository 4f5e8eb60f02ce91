import logging

import numpy as np
import pytest

from ..analytic import (
    imaginary_residue,
    register_curve,
    register_fidelity,
    register_polarization,
    rotation_curve_approx,
    rotation_curve_exact,
    rotation_fidelity,
    rotation_polarization_approx,
    rotation_polarization_exact,
    worst_case_register_fidelity,
)
from ..bloch import density_from_polarization, trace_fidelity
from ..errors import UnphysicalStateError
from ..master_equation import integrate_averaged_master_equation
from ..model import PolarizationVector, RotationSolutionParams

P_TILTED = PolarizationVector(x=0.6, y=0.0, z=0.8)
P_GENERIC = PolarizationVector(x=0.48, y=0.6, z=0.64)


def random_rate_pairs(n=20, seed=2024):
    """(kappa, omega) with kappa / omega log-uniform on [1e-6, 10]"""
    rng = np.random.default_rng(seed)
    omegas = 10.0 ** rng.uniform(-1.0, 1.0, n)
    ratios = 10.0 ** rng.uniform(-6.0, 1.0, n)
    ratios[:2] = [1e-6, 10.0]
    return list(zip(ratios * omegas, omegas))


def test_register_solution():
    t = np.array([0.0, 0.3, 1.7])
    curve = register_curve(P_GENERIC, 0.4, t)
    np.testing.assert_allclose(curve[:, 0], 0.48 * np.exp(-0.8 * t))
    np.testing.assert_allclose(curve[:, 1], 0.6 * np.exp(-0.8 * t))
    np.testing.assert_array_equal(curve[:, 2], 0.64)
    p = register_polarization(P_GENERIC, 0.0, 5.0)
    assert p == P_GENERIC, "noiseless register state must not change"


def test_register_rejects_negative_time():
    with pytest.raises(ValueError):
        register_polarization(P_TILTED, 0.1, -1.0)


def test_rotation_without_drive_is_register_solution():
    t = np.linspace(0.0, 3.0, 31)
    for kappa in (0.0, 0.2, 5.0):
        exact = rotation_curve_exact(
            P_GENERIC, RotationSolutionParams(kappa=kappa, omega_rabi=0.0), t
        )
        np.testing.assert_allclose(exact, register_curve(P_GENERIC, kappa, t), atol=1e-14)


@pytest.mark.parametrize("kappa_t", [100.0, 800.0])
def test_long_times_without_drive_stay_finite(kappa_t):
    t = np.array([0.0, 0.5 * kappa_t, kappa_t])
    exact = rotation_curve_exact(P_GENERIC, RotationSolutionParams(kappa=1.0, omega_rabi=0.0), t)
    assert np.all(np.isfinite(exact)), "overdamped solution must not overflow"
    np.testing.assert_allclose(exact, register_curve(P_GENERIC, 1.0, t), atol=1e-15)


@pytest.mark.parametrize("omega", [0.1, 0.999, 5.0])
@pytest.mark.parametrize("kappa_t", [100.0, 800.0])
def test_long_times_with_drive_stay_finite(kappa_t, omega):
    params = RotationSolutionParams(kappa=1.0, omega_rabi=omega)
    exact = rotation_curve_exact(P_GENERIC, params, np.linspace(0.0, kappa_t, 81))
    assert np.all(np.isfinite(exact))
    norms = np.linalg.norm(exact, axis=1)
    assert np.all(np.diff(norms) <= 1e-15), "polarization must not grow"


def test_rotation_noiseless_is_rigid_rotation():
    t = np.linspace(0.0, 4.0, 41)
    omega = 1.3
    exact = rotation_curve_exact(
        P_TILTED, RotationSolutionParams(kappa=0.0, omega_rabi=omega), t
    )
    approx = rotation_curve_approx(P_TILTED, 0.0, omega, t)
    np.testing.assert_allclose(exact, approx, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(exact, axis=1), 1.0, atol=1e-14)
    # P_x(t) = sin(-omega t) P_z(0) from P = (0, 0, 1)
    up = rotation_curve_exact(
        PolarizationVector(z=1.0), RotationSolutionParams(kappa=0.0, omega_rabi=omega), t
    )
    np.testing.assert_allclose(up[:, 0], np.sin(-omega * t), atol=1e-14)


@pytest.mark.parametrize("kappa, omega", random_rate_pairs())
def test_exact_solution_matches_master_equation(kappa, omega):
    t = np.linspace(0.0, 5.0 / omega, 51)
    exact = rotation_curve_exact(
        P_GENERIC, RotationSolutionParams(kappa=kappa, omega_rabi=omega), t
    )
    reference = integrate_averaged_master_equation(P_GENERIC, kappa, omega, t)
    assert np.max(np.abs(exact - reference)) < 1e-8, (
        f"exact solution disagrees with the master equation at kappa={kappa}, omega={omega}"
    )


@pytest.mark.parametrize("ratio", [1.0 - 1e-9, 1.0, 1.0 + 1e-9, 1.0 + 1e-3])
def test_exact_solution_near_critical_damping(ratio):
    omega = 2.0
    params = RotationSolutionParams(kappa=ratio * omega, omega_rabi=omega)
    t = np.linspace(0.0, 2.5, 26)
    exact = rotation_curve_exact(P_TILTED, params, t)
    reference = integrate_averaged_master_equation(P_TILTED, params.kappa, omega, t)
    np.testing.assert_allclose(exact, reference, atol=1e-8)
    assert imaginary_residue(P_TILTED, params, t) < 1e-10


def test_polarization_decays_to_zero():
    params = RotationSolutionParams(kappa=0.3, omega_rabi=1.0)
    p = rotation_polarization_exact(P_GENERIC, params, 60.0)
    assert p.norm < 1e-6, "all components decay under driven dephasing"


def test_approximation_regime():
    omega = 1.0
    kappa = 2e-5 * omega / np.pi
    t = np.linspace(0.0, np.pi / (2.0 * omega), 101)
    for p0 in (PolarizationVector(x=1.0), PolarizationVector(y=1.0), P_TILTED):
        exact = rotation_curve_exact(p0, RotationSolutionParams(kappa=kappa, omega_rabi=omega), t)
        approx = rotation_curve_approx(p0, kappa, omega, t)
        assert np.max(np.abs(exact - approx)) < 1e-4


def test_approximation_hadamard_mapping():
    # a quarter turn takes +z to -x
    omega = 1.0
    p = rotation_polarization_approx(PolarizationVector(z=1.0), 0.0, omega, np.pi / 2)
    np.testing.assert_allclose(p.as_array(), [-1.0, 0.0, 0.0], atol=1e-15)


def test_register_fidelity():
    assert register_fidelity(P_GENERIC, 0.5, 0.0) == pytest.approx(1.0)
    z_state = PolarizationVector(z=1.0)
    assert register_fidelity(z_state, 10.0, 3.0) == pytest.approx(1.0)
    t = np.linspace(0.0, 4.0, 9)
    x_state = PolarizationVector(x=1.0)
    np.testing.assert_allclose(
        register_fidelity(x_state, 0.5, t), worst_case_register_fidelity(0.5, t), atol=1e-15
    )
    with pytest.raises(UnphysicalStateError):
        register_fidelity(PolarizationVector(x=1.0, z=1.0), 0.5, 1.0)


def test_fidelity_is_non_increasing():
    t = np.linspace(0.0, 10.0, 101)
    for values in (
        register_fidelity(P_GENERIC, 0.7, t),
        worst_case_register_fidelity(0.7, t),
        rotation_fidelity(P_GENERIC, 0.7, t),
    ):
        assert np.all(np.diff(values) <= 0.0), "fidelity must not increase in time"
        assert values[-1] >= 0.5 - 1e-15


def test_worst_case_fidelity_limits():
    assert worst_case_register_fidelity(0.2, 0.0) == 1.0
    assert worst_case_register_fidelity(0.2, 1e6) == pytest.approx(0.5)
    assert isinstance(worst_case_register_fidelity(0.2, 1.0), float)


def test_rotation_fidelity_worst_case_equivalence():
    t = np.linspace(0.0, 5.0, 51)
    np.testing.assert_allclose(
        rotation_fidelity(PolarizationVector(y=1.0), 0.35, t),
        worst_case_register_fidelity(0.35, t),
        atol=1e-12,
    )


def test_rotation_fidelity_mixed_input_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="pykanenoise"):
        value = rotation_fidelity(PolarizationVector(x=0.5), 0.1, 0.0)
    assert value < 1.0, "a mixed input starts below unit fidelity"
    assert "mixed input" in caplog.text


def test_rotation_fidelity_rejects_unphysical():
    with pytest.raises(UnphysicalStateError):
        rotation_fidelity(PolarizationVector(x=1.0, y=0.5), 0.1, 0.0)


def test_fidelity_reference_values():
    half = PolarizationVector(x=np.sqrt(0.5), z=np.sqrt(0.5))
    assert register_fidelity(half, 0.5, 1.0) == pytest.approx(0.8420, abs=5e-5)
    assert worst_case_register_fidelity(0.5, np.log(2.0)) == pytest.approx(0.75, rel=1e-12)
    assert rotation_fidelity(PolarizationVector(z=1.0), 1.0, 1.0) == pytest.approx(0.6839, abs=5e-5)


def random_states(n=6, seed=7, pure=False):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        v = rng.normal(size=3)
        radius = 1.0 if pure else rng.uniform(0.0, 1.0)
        states.append(PolarizationVector.from_array(radius * v / np.linalg.norm(v)))
    return states


@pytest.mark.parametrize("p0", random_states())
def test_register_fidelity_is_overlap_with_initial_state(p0):
    kappa = 0.4
    for t in (0.0, 0.7, 3.0):
        overlap = trace_fidelity(
            density_from_polarization(register_polarization(p0, kappa, t)),
            density_from_polarization(p0),
        )
        assert register_fidelity(p0, kappa, t) == pytest.approx(overlap, abs=1e-12)


@pytest.mark.parametrize("p0", random_states(pure=True))
def test_rotation_fidelity_is_overlap_with_noiseless_rotation(p0):
    kappa, omega = 0.05, 2.0
    for t in (0.0, 0.4, 1.3):
        noisy = rotation_polarization_approx(p0, kappa, omega, t)
        ideal = rotation_polarization_approx(p0, 0.0, omega, t)
        overlap = trace_fidelity(density_from_polarization(noisy), density_from_polarization(ideal))
        assert rotation_fidelity(p0, kappa, t) == pytest.approx(overlap, abs=1e-12)


@pytest.mark.parametrize("kappa, omega", [(0.3, 0.0), (0.1, 2.0), (1.0, 1.0), (4.0, 0.5)])
def test_polarization_norm_never_grows(kappa, omega):
    t = np.linspace(0.0, 10.0, 201)
    for p0 in random_states(n=3, seed=11):
        params = RotationSolutionParams(kappa=kappa, omega_rabi=omega)
        curves = [rotation_curve_exact(p0, params, t)]
        if omega == 0.0:
            curves.append(register_curve(p0, kappa, t))
        for curve in curves:
            norms = np.linalg.norm(curve, axis=1)
            assert np.all(np.diff(norms) <= 1e-14), "dephasing cannot increase |P|"
