"""Simulator oracles: fixed points, analytic circular motion, energy drift, chaos."""

import math

import numpy as np
import pytest

from nsv.systems import (DynamicsError, observe_step, preset, simulate,
                         state_energy, step_dynamics)


def test_single_pendulum_equilibrium_is_fixed_point():
    spec = preset("single_pendulum")
    s = np.array([0.0, 0.0])
    assert np.array_equal(step_dynamics(spec, s), s)


def test_circular_motion_analytic_period():
    spec = preset("circular_motion")
    omega = 1.3
    n = round(2 * math.pi / (omega * spec.dt))
    s = np.array([0.2, omega])
    traj = simulate(spec, s, n)
    assert abs(traj[-1][0] - (0.2 + 2 * math.pi)) < omega * spec.dt


@pytest.mark.parametrize("name,s0", [
    ("single_pendulum", [2.0, 0.5]),
    ("rigid_double_pendulum", [1.2, -0.7, 0.3, 1.1]),
    ("elastic_double_pendulum", [0.9, -0.4, 0.05, 0.6, -1.0, 0.2]),
])
def test_energy_drift_small_over_1000_steps(name, s0):
    spec = preset(name)
    s = np.array(s0, dtype=float)
    e0 = state_energy(spec, s)
    for _ in range(1000):
        s = step_dynamics(spec, s)
    assert abs(state_energy(spec, s) - e0) / abs(e0) < 1e-6


def test_simulate_single_step_contents():
    spec = preset("single_pendulum")
    s0 = np.array([0.5, -0.2])
    traj = simulate(spec, s0, 1)
    assert traj.shape == (2, 2)
    assert np.array_equal(traj[0], s0)
    assert np.array_equal(traj[1], step_dynamics(spec, s0))


def test_equilibrium_trajectory_is_constant():
    spec = preset("rigid_double_pendulum")
    traj = simulate(spec, np.zeros(4), 50)
    assert np.all(traj == 0.0)


def test_chaotic_divergence_rigid_double_pendulum():
    spec = preset("rigid_double_pendulum")
    sa = np.array([2.8, 2.6, 0.0, 0.0])
    sb = sa.copy()
    sb[0] += 1e-6
    for _ in range(20000):  # 20 s of simulated time
        sa = step_dynamics(spec, sa)
        sb = step_dynamics(spec, sb)
        if abs(sa[0] - sb[0]) > 0.1:
            break
    assert abs(sa[0] - sb[0]) > 0.1


def test_step_rejects_nonfinite_state():
    spec = preset("single_pendulum")
    with pytest.raises(DynamicsError):
        step_dynamics(spec, np.array([np.nan, 0.0]))


def test_simulate_reports_step_index_on_blowup():
    spec = preset("elastic_double_pendulum")
    # absurd spring velocity blows up quickly but not immediately
    s0 = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1e160])
    with pytest.raises(DynamicsError, match=r"step \d+"):
        simulate(spec, s0, 100)


def test_observe_step_matches_substepped_simulation():
    spec = preset("rigid_double_pendulum")
    s0 = np.array([1.0, -0.5, 0.8, 0.1])
    dt_obs = 1 / 60
    out = observe_step(spec, s0, dt_obs)
    # oracle: direct RK4 at a finer step over the same interval
    fine = preset("rigid_double_pendulum")
    fine.dt = dt_obs / 64
    s = s0
    for _ in range(64):
        s = step_dynamics(fine, s)
    assert np.allclose(out, s, atol=1e-8)


def test_single_pendulum_small_angle_matches_harmonic_oracle():
    spec = preset("single_pendulum")
    theta0 = 1e-3
    w = math.sqrt(spec.gravity / spec.l1)
    traj = simulate(spec, np.array([theta0, 0.0]), 2000)
    t = 2000 * spec.dt
    assert abs(traj[-1][0] - theta0 * math.cos(w * t)) < 1e-9


def test_energy_closed_form_single_pendulum_at_rest():
    spec = preset("single_pendulum")
    e = state_energy(spec, np.array([0.0, 0.0]))
    assert e == pytest.approx(-spec.m1 * spec.gravity * spec.l1)


def test_kinetic_energy_quadruples_when_velocity_doubles():
    spec = preset("rigid_double_pendulum")
    th = np.array([0.7, -0.3])
    base = state_energy(spec, np.array([*th, 0.0, 0.0]))
    e1 = state_energy(spec, np.array([*th, 0.4, -0.6])) - base
    e2 = state_energy(spec, np.array([*th, 0.8, -1.2])) - base
    assert e2 == pytest.approx(4 * e1)
