"""Equations of motion, RK4 stepping, trajectory simulation, and energies.

The double pendulums are standard point-mass Lagrangian systems (massless
rods).  The elastic variant replaces the lower rod with a linear spring of
rest length l2 and elongation z, so its generalized coordinates are
(theta1, theta2, z).  Circular motion is a free rotor (theta_dot = omega,
omega_dot = 0) and advances analytically.
"""

from __future__ import annotations

import math

import numpy as np

from .specs import SystemSpec


class DynamicsError(Exception):
    """Non-finite value produced while stepping."""


def derivatives(spec: SystemSpec, s: np.ndarray) -> np.ndarray:
    name = spec.name
    g = spec.gravity
    if name == "circular_motion":
        return np.array([s[1], 0.0])
    if name == "single_pendulum":
        theta, theta_dot = s
        return np.array([theta_dot, -(g / spec.l1) * math.sin(theta)])
    if name == "rigid_double_pendulum":
        th1, th2, w1, w2 = s
        m1, m2, l1, l2 = spec.m1, spec.m2, spec.l1, spec.l2
        c, sn = math.cos(th1 - th2), math.sin(th1 - th2)
        mass = np.array([[l1 * l1 * (m1 + m2), l1 * l2 * m2 * c],
                         [l1 * l2 * m2 * c, m2 * l2 * l2]])
        rhs = np.array([-l1 * (g * (m1 + m2) * math.sin(th1) + l2 * m2 * w2 * w2 * sn),
                        m2 * l2 * (-g * math.sin(th2) + l1 * w1 * w1 * sn)])
        acc = np.linalg.solve(mass, rhs)
        return np.array([w1, w2, acc[0], acc[1]])
    # elastic_double_pendulum
    th1, th2, z, w1, w2, zd = s
    m1, m2, l1 = spec.m1, spec.m2, spec.l1
    l2 = spec.spring_rest
    k = spec.spring_k
    c, sn = math.cos(th1 - th2), math.sin(th1 - th2)
    r = l2 + z
    mass = np.array([[l1 * l1 * (m1 + m2), l1 * m2 * r * c, -l1 * m2 * sn],
                     [l1 * m2 * r * c, m2 * r * r, 0.0],
                     [-l1 * m2 * sn, 0.0, m2]])
    rhs = np.array([
        -l1 * (g * (m1 + m2) * math.sin(th1) + m2 * r * w2 * w2 * sn
               + 2.0 * m2 * w2 * zd * c),
        m2 * (-g * r * math.sin(th2) + l1 * r * w1 * w1 * sn - 2.0 * r * w2 * zd),
        g * m2 * math.cos(th2) - k * z + l1 * m2 * w1 * w1 * c + m2 * r * w2 * w2,
    ])
    acc = np.linalg.solve(mass, rhs)
    return np.array([w1, w2, zd, acc[0], acc[1], acc[2]])


def step_dynamics(spec: SystemSpec, s: np.ndarray) -> np.ndarray:
    """Advance one integration dt (classical RK4; circular motion exactly)."""
    s = np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise DynamicsError("non-finite state passed to step_dynamics")
    if spec.name == "circular_motion":
        return np.array([s[0] + s[1] * spec.dt, s[1]])
    return _rk4(spec, s, spec.dt)


def _rk4(spec: SystemSpec, s: np.ndarray, h: float) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        stages = []
        k1 = derivatives(spec, s)
        stages.append(("k1", k1))
        k2 = derivatives(spec, s + 0.5 * h * k1)
        stages.append(("k2", k2))
        k3 = derivatives(spec, s + 0.5 * h * k2)
        stages.append(("k3", k3))
        k4 = derivatives(spec, s + h * k3)
        stages.append(("k4", k4))
    for label, k in stages:
        if not np.all(np.isfinite(k)):
            raise DynamicsError(f"non-finite derivative at RK4 stage {label}")
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(spec: SystemSpec, s0: np.ndarray, n_steps: int) -> np.ndarray:
    """Trajectory [s0, step(s0), ...] of length n_steps + 1."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    s0 = np.asarray(s0, dtype=np.float64)
    out = np.empty((n_steps + 1, s0.size))
    out[0] = s0
    s = s0
    for i in range(n_steps):
        try:
            s = step_dynamics(spec, s)
        except DynamicsError as e:
            raise DynamicsError(f"step {i + 1}: {e}") from None
        out[i + 1] = s
    return out


def observe_step(spec: SystemSpec, s: np.ndarray, dt_obs: float) -> np.ndarray:
    """Advance one observation interval by sub-stepping at <= spec.dt."""
    if spec.name == "circular_motion":
        return np.array([s[0] + s[1] * dt_obs, s[1]])
    n_sub = max(1, math.ceil(dt_obs / spec.dt))
    h = dt_obs / n_sub
    s = np.asarray(s, dtype=np.float64)
    for _ in range(n_sub):
        s = _rk4(spec, s, h)
    return s


def observe_trajectory(spec: SystemSpec, s0: np.ndarray, n_frames: int,
                       dt_obs: float) -> np.ndarray:
    """n_frames states spaced dt_obs apart, starting at s0."""
    out = np.empty((n_frames, np.asarray(s0).size))
    out[0] = s0
    for i in range(1, n_frames):
        out[i] = observe_step(spec, out[i - 1], dt_obs)
    return out


def state_energy(spec: SystemSpec, s: np.ndarray) -> float:
    """Total mechanical energy of a state (kinetic + potential [+ spring]).

    Potential reference: the pivot height (a hanging mass at distance L sits
    at potential -m*g*L).  Circular motion is a free rotor: kinetic only.
    """
    g = spec.gravity
    name = spec.name
    if name == "circular_motion":
        return 0.5 * spec.m1 * (spec.radius * s[1]) ** 2
    if name == "single_pendulum":
        theta, theta_dot = s
        return (0.5 * spec.m1 * (spec.l1 * theta_dot) ** 2
                - spec.m1 * g * spec.l1 * math.cos(theta))
    if name == "rigid_double_pendulum":
        th1, th2, w1, w2 = s
        m1, m2, l1, l2 = spec.m1, spec.m2, spec.l1, spec.l2
        t = (0.5 * m1 * (l1 * w1) ** 2
             + 0.5 * m2 * ((l1 * w1) ** 2 + (l2 * w2) ** 2
                           + 2 * l1 * l2 * w1 * w2 * math.cos(th1 - th2)))
        v = -(m1 + m2) * g * l1 * math.cos(th1) - m2 * g * l2 * math.cos(th2)
        return t + v
    th1, th2, z, w1, w2, zd = s
    m1, m2, l1 = spec.m1, spec.m2, spec.l1
    l2, k = spec.spring_rest, spec.spring_k
    r = l2 + z
    t = (0.5 * m1 * (l1 * w1) ** 2
         + 0.5 * m2 * ((l1 * w1) ** 2 + (r * w2) ** 2 + zd ** 2
                       + 2 * l1 * r * w1 * w2 * math.cos(th1 - th2)
                       - 2 * l1 * w1 * zd * math.sin(th1 - th2)))
    v = (-(m1 + m2) * g * l1 * math.cos(th1) - m2 * g * r * math.cos(th2)
         + 0.5 * k * z * z)
    return t + v
