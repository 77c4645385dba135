"""Copy-data and linear-extrapolation baselines, in variable and pixel space.

The primary baselines operate on extracted physical variables; the
pixel-space variants exist for pixel-MSE comparisons against learned
models (and as the flagged alternative reading of the baseline).
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import state_energy
from .specs import PhysicalVariables, SystemSpec

BASELINE_KINDS = ("copy", "linear_extrapolation")

_ANGLE_FIELDS = ("theta1_deg", "theta2_deg")


def wrap_deg(a: float) -> float:
    """Wrap degrees to (-180, 180]."""
    return -((-a + 180.0) % 360.0 - 180.0)


def _recompute_energy(spec: SystemSpec, v: PhysicalVariables) -> float:
    rad = math.pi / 180.0
    if spec.name in ("circular_motion", "single_pendulum"):
        state = np.array([v.theta1_deg * rad, v.theta1_dot_deg_s * rad])
    elif spec.name == "rigid_double_pendulum":
        state = np.array([v.theta1_deg * rad, v.theta2_deg * rad,
                          v.theta1_dot_deg_s * rad, v.theta2_dot_deg_s * rad])
    else:
        state = np.array([v.theta1_deg * rad, v.theta2_deg * rad, v.z_m,
                          v.theta1_dot_deg_s * rad, v.theta2_dot_deg_s * rad,
                          v.z_dot_m_s])
    return state_energy(spec, state)


def total_energy(spec: SystemSpec, v: PhysicalVariables) -> float:
    """Closed-form total energy from a complete PhysicalVariables record."""
    required = {"circular_motion": ("theta1_deg", "theta1_dot_deg_s"),
                "single_pendulum": ("theta1_deg", "theta1_dot_deg_s"),
                "rigid_double_pendulum": ("theta1_deg", "theta2_deg",
                                          "theta1_dot_deg_s", "theta2_dot_deg_s"),
                "elastic_double_pendulum": ("theta1_deg", "theta2_deg", "z_m",
                                            "theta1_dot_deg_s", "theta2_dot_deg_s",
                                            "z_dot_m_s")}[spec.name]
    missing = [f for f in required if getattr(v, f) is None]
    if missing:
        raise ValueError(f"total_energy: missing fields {missing} for {spec.name}")
    return _recompute_energy(spec, v)


def baseline_predict(kind: str, history: list, spec: SystemSpec = None) -> PhysicalVariables:
    """Predict the next PhysicalVariables from past ones.

    copy returns the last entry; linear_extrapolation returns
    2*last - previous with angles extrapolated on the unwrapped line.
    When a spec is supplied, the result's total energy is recomputed from
    the extrapolated fields (copy keeps the copied value).
    """
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    if kind == "copy":
        if len(history) < 1:
            raise ValueError("copy baseline needs at least 1 past entry")
        last = history[-1]
        return PhysicalVariables(**last.as_dict())
    if len(history) < 2:
        raise ValueError("linear extrapolation needs at least 2 past entries")
    last, prev = history[-1], history[-2]
    fields = {}
    for name in PhysicalVariables.FIELD_ORDER:
        a, b = getattr(prev, name), getattr(last, name)
        if a is None or b is None:
            continue
        if name in _ANGLE_FIELDS:
            fields[name] = wrap_deg(b + wrap_deg(b - a))
        else:
            fields[name] = 2.0 * b - a
    out = PhysicalVariables(**fields)
    if spec is not None and out.total_energy_j is not None:
        out.total_energy_j = _recompute_energy(spec, out)
    return out


def baseline_predict_pixels(kind: str, pair_history: list) -> np.ndarray:
    """Pixel-space variant on frame pairs; linear output is clipped to [0, 1]."""
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    if kind == "copy":
        if len(pair_history) < 1:
            raise ValueError("copy baseline needs at least 1 past pair")
        return np.array(pair_history[-1], copy=True)
    if len(pair_history) < 2:
        raise ValueError("linear extrapolation needs at least 2 past pairs")
    last, prev = pair_history[-1], pair_history[-2]
    return np.clip(2.0 * last - prev, 0.0, 1.0)
